#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncomp/engine.hpp"
#include "ncomp/oracle.hpp"

namespace ncomp {

// Words are stored as bit strings.
nlohmann::json task_to_json(const TaskInstance& task);
TaskInstance task_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const TargetTrace& trace);
TargetTrace trace_from_json(const nlohmann::json& j);

// JSON-lines: a header line {"kind", "level", "explore_steps",
// "backtrack_steps"} followed by one line per expected step.
void write_trace_jsonl(std::ostream& out, const TargetTrace& trace);
TargetTrace read_trace_jsonl(std::istream& in);

// One StepRecord per line.
void write_records_jsonl(std::ostream& out, const std::vector<StepRecord>& records);

// FNV-1a of the text, as 16 hex digits.
std::string stable_hash(const std::string& text);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ncomp
