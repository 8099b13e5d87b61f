#include "ncomp/serialization.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ncomp/errors.hpp"

namespace ncomp {

nlohmann::json task_to_json(const TaskInstance& task) {
    return {{"domain", task.domain},
            {"level", task.level},
            {"start", to_bit_string(task.start)},
            {"goal", to_bit_string(task.goal)}};
}

TaskInstance task_from_json(const nlohmann::json& j) {
    TaskInstance t;
    t.domain = j.at("domain").get<std::string>();
    t.level = j.at("level").get<std::size_t>();
    t.start = from_bit_string(j.at("start").get<std::string>());
    t.goal = from_bit_string(j.at("goal").get<std::string>());
    if (t.start.size() != t.goal.size()) throw ConfigError("task start and goal widths differ");
    return t;
}

nlohmann::json trace_to_json(const TargetTrace& trace) {
    nlohmann::json explore = nlohmann::json::array();
    for (const auto& s : trace.explore) explore.push_back({{"d_m", to_bit_string(s.d_m)}, {"op", s.op}});
    nlohmann::json backtrack = nlohmann::json::array();
    for (const auto& w : trace.backtrack) backtrack.push_back(to_bit_string(w));
    return {{"kind", to_string(trace.kind)}, {"level", trace.level}, {"explore", explore}, {"backtrack", backtrack}};
}

TargetTrace trace_from_json(const nlohmann::json& j) {
    TargetTrace t;
    t.kind = task_kind_from_string(j.at("kind").get<std::string>());
    t.level = j.at("level").get<std::size_t>();
    for (const auto& s : j.at("explore"))
        t.explore.push_back({from_bit_string(s.at("d_m").get<std::string>()), s.at("op").get<int>()});
    for (const auto& w : j.at("backtrack")) t.backtrack.push_back(from_bit_string(w.get<std::string>()));
    return t;
}

void write_trace_jsonl(std::ostream& out, const TargetTrace& trace) {
    out << nlohmann::json{{"kind", to_string(trace.kind)},
                          {"level", trace.level},
                          {"explore_steps", trace.explore_steps()},
                          {"backtrack_steps", trace.backtrack_steps()}}
               .dump()
        << '\n';
    std::size_t step = 1;
    for (const auto& s : trace.explore)
        out << nlohmann::json{{"step", step++}, {"phase", "explore"}, {"d_m", to_bit_string(s.d_m)}, {"op", s.op}}.dump()
            << '\n';
    if (trace.kind == TaskKind::search)
        out << nlohmann::json{{"step", step++}, {"phase", "check"}, {"op", kNop}}.dump() << '\n';
    for (const auto& w : trace.backtrack)
        out << nlohmann::json{{"step", step++}, {"phase", "backtrack"}, {"d_m", to_bit_string(w)}, {"op", kNop}}.dump()
            << '\n';
}

TargetTrace read_trace_jsonl(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty trace file");
    const auto header = nlohmann::json::parse(line);
    TargetTrace t;
    t.kind = task_kind_from_string(header.at("kind").get<std::string>());
    t.level = header.at("level").get<std::size_t>();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const auto phase = j.at("phase").get<std::string>();
        if (phase == "explore") {
            t.explore.push_back({from_bit_string(j.at("d_m").get<std::string>()), j.at("op").get<int>()});
        } else if (phase == "backtrack") {
            t.backtrack.push_back(from_bit_string(j.at("d_m").get<std::string>()));
        } else if (phase != "check") {
            throw ConfigError("unknown trace phase '" + phase + "'");
        }
    }
    if (t.explore.size() != header.at("explore_steps").get<std::size_t>() ||
        t.backtrack.size() != header.at("backtrack_steps").get<std::size_t>())
        throw ConfigError("trace file is truncated");
    return t;
}

void write_records_jsonl(std::ostream& out, const std::vector<StepRecord>& records) {
    for (const auto& r : records) out << step_record_json(r) << '\n';
}

std::string stable_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace ncomp
