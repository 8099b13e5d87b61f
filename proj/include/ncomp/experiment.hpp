#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncomp/curriculum.hpp"
#include "ncomp/data_modules.hpp"
#include "ncomp/domains.hpp"
#include "ncomp/engine.hpp"
#include "ncomp/learned_modules.hpp"
#include "ncomp/nes.hpp"

namespace ncomp {

struct DomainSpec {
    std::string name = "sokoban";
    std::size_t size = 6;
    std::array<std::uint8_t, 4> permutation{0, 1, 2, 3};
    bool operator==(const DomainSpec&) const = default;
};

// Everything a command needs; every run is reproducible from this plus the
// seed. Unset JSON keys keep the defaults below.
struct ExperimentConfig {
    std::string experiment = "train-search";
    std::string description;
    DomainSpec domain;
    TaskKind task = TaskKind::search;
    // "oracle" or a directory of trained module files.
    std::string data_modules = "oracle";
    std::vector<std::uint64_t> seeds{1};
    std::size_t budget = 10000;
    NesConfig nes;
    CurriculumConfig curriculum;
    EngineConfig engine;
    double init_scale = 0.1;
    // "random", "reference", "zero" or a genome file.
    std::string initial_genome = "random";
    std::size_t start_level = 1;
    // Evaluation and transfer.
    std::string core = "reference";  // "reference", "reference-weights" or a genome file
    std::size_t eval_samples = 2000;
    std::size_t min_level = 1;
    std::size_t max_level = 21;
    // Scale tests.
    std::vector<std::size_t> scale_levels{2500};
    // Ablation variants.
    std::vector<std::string> variants;
    // Data-module training.
    TrainingBudget data_budget;
    std::vector<std::string> modules;  // empty = all learnable
    int threads = 0;                   // 0 = OpenMP default
    bool log_wall_time = true;

    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
// Hash of the canonical JSON form; embedded in every log.
std::string config_hash(const ExperimentConfig& c);

std::shared_ptr<const Domain> build_domain(const DomainSpec& spec);
std::shared_ptr<const DataModules> build_modules(const ExperimentConfig& c, const std::shared_ptr<const Domain>& d);

// Applies a named variant: any engine ablation plus no_bad_memories and
// no_restarts.
ExperimentConfig apply_variant(ExperimentConfig c, const std::string& variant);

// "a,b,c,d" permutation of the four cell codes.
std::array<std::uint8_t, 4> parse_permutation(const std::string& text);

}  // namespace ncomp
