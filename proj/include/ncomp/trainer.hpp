#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ncomp/curriculum.hpp"
#include "ncomp/experiment.hpp"
#include "ncomp/genome.hpp"
#include "ncomp/population.hpp"

namespace ncomp {

struct IterationLog {
    std::size_t iteration = 0;
    std::size_t level = 0;
    std::size_t lineage = 0;
    double center_fitness = 0.0;
    double center_f_e = 0.0;
    bool updated = false;
    double pop_mean = 0.0;
    double pop_min = 0.0;
    double pop_max = 0.0;
    std::size_t streak = 0;
    std::size_t buffer = 0;
    double wall_time = 0.0;  // seconds since the run started
};

struct LineageSummary {
    std::size_t lineage = 0;
    std::size_t first_iteration = 0;
    std::size_t iterations = 0;
    std::size_t levels_solved = 0;  // highest level solved in this lineage
};

struct TrainResult {
    std::size_t iterations = 0;
    std::size_t final_level = 1;
    std::size_t updates = 0;
    bool finished = false;  // evaluation level passed
    std::vector<LineageSummary> lineages;
    std::vector<CurriculumEvent> events;
    std::vector<IterationLog> log;
    std::vector<double> genome;
    // Genome at the highest level solved by any lineage.
    std::size_t best_genome_level = 0;
    std::vector<double> best_genome;

    std::size_t best_level_solved() const;
    nlohmann::json summary_json() const;
};

// Builds the scored task source for a domain: rejection sampling for the
// training levels.
TaskSource make_task_source(std::shared_ptr<const Domain> domain, TaskKind kind);

// Initial NeuralCore values for a run.
std::vector<double> initial_genome(const ExperimentConfig& config, std::mt19937_64& rng);

// Curriculum + NES loop for one seed. When `out_dir` is set it writes
// run.jsonl, run.csv, events.jsonl, genome_level0.bin, genome_levelK.bin on
// every solved level (suffixed _lineageL after a restart), genome_final.bin and summary.json. Progress lines go
// to `progress` when given.
TrainResult train(const ExperimentConfig& config, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out_dir, std::ostream* progress = nullptr);

}  // namespace ncomp
