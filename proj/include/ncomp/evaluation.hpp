#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncomp/engine.hpp"
#include "ncomp/experiment.hpp"
#include "ncomp/population.hpp"

namespace ncomp {

// "reference" (scripted program), "reference-weights" (NeuralCore running
// reference_genome) or a genome file.
std::unique_ptr<AlgorithmicCore> load_core(const std::string& spec);

struct LevelStats {
    std::size_t level = 0;
    std::size_t samples = 0;
    std::size_t exact = 0;
    std::size_t steps = 0;  // total computation steps
};

struct EvalReport {
    std::string domain;
    TaskKind kind = TaskKind::search;
    std::size_t samples = 0;
    std::size_t exact = 0;
    std::vector<LevelStats> levels;
    // Teacher-scored minibatches: how many would have triggered learning.
    std::size_t batches = 0;
    std::size_t batches_at_max = 0;
    double mean_fitness = 0.0;
    std::vector<nlohmann::json> failures;  // first few failing tasks

    double accuracy() const { return samples ? double(exact) / double(samples) : 0.0; }
    bool learning_triggered() const { return batches_at_max != batches; }
    nlohmann::json json() const;
};

// Samples `samples` tasks round-robin over [min_level, max_level], runs
// autonomous episodes against the oracle traces and scores teacher-scored
// minibatches of the configured size.
EvalReport evaluate(const AlgorithmicCore& core, const Domain& domain, const DataModules& modules, TaskKind kind,
                    const EngineConfig& engine, std::size_t samples, std::size_t min_level, std::size_t max_level,
                    std::size_t minibatch, std::uint64_t seed);

struct ScaleResult {
    std::size_t level = 0;
    std::size_t expected_steps = 0;
    std::size_t steps = 0;
    bool exact = false;
    Termination termination = Termination::step_limit;
    double seconds = 0.0;
    nlohmann::json json() const;
};

// One constructed plan task of the given level, run autonomously.
ScaleResult scale_test(const AlgorithmicCore& core, const Domain& domain, const DataModules& modules,
                       const EngineConfig& engine, std::size_t level, std::uint64_t seed);

}  // namespace ncomp
