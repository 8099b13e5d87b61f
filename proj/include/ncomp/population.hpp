#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ncomp/data_modules.hpp"
#include "ncomp/engine.hpp"
#include "ncomp/fitness.hpp"
#include "ncomp/oracle.hpp"

namespace ncomp {

// A task together with its oracle trace for the kind it is scored as.
struct ScoredTask {
    TaskInstance task;
    TargetTrace trace;
};

ScoredTask make_scored_task(const Domain& domain, TaskInstance task, TaskKind kind);

struct EvalContext {
    const DataModules* modules = nullptr;
    EngineConfig engine;
    TaskKind kind = TaskKind::search;
};

// Teacher-scored episodes of one core on every task.
std::vector<EpisodeScore> score_core(const AlgorithmicCore& core, std::span<const ScoredTask> tasks,
                                     const EvalContext& ctx);
FitnessReport evaluate_core(const AlgorithmicCore& core, std::span<const ScoredTask> tasks, const EvalContext& ctx);

// Fitness of each genome (NeuralCore values) on the same tasks. The serial
// version is the reference; the parallel one distributes genomes over
// OpenMP threads and returns identical reports.
std::vector<FitnessReport> evaluate_population_serial(std::span<const std::vector<double>> genomes,
                                                      std::span<const ScoredTask> tasks, const EvalContext& ctx);
std::vector<FitnessReport> evaluate_population(std::span<const std::vector<double>> genomes,
                                               std::span<const ScoredTask> tasks, const EvalContext& ctx);

// Autonomous episodes of one core over many tasks (records dropped).
std::vector<EpisodeResult> run_batch_serial(const AlgorithmicCore& core, std::span<const ScoredTask> tasks,
                                            const EvalContext& ctx);
std::vector<EpisodeResult> run_batch(const AlgorithmicCore& core, std::span<const ScoredTask> tasks,
                                     const EvalContext& ctx);

// Number of OpenMP threads used by the parallel versions.
int worker_threads();
void set_worker_threads(int n);

}  // namespace ncomp
