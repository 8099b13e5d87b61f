#include "ncomp/population.hpp"

#include <exception>

#include <omp.h>

#include "ncomp/errors.hpp"

namespace ncomp {

namespace {

void check(const EvalContext& ctx) {
    if (ctx.modules == nullptr) throw ConfigError("evaluation context has no data modules");
}

// Runs body(i) for i in [0, n) over OpenMP threads, rethrowing the first
// exception on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

ScoredTask make_scored_task(const Domain& domain, TaskInstance task, TaskKind kind) {
    TargetTrace trace = oracle_trace(domain, task, kind);
    return {std::move(task), std::move(trace)};
}

std::vector<EpisodeScore> score_core(const AlgorithmicCore& core, std::span<const ScoredTask> tasks,
                                     const EvalContext& ctx) {
    check(ctx);
    Engine engine(core, *ctx.modules, ctx.engine);
    std::vector<EpisodeScore> scores;
    scores.reserve(tasks.size());
    for (const auto& t : tasks)
        scores.push_back(engine.run_episode(t.task, ctx.kind, EpisodeMode::teacher_scored, &t.trace, false).score);
    return scores;
}

FitnessReport evaluate_core(const AlgorithmicCore& core, std::span<const ScoredTask> tasks, const EvalContext& ctx) {
    const auto scores = score_core(core, tasks, ctx);
    return fitness(ctx.kind, scores);
}

std::vector<FitnessReport> evaluate_population_serial(std::span<const std::vector<double>> genomes,
                                                      std::span<const ScoredTask> tasks, const EvalContext& ctx) {
    std::vector<FitnessReport> out;
    out.reserve(genomes.size());
    for (const auto& g : genomes) out.push_back(evaluate_core(NeuralCore(g), tasks, ctx));
    return out;
}

std::vector<FitnessReport> evaluate_population(std::span<const std::vector<double>> genomes,
                                               std::span<const ScoredTask> tasks, const EvalContext& ctx) {
    check(ctx);
    std::vector<FitnessReport> out(genomes.size());
    parallel_for(genomes.size(), [&](std::size_t i) { out[i] = evaluate_core(NeuralCore(genomes[i]), tasks, ctx); });
    return out;
}

std::vector<EpisodeResult> run_batch_serial(const AlgorithmicCore& core, std::span<const ScoredTask> tasks,
                                            const EvalContext& ctx) {
    check(ctx);
    Engine engine(core, *ctx.modules, ctx.engine);
    std::vector<EpisodeResult> out;
    out.reserve(tasks.size());
    for (const auto& t : tasks)
        out.push_back(engine.run_episode(t.task, ctx.kind, EpisodeMode::autonomous, &t.trace, false));
    return out;
}

std::vector<EpisodeResult> run_batch(const AlgorithmicCore& core, std::span<const ScoredTask> tasks,
                                     const EvalContext& ctx) {
    check(ctx);
    Engine engine(core, *ctx.modules, ctx.engine);
    std::vector<EpisodeResult> out(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        out[i] = engine.run_episode(tasks[i].task, ctx.kind, EpisodeMode::autonomous, &tasks[i].trace, false);
    });
    return out;
}

int worker_threads() { return omp_get_max_threads(); }

void set_worker_threads(int n) {
    if (n < 1) throw ConfigError("thread count must be >= 1");
    omp_set_num_threads(n);
}

}  // namespace ncomp
