#include "ncomp/evaluation.hpp"

#include <chrono>

#include "ncomp/errors.hpp"
#include "ncomp/fitness.hpp"
#include "ncomp/reference_program.hpp"
#include "ncomp/serialization.hpp"

namespace ncomp {

namespace {

// Owns the NeuralCore values for genome-backed cores.
class GenomeCore final : public AlgorithmicCore {
public:
    explicit GenomeCore(const Genome& g) : core_(g) {}
    ControllerStep control(const PhaseReals& c_i, const CompReals& c_m_prev, const OpOneHot& c_f_prev) const override {
        return core_.control(c_i, c_m_prev, c_f_prev);
    }
    int select_operation(const ControllerState& c_c, const CompReals& c_m, const PhaseReals& c_i) const override {
        return core_.select_operation(c_c, c_m, c_i);
    }

private:
    NeuralCore core_;
};

}  // namespace

std::unique_ptr<AlgorithmicCore> load_core(const std::string& spec) {
    if (spec == "reference") return std::make_unique<ReferenceProgram>();
    if (spec == "reference-weights") return std::make_unique<GenomeCore>(reference_genome());
    return std::make_unique<GenomeCore>(load_genome(spec));
}

nlohmann::json EvalReport::json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels)
        lv.push_back({{"level", l.level},
                      {"samples", l.samples},
                      {"exact", l.exact},
                      {"accuracy", l.samples ? double(l.exact) / double(l.samples) : 0.0},
                      {"steps", l.steps}});
    return {{"domain", domain},
            {"task", to_string(kind)},
            {"samples", samples},
            {"exact", exact},
            {"accuracy", accuracy()},
            {"batches", batches},
            {"batches_at_max", batches_at_max},
            {"learning_triggered", learning_triggered()},
            {"mean_fitness", mean_fitness},
            {"levels", lv},
            {"failures", failures}};
}

EvalReport evaluate(const AlgorithmicCore& core, const Domain& domain, const DataModules& modules, TaskKind kind,
                    const EngineConfig& engine, std::size_t samples, std::size_t min_level, std::size_t max_level,
                    std::size_t minibatch, std::uint64_t seed) {
    if (min_level < 1 || min_level > max_level) throw ConfigError("level range is empty");
    if (minibatch == 0) throw ConfigError("minibatch must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<ScoredTask> tasks;
    tasks.reserve(samples);
    std::vector<std::size_t> levels;
    for (std::size_t l = min_level; l <= max_level; ++l)
        if (level_attainable(domain, l)) levels.push_back(l);
    if (levels.empty()) throw SamplingError("no attainable level in range");
    for (std::size_t i = 0; i < samples; ++i)
        tasks.push_back(make_scored_task(domain, sample_task(domain, rng, levels[i % levels.size()]), kind));

    const EvalContext ctx{&modules, engine, kind};
    const auto results = run_batch(core, tasks, ctx);

    EvalReport r;
    r.domain = domain.name();
    r.kind = kind;
    r.samples = samples;
    for (std::size_t l = min_level; l <= max_level; ++l) r.levels.push_back({l, 0, 0, 0});
    for (std::size_t i = 0; i < samples; ++i) {
        auto& lv = r.levels[tasks[i].task.level - min_level];
        ++lv.samples;
        lv.steps += results[i].steps;
        if (results[i].exact) {
            ++lv.exact;
            ++r.exact;
        } else if (r.failures.size() < 10) {
            auto f = task_to_json(tasks[i].task);
            f["termination"] = to_string(results[i].termination);
            f["steps"] = results[i].steps;
            f["expected_steps"] = tasks[i].trace.total_steps();
            if (auto m = results[i].score.first_mistake()) f["first_mistake"] = *m;
            r.failures.push_back(f);
        }
    }

    double fitness_sum = 0.0;
    for (std::size_t b = 0; b + minibatch <= tasks.size(); b += minibatch) {
        const auto report = evaluate_core(core, std::span<const ScoredTask>(tasks).subspan(b, minibatch), ctx);
        ++r.batches;
        if (report.at_max) ++r.batches_at_max;
        fitness_sum += report.fitness;
    }
    r.mean_fitness = r.batches ? fitness_sum / double(r.batches) : 0.0;
    return r;
}

nlohmann::json ScaleResult::json() const {
    return {{"level", level},
            {"expected_steps", expected_steps},
            {"steps", steps},
            {"exact", exact},
            {"termination", to_string(termination)},
            {"seconds", seconds}};
}

ScaleResult scale_test(const AlgorithmicCore& core, const Domain& domain, const DataModules& modules,
                       const EngineConfig& engine, std::size_t level, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto t0 = std::chrono::steady_clock::now();
    const ScoredTask t = make_scored_task(domain, task_at_level(domain, rng, level), TaskKind::plan);
    Engine eng(core, modules, engine);
    const auto res = eng.run_episode(t.task, TaskKind::plan, EpisodeMode::autonomous, &t.trace, false);
    ScaleResult s;
    s.level = level;
    s.expected_steps = t.trace.total_steps();
    s.steps = res.steps;
    s.exact = res.exact;
    s.termination = res.termination;
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

}  // namespace ncomp
