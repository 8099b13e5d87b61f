#include "ncomp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

#include "ncomp/errors.hpp"
#include "ncomp/reference_program.hpp"
#include "ncomp/serialization.hpp"

namespace ncomp {

namespace {

// Single writer for all run files.
class RunWriter {
public:
    RunWriter(const std::filesystem::path& dir, const ExperimentConfig& config, std::uint64_t seed)
        : dir_(dir), hash_(config_hash(config)), wall_(config.log_wall_time), seed_(seed) {
        std::filesystem::create_directories(dir);
        run_.open(dir / "run.jsonl");
        csv_.open(dir / "run.csv");
        events_.open(dir / "events.jsonl");
        if (!run_ || !csv_ || !events_) throw ConfigError("cannot write run files in " + dir.string());
        csv_ << "iteration,level,lineage,center_fitness,center_f_e,updated,pop_mean,pop_min,pop_max,streak,buffer";
        if (wall_) csv_ << ",wall_time";
        csv_ << '\n';
    }

    void iteration(const IterationLog& l) {
        nlohmann::json j = {{"iteration", l.iteration},
                            {"level", l.level},
                            {"lineage", l.lineage},
                            {"center_fitness", l.center_fitness},
                            {"center_f_e", l.center_f_e},
                            {"updated", l.updated},
                            {"pop_mean", l.pop_mean},
                            {"pop_min", l.pop_min},
                            {"pop_max", l.pop_max},
                            {"streak", l.streak},
                            {"buffer", l.buffer},
                            {"seed", seed_},
                            {"config_hash", hash_}};
        if (wall_) j["wall_time"] = l.wall_time;
        run_ << j.dump() << '\n';
        csv_ << l.iteration << ',' << l.level << ',' << l.lineage << ',' << l.center_fitness << ','
             << l.center_f_e << ',' << (l.updated ? 1 : 0) << ',' << l.pop_mean << ',' << l.pop_min << ','
             << l.pop_max << ',' << l.streak << ',' << l.buffer;
        if (wall_) csv_ << ',' << l.wall_time;
        csv_ << '\n';
    }

    void event(const CurriculumEvent& e) {
        events_ << nlohmann::json{{"iteration", e.iteration},
                                  {"event", to_string(e.kind)},
                                  {"level", e.level},
                                  {"lineage", e.lineage},
                                  {"without_learning", e.without_learning},
                                  {"config_hash", hash_}}
                       .dump()
                << '\n';
    }

    void genome(const std::string& name, const std::vector<double>& values) {
        save_genome(NeuralCore::make_genome(values), dir_ / name);
    }

    void summary(nlohmann::json j) {
        j["config_hash"] = hash_;
        j["seed"] = seed_;
        write_json_file(dir_ / "summary.json", j);
    }

    void flush() {
        run_.flush();
        csv_.flush();
        events_.flush();
    }

private:
    std::filesystem::path dir_;
    std::string hash_;
    bool wall_;
    std::uint64_t seed_;
    std::ofstream run_, csv_, events_;
};

}  // namespace

std::size_t TrainResult::best_level_solved() const {
    std::size_t best = 0;
    for (const auto& l : lineages) best = std::max(best, l.levels_solved);
    return best;
}

nlohmann::json TrainResult::summary_json() const {
    nlohmann::json lin = nlohmann::json::array();
    for (const auto& l : lineages)
        lin.push_back({{"lineage", l.lineage},
                       {"first_iteration", l.first_iteration},
                       {"iterations", l.iterations},
                       {"levels_solved", l.levels_solved}});
    std::size_t quiet = 0;
    for (const auto& e : events)
        if (e.kind == EventKind::level_solved && e.without_learning) ++quiet;
    return {{"iterations", iterations},
            {"final_level", final_level},
            {"updates", updates},
            {"finished", finished},
            {"best_level_solved", best_level_solved()},
            {"levels_solved_without_learning", quiet},
            {"restarts", lineages.empty() ? 0 : lineages.size() - 1},
            {"lineages", lin}};
}

TaskSource make_task_source(std::shared_ptr<const Domain> domain, TaskKind kind) {
    return [domain, kind](std::size_t level, std::mt19937_64& rng) {
        return make_scored_task(*domain, sample_task(*domain, rng, next_attainable_level(*domain, level)), kind);
    };
}

std::vector<double> initial_genome(const ExperimentConfig& config, std::mt19937_64& rng) {
    const auto& g = config.initial_genome;
    if (g == "random") return NeuralCore::random_genome(rng, config.init_scale).values;
    if (g == "zero") return NeuralCore::zero_genome().values;
    if (g == "reference") return reference_genome().values;
    return NeuralCore(load_genome(g)).genome().values;
}

TrainResult train(const ExperimentConfig& config, std::uint64_t seed,
                  const std::optional<std::filesystem::path>& out_dir, std::ostream* progress) {
    config.validate();
    if (config.threads > 0) set_worker_threads(config.threads);
    const auto domain = build_domain(config.domain);
    const auto modules = build_modules(config, domain);
    const EvalContext ctx{modules.get(), config.engine, config.task};
    const TaskSource source = make_task_source(domain, config.task);

    std::mt19937_64 rng(seed);
    std::optional<RunWriter> writer;
    if (out_dir) writer.emplace(*out_dir, config, seed);
    const auto t0 = std::chrono::steady_clock::now();

    TrainResult result;
    std::vector<double> theta = initial_genome(config, rng);
    if (writer) writer->genome("genome_level0.bin", theta);

    CurriculumState state;
    state.level = config.start_level;
    result.lineages.push_back({0, 0, 0, 0});

    while (state.iteration < config.budget && !state.finished) {
        const auto batch = compose_minibatch(state, config.curriculum, config.nes.minibatch, source, rng);
        const PopulationEvaluator eval_batch = [&](std::span<const std::vector<double>> genomes) {
            return evaluate_population(genomes, batch, ctx);
        };
        const std::size_t level = state.level;
        const std::size_t lineage = state.lineage;
        NesStep step;
        try {
            step = nes_iteration(theta, config.nes, rng, eval_batch);
        } catch (const NumericError& e) {
            if (!config.curriculum.restarts || state.level >= config.curriculum.evaluation_level()) throw;
            // Abort the lineage: behave as if the restart window ran out.
            if (progress) *progress << "lineage " << lineage << " aborted: " << e.what() << '\n';
            state.level_iterations = config.curriculum.restart_window;
            step.center.fitness = 0.0;
            step.center.kind = config.task;
        }
        if (step.updated) ++result.updates;
        auto events = curriculum_step(state, config.curriculum, step.center, step.updated, batch);

        IterationLog log;
        log.iteration = state.iteration;
        log.level = level;
        log.lineage = lineage;
        log.center_fitness = step.center.fitness;
        log.center_f_e = step.center.mean_f_e;
        log.updated = step.updated;
        const auto& off = step.offspring_fitness;
        if (!off.empty()) {
            double sum = 0.0;
            for (double f : off) sum += f;
            log.pop_mean = sum / static_cast<double>(off.size());
            log.pop_min = *std::min_element(off.begin(), off.end());
            log.pop_max = *std::max_element(off.begin(), off.end());
        } else {
            log.pop_mean = log.pop_min = log.pop_max = step.center.fitness;
        }
        log.streak = state.streak;
        log.buffer = state.buffer.size();
        log.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (writer) writer->iteration(log);
        result.log.push_back(log);
        result.lineages.back().iterations += 1;

        for (const auto& e : events) {
            if (writer) writer->event(e);
            if (e.kind == EventKind::level_solved) {
                auto& cur = result.lineages.back();
                cur.levels_solved = std::max(cur.levels_solved, e.level);
                if (e.level > result.best_genome_level) {
                    result.best_genome_level = e.level;
                    result.best_genome = theta;
                }
                if (writer) {
                    std::string name = "genome_level" + std::to_string(e.level);
                    if (e.lineage > 0) name += "_lineage" + std::to_string(e.lineage);
                    writer->genome(name + ".bin", theta);
                }
                if (progress)
                    *progress << "iteration " << e.iteration << ": level " << e.level << " solved"
                              << (e.without_learning ? " without learning" : "") << '\n';
            } else if (e.kind == EventKind::restart) {
                theta = NeuralCore::random_genome(rng, config.init_scale).values;
                result.lineages.push_back({state.lineage, state.iteration, 0, 0});
                if (progress) *progress << "iteration " << e.iteration << ": restart, lineage " << state.lineage << '\n';
            } else if (e.kind == EventKind::evaluation_passed && progress) {
                *progress << "iteration " << e.iteration << ": evaluation level passed\n";
            }
            result.events.push_back(e);
        }
        if (progress && state.iteration % 100 == 0)
            *progress << "iteration " << state.iteration << " level " << state.level << " fitness "
                      << step.center.fitness << '\n';
        if (writer && state.iteration % 100 == 0) writer->flush();
    }

    result.iterations = state.iteration;
    result.final_level = state.level;
    result.finished = state.finished;
    result.genome = theta;
    if (writer) {
        writer->genome("genome_final.bin", theta);
        auto s = result.summary_json();
        s["config"] = to_json(config);
        s["budget_exhausted"] = !state.finished && state.iteration >= config.budget;
        writer->summary(s);
    }
    return result;
}

}  // namespace ncomp
