// Command-line harness: training, evaluation, transfer, scale tests, oracle
// inspection, data-module training and ablations.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncomp/errors.hpp"
#include "ncomp/evaluation.hpp"
#include "ncomp/experiment.hpp"
#include "ncomp/learned_modules.hpp"
#include "ncomp/oracle.hpp"
#include "ncomp/serialization.hpp"
#include "ncomp/trainer.hpp"

namespace fs = std::filesystem;
using namespace ncomp;

namespace {

// Flags shared by every verb; unset flags leave the config untouched.
struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> budget;
    std::optional<std::string> domain;
    std::optional<std::size_t> size;
    std::optional<std::string> permutation;
    std::optional<std::string> task;
    std::optional<std::string> data_modules;
    std::optional<std::string> ablation;
    std::optional<int> threads;
    bool no_wall_time = false;
    bool quiet = false;
    std::string out = "runs/latest";

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config, "Preset or config JSON file");
        app->add_option("--seed", seed, "Run a single seed instead of the config's list");
        app->add_option("--budget", budget, "Iteration budget");
        app->add_option("--domain", domain, "sokoban, puzzle or manipulation");
        app->add_option("--size", size, "Sokoban grid size");
        app->add_option("--perm", permutation, "Cell-code permutation, e.g. 3,1,2,0");
        app->add_option("--task", task, "search or plan");
        app->add_option("--data-modules", data_modules, "\"oracle\" or a directory of trained modules");
        app->add_option("--ablation", ablation, "Engine toggle set");
        app->add_option("--threads", threads, "Worker threads (0 = default)");
        app->add_flag("--no-wall-time", no_wall_time, "Omit wall time from logs so reruns are byte-identical");
        app->add_flag("-q,--quiet", quiet, "No progress output");
        app->add_option("-o,--out", out, "Output directory");
    }

    ExperimentConfig load(const std::string& default_kind) const {
        ExperimentConfig c;
        if (!config.empty()) {
            c = load_config(config);
        } else {
            c.experiment = default_kind;
        }
        if (seed) c.seeds = {*seed};
        if (budget) c.budget = *budget;
        if (domain) c.domain.name = *domain;
        if (size) c.domain.size = *size;
        if (permutation) c.domain.permutation = parse_permutation(*permutation);
        if (task) c.task = task_kind_from_string(*task);
        if (data_modules) c.data_modules = *data_modules;
        if (ablation) c = apply_variant(c, *ablation);
        if (threads) c.threads = *threads;
        if (no_wall_time) c.log_wall_time = false;
        c.validate();
        if (c.threads > 0) set_worker_threads(c.threads);
        return c;
    }

    std::ostream* progress() const { return quiet ? nullptr : &std::cerr; }
};

fs::path seed_dir(const fs::path& base, const ExperimentConfig& c, std::uint64_t seed) {
    return c.seeds.size() == 1 ? base : base / ("seed_" + std::to_string(seed));
}

nlohmann::json run_training(const ExperimentConfig& c, const fs::path& out, std::ostream* progress) {
    nlohmann::json runs = nlohmann::json::array();
    for (auto seed : c.seeds) {
        const auto dir = seed_dir(out, c, seed);
        auto r = train(c, seed, dir, progress);
        auto s = r.summary_json();
        s["seed"] = seed;
        s["dir"] = dir.string();
        runs.push_back(s);
        std::cout << "seed " << seed << ": " << r.iterations << " iterations, best level solved "
                  << r.best_level_solved() << ", lineages " << r.lineages.size() << '\n';
    }
    return runs;
}

int cmd_train(const Overrides& o) {
    auto c = o.load("train-search");
    if (!o.task && c.experiment == "train-plan") c.task = TaskKind::plan;
    const auto runs = run_training(c, o.out, o.progress());
    if (c.seeds.size() > 1) write_json_file(fs::path(o.out) / "runs.json", runs);
    return 0;
}

EvalReport run_eval(const ExperimentConfig& c, std::uint64_t seed) {
    const auto domain = build_domain(c.domain);
    const auto modules = build_modules(c, domain);
    const auto core = load_core(c.core);
    return evaluate(*core, *domain, *modules, c.task, c.engine, c.eval_samples, c.min_level, c.max_level,
                    c.nes.minibatch, seed);
}

void print_eval(const EvalReport& r) {
    std::cout << r.domain << ' ' << to_string(r.kind) << ": " << r.exact << '/' << r.samples << " exact ("
              << 100.0 * r.accuracy() << "%), " << r.batches_at_max << '/' << r.batches
              << " minibatches at max fitness, learning triggered: " << (r.learning_triggered() ? "yes" : "no")
              << '\n';
}

int cmd_eval(const Overrides& o, const std::optional<std::string>& core, const std::optional<std::size_t>& samples,
             const std::optional<std::size_t>& min_level, const std::optional<std::size_t>& max_level) {
    auto c = o.load("eval-generalization");
    if (core) c.core = *core;
    if (samples) c.eval_samples = *samples;
    if (min_level) c.min_level = *min_level;
    if (max_level) c.max_level = *max_level;
    c.validate();
    const auto r = run_eval(c, c.seeds.front());
    fs::create_directories(o.out);
    auto j = r.json();
    j["config"] = to_json(c);
    j["config_hash"] = config_hash(c);
    write_json_file(fs::path(o.out) / "eval.json", j);
    print_eval(r);
    return 0;
}

int cmd_transfer(const Overrides& o, const std::optional<std::string>& core) {
    auto c = o.load("transfer-domain");
    if (core) c.initial_genome = c.core = *core;
    if (c.initial_genome == "random") c.initial_genome = c.core == "reference" ? "reference" : c.core;
    // The core keeps training on the new domain over all levels; with a
    // transferable solution no learning is triggered.
    const auto runs = run_training(c, o.out, o.progress());
    bool quiet = true;
    for (const auto& r : runs) quiet = quiet && r.at("updates").get<std::size_t>() == 0;
    std::cout << "learning triggered during transfer: " << (quiet ? "no" : "yes") << '\n';
    if (c.eval_samples > 0) {
        const auto r = run_eval(c, c.seeds.front());
        auto j = r.json();
        j["config_hash"] = config_hash(c);
        write_json_file(fs::path(o.out) / "eval.json", j);
        print_eval(r);
    }
    return 0;
}

int cmd_scale(const Overrides& o, const std::vector<std::size_t>& levels, bool long_run,
              const std::optional<std::string>& core) {
    auto c = o.load("scale-test");
    if (core) c.core = *core;
    if (!levels.empty()) c.scale_levels = levels;
    // Level 82,656 is the task class that needs 330,631 steps.
    if (long_run) c.scale_levels = {83013};
    const auto domain = build_domain(c.domain);
    const auto modules = build_modules(c, domain);
    const auto engine_core = load_core(c.core);
    nlohmann::json results = nlohmann::json::array();
    for (std::size_t level : c.scale_levels) {
        const auto r = scale_test(*engine_core, *domain, *modules, c.engine, level, c.seeds.front());
        std::cout << "level " << level << ": " << r.steps << '/' << r.expected_steps << " steps, "
                  << (r.exact ? "exact" : "NOT exact") << ", " << to_string(r.termination) << ", " << r.seconds
                  << " s\n";
        results.push_back(r.json());
    }
    fs::create_directories(o.out);
    write_json_file(fs::path(o.out) / "scale.json", {{"config_hash", config_hash(c)}, {"results", results}});
    return 0;
}

int cmd_oracle(const Overrides& o, std::size_t level, const std::optional<std::string>& task_file,
               const std::optional<std::string>& core) {
    auto c = o.load("oracle-trace");
    const auto domain = build_domain(c.domain);
    TaskInstance task;
    if (task_file) {
        task = task_from_json(read_json_file(*task_file));
    } else {
        std::mt19937_64 rng(c.seeds.front());
        task = sample_task(*domain, rng, level);
    }
    const auto tree = bfs_search(*domain, task.start, task.goal);
    const auto trace = trace_from_tree(tree, c.task);
    const fs::path out(o.out);
    fs::create_directories(out);
    write_json_file(out / "task.json", task_to_json(task));
    {
        std::ofstream f(out / "trace.jsonl");
        write_trace_jsonl(f, trace);
        std::ofstream d(out / "tree.dot");
        d << search_tree_dot(*domain, tree);
    }
    std::cout << "level " << tree.level << ", " << to_string(c.task) << " trace: " << trace.total_steps()
              << " steps (" << trace.explore_steps() << " exploration";
    if (c.task == TaskKind::plan) std::cout << ", " << trace.backtrack_steps() << " backtrack";
    std::cout << ")\n";
    if (core) {
        const auto modules = build_modules(c, domain);
        const auto engine_core = load_core(*core);
        Engine engine(*engine_core, *modules, c.engine);
        const auto r = engine.run_episode(task, c.task, EpisodeMode::autonomous, &trace, true);
        std::ofstream f(out / "records.jsonl");
        write_records_jsonl(f, r.records);
        std::cout << "core run: " << r.steps << " steps, " << to_string(r.termination) << ", "
                  << (r.exact ? "matches the oracle" : "differs from the oracle") << '\n';
    }
    return 0;
}

int cmd_train_data(const Overrides& o, const std::vector<std::string>& module_names,
                   const std::optional<std::size_t>& max_steps) {
    auto c = o.load("train-data-modules");
    if (!module_names.empty()) c.modules = module_names;
    if (max_steps) c.data_budget.max_steps = *max_steps;
    const auto domain = build_domain(c.domain);
    std::vector<ModuleId> modules;
    for (const auto& m : c.modules) modules.push_back(module_from_string(m));
    if (modules.empty()) modules = learnable_modules(*domain);

    const fs::path out(o.out);
    fs::create_directories(out);
    std::mt19937_64 rng(c.seeds.front());
    LearnedNets nets = make_learned_nets(*domain, rng);
    nlohmann::json reports = nlohmann::json::array();
    bool all = true;
    for (ModuleId m : modules) {
        if (o.progress()) *o.progress() << "training " << to_string(m) << " for " << domain->name() << '\n';
        const auto r = train_data_module(m, *domain, nets, c.data_budget, c.seeds.front() + static_cast<int>(m));
        save_module(nets, m, out / (to_string(m) + ".bin"));
        reports.push_back(nlohmann::json::parse(r.json()));
        std::cout << to_string(m) << ": " << r.agreement << '/' << r.heldout << " held-out agreement, "
                  << (r.passed ? "passed" : "FAILED") << '\n';
        all = all && r.passed;
    }
    write_json_file(out / "report.json",
                    {{"domain", domain->name()}, {"config_hash", config_hash(c)}, {"modules", reports}, {"passed", all}});
    return all ? 0 : 2;
}

int cmd_ablate(const Overrides& o, const std::vector<std::string>& variants) {
    auto c = o.load("ablation");
    if (!variants.empty()) c.variants = variants;
    if (c.variants.empty()) throw ConfigError("no ablation variants given");
    nlohmann::json table = nlohmann::json::object();
    for (const auto& v : c.variants) {
        std::cout << "variant " << v << '\n';
        auto cv = apply_variant(c, v);
        table[v] = run_training(cv, fs::path(o.out) / v, o.progress());
    }
    write_json_file(fs::path(o.out) / "ablation.json", {{"config_hash", config_hash(c)}, {"variants", table}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memory-augmented neural computer trained with natural evolution strategies"};
    app.require_subcommand(1);

    Overrides o;
    auto* train_cmd = app.add_subcommand("train", "Curriculum + NES training run(s)");
    o.attach(train_cmd);

    std::optional<std::string> core;
    std::optional<std::size_t> samples, min_level, max_level;
    auto* eval_cmd = app.add_subcommand("eval", "Autonomous evaluation against oracle traces");
    o.attach(eval_cmd);
    eval_cmd->add_option("--core", core, "reference, reference-weights or a genome file");
    eval_cmd->add_option("--samples", samples, "Number of tasks");
    eval_cmd->add_option("--min-level", min_level);
    eval_cmd->add_option("--max-level", max_level);

    auto* transfer_cmd = app.add_subcommand("transfer", "Continue a frozen or trained core on a new domain");
    o.attach(transfer_cmd);
    transfer_cmd->add_option("--core", core, "reference, reference-weights or a genome file");

    std::vector<std::size_t> levels;
    bool long_run = false;
    auto* scale_cmd = app.add_subcommand("scale-test", "Very long plan episodes");
    o.attach(scale_cmd);
    scale_cmd->add_option("--level", levels, "Task level(s)");
    scale_cmd->add_flag("--long", long_run, "A task of over 330,000 steps (level 83,013)");
    scale_cmd->add_option("--core", core, "reference, reference-weights or a genome file");

    std::size_t oracle_level = 3;
    std::optional<std::string> task_file;
    auto* oracle_cmd = app.add_subcommand("oracle", "Oracle trace, search tree and optional core trace");
    o.attach(oracle_cmd);
    oracle_cmd->add_option("--level", oracle_level, "Sampled task level");
    oracle_cmd->add_option("--task-file", task_file, "Task JSON instead of sampling");
    oracle_cmd->add_option("--core", core, "Also run this core and export its step records");

    std::vector<std::string> module_names;
    std::optional<std::size_t> max_steps;
    auto* data_cmd = app.add_subcommand("train-data", "Supervised training of the data-dependent modules");
    o.attach(data_cmd);
    data_cmd->add_option("--modules", module_names, "Subset of input, transform, alu, output");
    data_cmd->add_option("--max-steps", max_steps, "Adam steps per network");

    std::vector<std::string> variants;
    auto* ablate_cmd = app.add_subcommand("ablate", "Training runs for each ablation variant");
    o.attach(ablate_cmd);
    ablate_cmd->add_option("--variant", variants, "Variant names (default: the config's list)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*train_cmd) return cmd_train(o);
        if (*eval_cmd) return cmd_eval(o, core, samples, min_level, max_level);
        if (*transfer_cmd) return cmd_transfer(o, core);
        if (*scale_cmd) return cmd_scale(o, levels, long_run, core);
        if (*oracle_cmd) return cmd_oracle(o, oracle_level, task_file, core);
        if (*data_cmd) return cmd_train_data(o, module_names, max_steps);
        if (*ablate_cmd) return cmd_ablate(o, variants);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
