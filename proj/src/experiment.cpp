#include "ncomp/experiment.hpp"

#include <algorithm>
#include <initializer_list>
#include <sstream>

#include "ncomp/errors.hpp"
#include "ncomp/serialization.hpp"

namespace ncomp {

void ExperimentConfig::validate() const {
    static const std::vector<std::string> kinds{"train-search",  "train-plan",   "eval-generalization",
                                                "transfer-representation",      "transfer-domain",
                                                "scale-test",    "ablation",     "train-data-modules",
                                                "oracle-trace"};
    if (std::find(kinds.begin(), kinds.end(), experiment) == kinds.end())
        throw ConfigError("unknown experiment kind '" + experiment + "'");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    nes.validate();
    curriculum.validate();
    engine.validate();
    if (start_level < 1 || start_level > curriculum.evaluation_level())
        throw ConfigError("start level must be in [1, final_level + 1]");
    if (min_level < 1 || min_level > max_level) throw ConfigError("level range is empty");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    build_domain(domain);
}

nlohmann::json to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    j["experiment"] = c.experiment;
    j["description"] = c.description;
    j["domain"] = {{"name", c.domain.name},
                   {"size", c.domain.size},
                   {"permutation", std::vector<int>(c.domain.permutation.begin(), c.domain.permutation.end())}};
    j["task"] = to_string(c.task);
    j["data_modules"] = c.data_modules;
    j["seeds"] = c.seeds;
    j["budget"] = c.budget;
    j["nes"] = {{"population", c.nes.population},
                {"sigma", c.nes.sigma},
                {"learning_rate", c.nes.learning_rate},
                {"weight_decay", c.nes.weight_decay},
                {"minibatch", c.nes.minibatch}};
    const auto& cu = c.curriculum;
    j["curriculum"] = {{"final_level", cu.final_level},         {"clear_streak", cu.clear_streak},
                       {"solve_streak", cu.solve_streak},       {"restart_window", cu.restart_window},
                       {"buffer_capacity", cu.buffer_capacity}, {"buffer_share", cu.buffer_share},
                       {"old_level_share", cu.old_level_share}, {"bad_memories", cu.bad_memories},
                       {"restarts", cu.restarts}};
    j["engine"] = {{"constrained_head", c.engine.constrained_head},
                   {"usage_linkage", c.engine.usage_linkage},
                   {"hard_attention", c.engine.hard_attention},
                   {"extra_free_head", c.engine.extra_free_head},
                   {"max_steps", c.engine.max_steps}};
    j["init_scale"] = c.init_scale;
    j["initial_genome"] = c.initial_genome;
    j["start_level"] = c.start_level;
    j["core"] = c.core;
    j["eval_samples"] = c.eval_samples;
    j["min_level"] = c.min_level;
    j["max_level"] = c.max_level;
    j["scale_levels"] = c.scale_levels;
    j["variants"] = c.variants;
    const auto& b = c.data_budget;
    j["data_budget"] = {{"max_steps", b.max_steps},         {"batch", b.batch},
                        {"buffer_capacity", b.buffer_capacity}, {"buffer_share", b.buffer_share},
                        {"learning_rate", b.learning_rate}, {"probe_every", b.probe_every},
                        {"probe_size", b.probe_size},       {"stop_samples", b.stop_samples}, {"heldout", b.heldout},
                        {"bad_memories", b.bad_memories}};
    j["modules"] = c.modules;
    j["threads"] = c.threads;
    j["log_wall_time"] = c.log_wall_time;
    return j;
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const nlohmann::json& j, const std::string& section, std::initializer_list<const char*> known) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        for (const auto& [key, _] : j.items()) {
            static const std::vector<std::string> known{
                "experiment",  "description", "domain",     "task",         "data_modules", "seeds",
                "budget",      "nes",         "curriculum", "engine",       "init_scale",   "initial_genome",
                "start_level", "core",        "eval_samples", "min_level",  "max_level",    "scale_levels",
                "variants",    "data_budget", "modules",    "threads",      "log_wall_time"};
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw ConfigError("unknown config key '" + key + "'");
        }
        read(j, "experiment", c.experiment);
        read(j, "description", c.description);
        if (j.contains("domain")) {
            const auto& d = j["domain"];
            check_keys(d, "domain", {"name", "size", "permutation"});
            read(d, "name", c.domain.name);
            read(d, "size", c.domain.size);
            if (d.contains("permutation")) {
                auto v = d["permutation"].get<std::vector<int>>();
                if (v.size() != 4) throw ConfigError("permutation must have 4 entries");
                for (std::size_t i = 0; i < 4; ++i) c.domain.permutation[i] = static_cast<std::uint8_t>(v[i]);
            }
        }
        if (j.contains("task")) c.task = task_kind_from_string(j["task"].get<std::string>());
        read(j, "data_modules", c.data_modules);
        read(j, "seeds", c.seeds);
        read(j, "budget", c.budget);
        if (j.contains("nes")) {
            const auto& n = j["nes"];
            check_keys(n, "nes", {"population", "sigma", "learning_rate", "weight_decay", "minibatch"});
            read(n, "population", c.nes.population);
            read(n, "sigma", c.nes.sigma);
            read(n, "learning_rate", c.nes.learning_rate);
            read(n, "weight_decay", c.nes.weight_decay);
            read(n, "minibatch", c.nes.minibatch);
        }
        if (j.contains("curriculum")) {
            const auto& n = j["curriculum"];
            check_keys(n, "curriculum", {"final_level", "clear_streak", "solve_streak", "restart_window",
                                         "buffer_capacity", "buffer_share", "old_level_share", "bad_memories",
                                         "restarts"});
            auto& cu = c.curriculum;
            read(n, "final_level", cu.final_level);
            read(n, "clear_streak", cu.clear_streak);
            read(n, "solve_streak", cu.solve_streak);
            read(n, "restart_window", cu.restart_window);
            read(n, "buffer_capacity", cu.buffer_capacity);
            read(n, "buffer_share", cu.buffer_share);
            read(n, "old_level_share", cu.old_level_share);
            read(n, "bad_memories", cu.bad_memories);
            read(n, "restarts", cu.restarts);
        }
        if (j.contains("engine")) {
            const auto& n = j["engine"];
            check_keys(n, "engine", {"ablation", "constrained_head", "usage_linkage", "hard_attention",
                                     "extra_free_head", "max_steps"});
            if (n.contains("ablation")) c.engine = configure_ablation(n["ablation"].get<std::string>());
            read(n, "constrained_head", c.engine.constrained_head);
            read(n, "usage_linkage", c.engine.usage_linkage);
            read(n, "hard_attention", c.engine.hard_attention);
            read(n, "extra_free_head", c.engine.extra_free_head);
            read(n, "max_steps", c.engine.max_steps);
        }
        read(j, "init_scale", c.init_scale);
        read(j, "initial_genome", c.initial_genome);
        read(j, "start_level", c.start_level);
        read(j, "core", c.core);
        read(j, "eval_samples", c.eval_samples);
        read(j, "min_level", c.min_level);
        read(j, "max_level", c.max_level);
        read(j, "scale_levels", c.scale_levels);
        read(j, "variants", c.variants);
        if (j.contains("data_budget")) {
            const auto& n = j["data_budget"];
            check_keys(n, "data_budget", {"max_steps", "batch", "buffer_capacity", "buffer_share", "learning_rate",
                                          "probe_every", "probe_size", "stop_samples", "heldout", "bad_memories"});
            auto& b = c.data_budget;
            read(n, "max_steps", b.max_steps);
            read(n, "batch", b.batch);
            read(n, "buffer_capacity", b.buffer_capacity);
            read(n, "buffer_share", b.buffer_share);
            read(n, "learning_rate", b.learning_rate);
            read(n, "probe_every", b.probe_every);
            read(n, "probe_size", b.probe_size);
            read(n, "stop_samples", b.stop_samples);
            read(n, "heldout", b.heldout);
            read(n, "bad_memories", b.bad_memories);
        }
        read(j, "modules", c.modules);
        read(j, "threads", c.threads);
        read(j, "log_wall_time", c.log_wall_time);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

std::string config_hash(const ExperimentConfig& c) { return stable_hash(to_json(c).dump()); }

std::shared_ptr<const Domain> build_domain(const DomainSpec& spec) {
    return make_domain(spec.name, spec.size, spec.permutation);
}

std::shared_ptr<const DataModules> build_modules(const ExperimentConfig& c, const std::shared_ptr<const Domain>& d) {
    if (c.data_modules == "oracle") return make_oracle_modules(d);
    return load_learned_modules(d, c.data_modules);
}

ExperimentConfig apply_variant(ExperimentConfig c, const std::string& variant) {
    if (variant == "no_bad_memories") {
        c.curriculum.bad_memories = false;
    } else if (variant == "no_restarts") {
        c.curriculum.restarts = false;
    } else if (variant == "restarts") {
        c.curriculum.restarts = true;
    } else {
        const std::size_t max_steps = c.engine.max_steps;
        c.engine = configure_ablation(variant);
        c.engine.max_steps = max_steps;
    }
    return c;
}

std::array<std::uint8_t, 4> parse_permutation(const std::string& text) {
    std::array<std::uint8_t, 4> p{};
    std::stringstream ss(text);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 4) throw ConfigError("permutation must have 4 entries");
        try {
            const int v = std::stoi(item);
            if (v < 0 || v > 3) throw ConfigError("permutation entries must be 0..3");
            p[i++] = static_cast<std::uint8_t>(v);
        } catch (const std::logic_error&) {
            throw ConfigError("bad permutation entry '" + item + "'");
        }
    }
    if (i != 4) throw ConfigError("permutation must have 4 entries");
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<std::uint8_t, 4>{0, 1, 2, 3}) throw ConfigError("permutation must be a bijection");
    return p;
}

}  // namespace ncomp
