#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ncomp/engine.hpp"
#include "ncomp/errors.hpp"
#include "ncomp/reference_program.hpp"

using namespace ncomp;

namespace {

std::shared_ptr<const SokobanDomain> sokoban6() { return std::make_shared<SokobanDomain>(6); }

std::size_t dominant_mode(const StepRecord& r) {
    return static_cast<std::size_t>(std::max_element(r.attention.begin(), r.attention.end()) - r.attention.begin());
}

std::vector<std::string> record_lines(const EpisodeResult& r) {
    std::vector<std::string> out;
    for (const auto& rec : r.records) out.push_back(step_record_json(rec));
    return out;
}

}  // namespace

TEST_SUITE("engine") {
    TEST_CASE("configuration checks") {
        EngineConfig c;
        c.constrained_head = true;
        c.extra_free_head = true;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        CHECK_NOTHROW(configure_ablation("full").validate());
        CHECK_FALSE(configure_ablation("no_constrained_head").constrained_head);
        const auto two = configure_ablation("two_free_heads");
        CHECK(two.extra_free_head);
        CHECK_FALSE(two.constrained_head);
        CHECK_FALSE(configure_ablation("no_usage_linkage").usage_linkage);
        CHECK_FALSE(configure_ablation("soft_attention").hard_attention);
        CHECK_THROWS_AS(configure_ablation("bogus"), ConfigError);
    }

    TEST_CASE("first step reads the start configuration from the only row") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        std::mt19937_64 rng(1);
        const NeuralCore core(NeuralCore::random_genome(rng, 1.0));
        const Engine engine(core, modules);
        const auto task = sample_task(*d, rng, 2);
        EpisodeState state(d->word_width(), task.start, task.goal);
        const auto out = engine.step(state);
        CHECK(out.record.location == 0);
        CHECK(out.record.d_m == task.start);
        CHECK(state.memory.rows() == 1);
        // No prior read, so the constrained head wrote nothing.
        CHECK(state.memory.comp(0) == binarize(core.control(PhaseReals{1, 0, 0}, {}, {}).iface.write_word_free));
        CHECK(out.record.phase == PhaseSignals{1, 0, 0});
    }

    TEST_CASE("zero genome picks operation 0") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const NeuralCore core(NeuralCore::zero_genome());
        const Engine engine(core, modules);
        std::mt19937_64 rng(2);
        const auto task = sample_task(*d, rng, 1);
        EpisodeState state(d->word_width(), task.start, task.goal);
        for (int i = 0; i < 5; ++i) CHECK(engine.step(state).record.op == 0);
    }

    TEST_CASE("reference program reproduces the first oracle step") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        const Engine engine(ref, modules);
        std::mt19937_64 rng(3);
        const auto task = sample_task(*d, rng, 1);
        const auto trace = oracle_trace(*d, task, TaskKind::search);
        EpisodeState state(d->word_width(), task.start, task.goal);
        const auto out = engine.step(state, true);
        CHECK(out.record.op == trace.explore[0].op);
        CHECK(out.record.d_m == trace.explore[0].d_m);
    }

    TEST_CASE("reference program solves a maximal level-3 plan task in 15 steps") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        const Engine engine(ref, modules);
        const auto task = testref::max_length_task(*d, 3, 5);
        const auto start = testref::to_grid(d->decode(task.start));
        const auto goal = testref::to_grid(d->decode(task.goal));
        const auto bfs = testref::bfs(start, goal);
        const auto trace = oracle_trace(*d, task, TaskKind::plan);
        const auto r = engine.run_episode(task, TaskKind::plan, EpisodeMode::autonomous, &trace);
        CHECK(r.termination == Termination::terminated);
        CHECK(r.steps == 15);
        CHECK(r.exact);
        // The backtrack reads walk the reference tree's parent chain.
        const auto path = testref::path_to_root(bfs);
        REQUIRE(r.records.size() == 12 + path.size());
        for (std::size_t k = 0; k < path.size(); ++k) {
            CHECK(r.records[12 + k].op == kNop);
            CHECK(testref::to_grid(d->decode(r.records[12 + k].d_m)) == bfs.nodes[std::size_t(path[k])].grid);
        }
    }

    TEST_CASE("reference program attention pattern") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        const Engine engine(ref, modules);
        const auto task = testref::max_length_task(*d, 3, 6);
        const auto trace = oracle_trace(*d, task, TaskKind::plan);
        const auto r = engine.run_episode(task, TaskKind::plan, EpisodeMode::autonomous, &trace);
        REQUIRE(r.exact);
        // Per node: one arrival read (content for the root, temporal-forward
        // afterwards), then content three times.
        for (std::size_t t = 0; t < 12; ++t) {
            const std::size_t mode = dominant_mode(r.records[t]);
            if (t % 4 != 0) CHECK(mode == std::size_t(ReadMode::content));
            else if (t == 0) CHECK(mode == std::size_t(ReadMode::content));
            else CHECK(mode == std::size_t(ReadMode::temporal_forward));
        }
        // Goal row through usage-forward, then usage-backward.
        CHECK(dominant_mode(r.records[12]) == std::size_t(ReadMode::usage_forward));
        for (std::size_t t = 13; t < r.records.size(); ++t)
            CHECK(dominant_mode(r.records[t]) == std::size_t(ReadMode::usage_backward));
    }

    TEST_CASE("teacher scoring stops at the first mistake") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        auto values = NeuralCore::zero_genome().values;
        // Transform_C bias favours op 3; the oracle starts with op 0.
        values[NeuralCore::genome_length() - 5 + 3] = 1.0;
        const NeuralCore core(values);
        const Engine engine(core, modules);
        std::mt19937_64 rng(7);
        const auto task = sample_task(*d, rng, 2);
        const auto trace = oracle_trace(*d, task, TaskKind::search);
        const auto r = engine.run_episode(task, TaskKind::search, EpisodeMode::teacher_scored, &trace);
        CHECK(r.steps == 1);
        CHECK(r.termination == Termination::mismatch);
        CHECK(r.score.first_mistake() == 1u);
        CHECK(r.score.explore.size() == 1);
        CHECK(r.score.explore[0].dm_ok);
        CHECK_FALSE(r.score.explore[0].op_ok);
    }

    TEST_CASE("goal equal to start ends a plan episode after one step") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        EngineConfig cfg;
        cfg.max_steps = 10;
        const Engine engine(ref, modules, cfg);
        std::mt19937_64 rng(8);
        const Bits s = d->sample_start(rng);
        const TaskInstance task{s, s, 0, d->name()};
        const auto r = engine.run_episode(task, TaskKind::plan, EpisodeMode::autonomous, nullptr);
        // Step 1: equality raises goal-found, nop keeps the word. Step 2:
        // equality again with the latch set terminates.
        REQUIRE(r.records.size() == 1);
        CHECK(r.records[0].phase == PhaseSignals{0, 1, 0});
        CHECK(r.records[0].op == kNop);
        CHECK(r.termination == Termination::terminated);
    }

    TEST_CASE("autonomous runs without a trace need a step limit") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        const Engine engine(ref, modules);
        std::mt19937_64 rng(9);
        const auto task = sample_task(*d, rng, 1);
        CHECK_THROWS_AS(engine.run_episode(task, TaskKind::search, EpisodeMode::autonomous, nullptr), ConfigError);
        CHECK_THROWS_AS(engine.run_episode(task, TaskKind::search, EpisodeMode::teacher_scored, nullptr), ConfigError);
        EngineConfig cfg;
        cfg.max_steps = 3;
        const NeuralCore zero;
        const Engine limited(zero, modules, cfg);
        const auto r = limited.run_episode(task, TaskKind::search, EpisodeMode::autonomous, nullptr);
        CHECK(r.termination == Termination::step_limit);
        CHECK(r.steps == 3);
    }

    TEST_CASE("property: identical inputs give identical step records") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        std::mt19937_64 rng(10);
        for (int trial = 0; trial < 20; ++trial) {
            const NeuralCore core(NeuralCore::random_genome(rng, 1.0));
            const Engine engine(core, modules);
            const auto task = sample_task(*d, rng, next_attainable_level(*d, 1 + std::size_t(trial % 4)));
            const auto trace = oracle_trace(*d, task, TaskKind::plan);
            const auto a = engine.run_episode(task, TaskKind::plan, EpisodeMode::autonomous, &trace);
            const auto b = engine.run_episode(task, TaskKind::plan, EpisodeMode::autonomous, &trace);
            CHECK(record_lines(a) == record_lines(b));
            CHECK(a.termination == b.termination);
        }
    }

    TEST_CASE("scripted program and reference weights behave identically") {
        const ReferenceProgram scripted;
        const NeuralCore weights(reference_genome());
        std::mt19937_64 rng(11);
        const std::vector<std::shared_ptr<const Domain>> domains{
            make_domain("sokoban", 6, {0, 1, 2, 3}), make_domain("puzzle", 3, {0, 1, 2, 3}),
            make_domain("manipulation", 0, {0, 1, 2, 3})};
        for (const auto& d : domains) {
            const auto modules = make_oracle_modules(d);
            const Engine a(scripted, *modules), b(weights, *modules);
            for (int i = 0; i < 30; ++i) {
                const auto kind = i % 2 ? TaskKind::plan : TaskKind::search;
                const auto task = sample_task(*d, rng, next_attainable_level(*d, 1 + std::size_t(i % 12)));
                const auto trace = oracle_trace(*d, task, kind);
                const auto ra = a.run_episode(task, kind, EpisodeMode::autonomous, &trace);
                const auto rb = b.run_episode(task, kind, EpisodeMode::autonomous, &trace);
                CHECK(ra.exact);
                CHECK(rb.exact);
                REQUIRE(ra.records.size() == rb.records.size());
                for (std::size_t t = 0; t < ra.records.size(); ++t) {
                    CHECK(ra.records[t].location == rb.records[t].location);
                    CHECK(ra.records[t].op == rb.records[t].op);
                }
            }
        }
    }

    TEST_CASE("reference program has zero mismatches on teacher-scored traces") {
        const ReferenceProgram ref;
        std::mt19937_64 rng(12);
        const std::vector<std::shared_ptr<const Domain>> domains{
            make_domain("sokoban", 6, {0, 1, 2, 3}), make_domain("sokoban", 6, {2, 0, 3, 1}),
            make_domain("puzzle", 3, {0, 1, 2, 3}), make_domain("manipulation", 0, {0, 1, 2, 3})};
        for (const auto& d : domains) {
            const auto modules = make_oracle_modules(d);
            const Engine engine(ref, *modules);
            for (std::size_t level = 1; level <= 21; ++level)
                for (const auto kind : {TaskKind::search, TaskKind::plan}) {
                    if (!level_attainable(*d, level)) continue;
                    const auto task = sample_task(*d, rng, level);
                    const auto trace = oracle_trace(*d, task, kind);
                    const auto r = engine.run_episode(task, kind, EpisodeMode::teacher_scored, &trace, false);
                    CHECK(r.termination == Termination::trace_end);
                    CHECK(r.score.perfect());
                    CHECK(r.steps == trace.total_steps());
                }
        }
    }

    TEST_CASE("usage linkage off never reads a usage row other than the current one") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        const Engine engine(ref, modules, configure_ablation("no_usage_linkage"));
        std::mt19937_64 rng(13);
        const auto task = sample_task(*d, rng, 3);
        const auto trace = oracle_trace(*d, task, TaskKind::plan);
        const auto r = engine.run_episode(task, TaskKind::plan, EpisodeMode::autonomous, &trace);
        CHECK_FALSE(r.exact);
        for (std::size_t t = 1; t < r.records.size(); ++t) {
            const auto mode = dominant_mode(r.records[t]);
            if (mode == std::size_t(ReadMode::usage_forward) || mode == std::size_t(ReadMode::usage_backward))
                CHECK(r.records[t].location == r.records[t - 1].location);
        }
    }

    TEST_CASE("two free heads allocate two rows per step") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        const ReferenceProgram ref;
        const Engine engine(ref, modules, configure_ablation("two_free_heads"));
        std::mt19937_64 rng(14);
        const auto task = sample_task(*d, rng, 2);
        EpisodeState state(d->word_width(), task.start, task.goal);
        for (std::size_t t = 1; t <= 4; ++t) {
            engine.step(state, true);
            CHECK(state.memory.rows() == 2 * t);
        }
    }

    TEST_CASE("soft attention returns averaged words") {
        const auto d = sokoban6();
        const SokobanOracleModules modules(d);
        std::mt19937_64 rng(15);
        const NeuralCore core(NeuralCore::zero_genome());
        const Engine engine(core, modules, configure_ablation("soft_attention"));
        const auto task = sample_task(*d, rng, 2);
        EpisodeState state(d->word_width(), task.start, task.goal);
        // Zero genome: uniform attention, all-zero free word, one row.
        const auto out = engine.step(state, true);
        for (double a : out.record.attention) CHECK(a == doctest::Approx(0.2));
        for (double v : out.bundle.c_m) CHECK(v == 0.0);
        CHECK(out.record.d_m == task.start);
    }

    TEST_CASE("step records serialize to one JSON object") {
        StepRecord r;
        r.step = 3;
        r.location = 1;
        r.op = 2;
        r.d_m = {1, 0};
        r.d_o = {0, 1};
        const auto line = step_record_json(r);
        CHECK(line.find('\n') == std::string::npos);
        CHECK(line.find("\"d_m\":\"10\"") != std::string::npos);
    }
}
