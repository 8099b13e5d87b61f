#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "ncomp/curriculum.hpp"
#include "ncomp/errors.hpp"

using namespace ncomp;

namespace {

// Report over `n` samples; the listed ones failed.
FitnessReport center_report(std::size_t n, bool at_max, const std::vector<std::size_t>& failed = {}) {
    FitnessReport r;
    r.at_max = at_max;
    r.samples.resize(n);
    for (auto& s : r.samples) s.perfect = true;
    for (auto i : failed) r.samples[i].perfect = false;
    return r;
}

// Tasks carry a unique id in their domain field so repeats can be spotted.
struct CountingSource {
    std::size_t next = 0;
    ScoredTask operator()(std::size_t level, std::mt19937_64&) {
        ScoredTask t;
        t.task.level = level;
        t.task.domain = "t" + std::to_string(next++);
        return t;
    }
};

std::vector<ScoredTask> dummy_batch(std::size_t n) {
    CountingSource src;
    std::mt19937_64 rng(0);
    std::vector<ScoredTask> b;
    for (std::size_t i = 0; i < n; ++i) b.push_back(src(1, rng));
    return b;
}

}  // namespace

TEST_SUITE("curriculum") {
    TEST_CASE("250 consecutive maximum-fitness iterations solve a level") {
        CurriculumConfig cfg;
        CurriculumState s;
        s.level = 4;
        const auto batch = dummy_batch(20);
        for (int i = 0; i < 249; ++i) curriculum_step(s, cfg, center_report(20, true), false, batch);
        CHECK(s.level == 4);
        const auto events = curriculum_step(s, cfg, center_report(20, true), false, batch);
        REQUIRE(events.size() == 1);
        CHECK(events[0].kind == EventKind::level_solved);
        CHECK(events[0].level == 4);
        CHECK(events[0].without_learning);
        CHECK(s.level == 5);
        CHECK(s.streak == 0);
    }

    TEST_CASE("a single miss resets the streak") {
        CurriculumConfig cfg;
        CurriculumState s;
        const auto batch = dummy_batch(20);
        for (int i = 0; i < 249; ++i) curriculum_step(s, cfg, center_report(20, true), false, batch);
        curriculum_step(s, cfg, center_report(20, false, {3}), true, batch);
        CHECK(s.streak == 0);
        for (int i = 0; i < 249; ++i) curriculum_step(s, cfg, center_report(20, true), false, batch);
        CHECK(s.level == 1);
        const auto events = curriculum_step(s, cfg, center_report(20, true), false, batch);
        CHECK(s.level == 2);
        REQUIRE_FALSE(events.empty());
        CHECK_FALSE(events.back().without_learning);
    }

    TEST_CASE("ten maximum-fitness iterations in a row empty the buffer") {
        CurriculumConfig cfg;
        CurriculumState s;
        const auto batch = dummy_batch(20);
        curriculum_step(s, cfg, center_report(20, false, {0, 1, 2}), true, batch);
        CHECK(s.buffer.size() == 3);
        for (int i = 0; i < 9; ++i) curriculum_step(s, cfg, center_report(20, true), false, batch);
        CHECK(s.buffer.size() == 3);
        const auto events = curriculum_step(s, cfg, center_report(20, true), false, batch);
        CHECK(s.buffer.empty());
        REQUIRE(events.size() == 1);
        CHECK(events[0].kind == EventKind::buffer_cleared);
    }

    TEST_CASE("buffer never exceeds its capacity and keeps the newest failures") {
        CurriculumConfig cfg;
        CurriculumState s;
        CountingSource src;
        std::mt19937_64 rng(1);
        std::vector<std::size_t> all(20);
        std::iota(all.begin(), all.end(), 0);
        std::string last_id;
        for (int i = 0; i < 30; ++i) {
            std::vector<ScoredTask> batch;
            for (int k = 0; k < 20; ++k) batch.push_back(src(1, rng));
            last_id = batch.back().task.domain;
            curriculum_step(s, cfg, center_report(20, false, all), true, batch);
            CHECK(s.buffer.size() <= 200);
        }
        CHECK(s.buffer.size() == 200);
        CHECK(s.buffer.back().task.domain == last_id);
    }

    TEST_CASE("bad memories off keeps the buffer empty") {
        CurriculumConfig cfg;
        cfg.bad_memories = false;
        CurriculumState s;
        curriculum_step(s, cfg, center_report(20, false, {0, 5}), true, dummy_batch(20));
        CHECK(s.buffer.empty());
    }

    TEST_CASE("minibatch composition") {
        CurriculumConfig cfg;
        CurriculumState s;
        auto p = plan_minibatch(s, cfg, 20);
        CHECK(p.from_current == 20);
        CHECK(p.from_buffer == 0);
        CHECK(p.from_old_levels == 0);
        s.level = 3;
        p = plan_minibatch(s, cfg, 20);
        CHECK(p.from_old_levels == 4);
        CHECK(p.from_current == 16);
        s.buffer.push_back({});
        p = plan_minibatch(s, cfg, 20);
        CHECK(p.from_buffer == 5);
        CHECK(p.from_old_levels == 4);
        CHECK(p.from_current == 11);
    }

    TEST_CASE("statistical: replay and old-level rates over 1000 iterations") {
        CurriculumConfig cfg;
        CurriculumState s;
        s.level = 6;
        CountingSource src;
        std::mt19937_64 rng(2);
        std::bernoulli_distribution fail(0.1);
        std::set<std::string> seen;
        std::size_t replayed = 0, old = 0, current = 0, total = 0;
        std::vector<ScoredTask> batch = compose_minibatch(s, cfg, 20, std::ref(src), rng);
        for (int it = 0; it < 1000; ++it) {
            std::vector<std::size_t> failed;
            for (std::size_t i = 0; i < batch.size(); ++i)
                if (fail(rng)) failed.push_back(i);
            for (const auto& t : batch) seen.insert(t.task.domain);
            // Never at maximum fitness, so the buffer is never cleared.
            curriculum_step(s, cfg, center_report(batch.size(), false, failed), true, batch);
            s.level_iterations = 0;  // hold the level without restarting
            batch = compose_minibatch(s, cfg, 20, std::ref(src), rng);
            if (s.buffer.empty()) continue;
            for (const auto& t : batch) {
                ++total;
                if (seen.count(t.task.domain)) ++replayed;
                else if (t.task.level < 6) ++old;
                else if (t.task.level == 6) ++current;
            }
        }
        REQUIRE(total > 15000);
        CHECK(std::abs(double(replayed) / double(total) - 0.25) <= 0.05);
        CHECK(std::abs(double(old) / double(total) - 0.20) <= 0.05);
        CHECK(replayed + old + current == total);
    }

    TEST_CASE("restart after the window without solving") {
        CurriculumConfig cfg;
        CurriculumState s;
        s.level = 2;
        const auto batch = dummy_batch(20);
        std::vector<CurriculumEvent> events;
        for (int i = 0; i < 2499; ++i) {
            events = curriculum_step(s, cfg, center_report(20, false, {1}), true, batch);
            CHECK(events.empty());
        }
        events = curriculum_step(s, cfg, center_report(20, false, {1}), true, batch);
        REQUIRE(events.size() == 1);
        CHECK(events[0].kind == EventKind::restart);
        CHECK(s.level == 1);
        CHECK(s.lineage == 1);
        CHECK(s.buffer.empty());
        CHECK(s.iteration == 2500);
    }

    TEST_CASE("no restart when disabled or on the evaluation level") {
        const auto batch = dummy_batch(20);
        CurriculumConfig off;
        off.restarts = false;
        CurriculumState a;
        for (int i = 0; i < 3000; ++i) CHECK(curriculum_step(a, off, center_report(20, false), true, batch).empty());
        CurriculumConfig cfg;
        CurriculumState b;
        b.level = cfg.evaluation_level();
        for (int i = 0; i < 3000; ++i) CHECK(curriculum_step(b, cfg, center_report(20, false), true, batch).empty());
        CHECK(b.lineage == 0);
    }

    TEST_CASE("evaluation level samples every training level and finishes") {
        CurriculumConfig cfg;
        CurriculumState s;
        s.level = cfg.evaluation_level();
        CHECK(s.level == 22);
        CountingSource src;
        std::mt19937_64 rng(3);
        std::map<std::size_t, int> levels;
        for (int i = 0; i < 200; ++i)
            for (const auto& t : compose_minibatch(s, cfg, 20, std::ref(src), rng)) ++levels[t.task.level];
        CHECK(levels.size() == 21);
        CHECK(levels.begin()->first == 1);
        CHECK(levels.rbegin()->first == 21);
        const auto batch = dummy_batch(20);
        std::vector<CurriculumEvent> events;
        for (int i = 0; i < 250; ++i) events = curriculum_step(s, cfg, center_report(20, true), false, batch);
        REQUIRE_FALSE(events.empty());
        CHECK(events.back().kind == EventKind::evaluation_passed);
        CHECK(s.finished);
    }

    TEST_CASE("configuration validation") {
        CurriculumConfig c;
        c.buffer_share = 0.9;
        c.old_level_share = 0.2;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = {};
        c.final_level = 0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
}
