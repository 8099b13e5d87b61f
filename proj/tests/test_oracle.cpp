#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ncomp/errors.hpp"
#include "ncomp/oracle.hpp"

using namespace ncomp;

TEST_SUITE("oracle") {
    TEST_CASE("oracle trace matches the reference breadth-first search") {
        std::mt19937_64 rng(31);
        const SokobanDomain d(6);
        for (int i = 0; i < 200; ++i) {
            const std::size_t level = 1 + std::size_t(i % 8);
            const TaskInstance task = sample_task(d, rng, level);
            const auto start = testref::to_grid(d.decode(task.start));
            const auto goal = testref::to_grid(d.decode(task.goal));
            const auto ref = testref::bfs(start, goal);
            REQUIRE(ref.goal >= 0);
            CHECK(std::size_t(ref.level) == level);

            for (const TaskKind kind : {TaskKind::search, TaskKind::plan}) {
                const TargetTrace tr = oracle_trace(d, task, kind);
                CHECK(tr.level == level);
                REQUIRE(tr.explore.size() == ref.explore.size());
                for (std::size_t s = 0; s < ref.explore.size(); ++s) {
                    const auto [node, op] = ref.explore[s];
                    REQUIRE(tr.explore[s].op == op);
                    REQUIRE(tr.explore[s].d_m == d.encode(testref::from_grid(ref.nodes[std::size_t(node)].grid)));
                }
                if (kind == TaskKind::search) {
                    CHECK(tr.backtrack.empty());
                    CHECK(tr.total_steps() == tr.explore.size() + 1);
                } else {
                    const auto path = testref::path_to_root(ref);
                    REQUIRE(tr.backtrack.size() == path.size());
                    for (std::size_t k = 0; k < path.size(); ++k)
                        CHECK(tr.backtrack[k] == d.encode(testref::from_grid(ref.nodes[std::size_t(path[k])].grid)));
                    CHECK(tr.backtrack.front() == task.goal);
                    CHECK(tr.backtrack.back() == task.start);
                }
            }
        }
    }

    TEST_CASE("search traces obey the step bound") {
        std::mt19937_64 rng(32);
        const SokobanDomain d(6);
        for (int i = 0; i < 300; ++i) {
            const std::size_t level = 1 + std::size_t(i % 10);
            const auto tr = oracle_trace(d, sample_task(d, rng, level), TaskKind::search);
            CHECK(tr.explore_steps() <= 4 * level);
            CHECK(tr.explore_steps() > 4 * (level - 1));
            CHECK(tr.total_steps() <= 4 * level + 1);
        }
    }

    TEST_CASE("level-1 search takes at most 5 steps") {
        std::mt19937_64 rng(33);
        const SokobanDomain d(6);
        for (int i = 0; i < 200; ++i) {
            const auto task = sample_task(d, rng, 1);
            CHECK(oracle_trace(d, task, TaskKind::search).total_steps() <= 5);
            // Goal is a direct successor of the start.
            bool successor = false;
            for (int op = 0; op < 4; ++op) successor |= d.apply_action(task.start, op) == task.goal;
            CHECK(successor);
        }
    }

    TEST_CASE("maximal traces at levels 3 and 21") {
        const SokobanDomain d(6);
        const auto t3 = testref::max_length_task(d, 3, 1);
        CHECK(oracle_trace(d, t3, TaskKind::search).total_steps() == 13);
        CHECK(oracle_trace(d, t3, TaskKind::plan).total_steps() == 15);
        const auto t21 = testref::max_length_task(d, 21, 2);
        CHECK(oracle_trace(d, t21, TaskKind::search).total_steps() == 85);
        // The goal is three moves from the start.
        CHECK(oracle_trace(d, t21, TaskKind::plan).total_steps() == 84 + 4);
    }

    TEST_CASE("backtrack states form a valid action path") {
        std::mt19937_64 rng(34);
        const std::vector<std::shared_ptr<const Domain>> domains{
            make_domain("sokoban", 6, {0, 1, 2, 3}), make_domain("puzzle", 3, {0, 1, 2, 3}),
            make_domain("manipulation", 0, {0, 1, 2, 3})};
        for (const auto& d : domains)
            for (int i = 0; i < 50; ++i) {
                const auto tr = oracle_trace(*d, sample_task(*d, rng, next_attainable_level(*d, 1 + std::size_t(i % 6))), TaskKind::plan);
                for (std::size_t k = 0; k + 1 < tr.backtrack.size(); ++k) {
                    bool linked = false;
                    for (int op = 0; op < 4; ++op) linked |= d->apply_action(tr.backtrack[k + 1], op) == tr.backtrack[k];
                    CHECK(linked);
                }
            }
    }

    TEST_CASE("levels whose last expanded node always repeats cannot be sampled") {
        // Puzzle: node 7 is down-after-up from the root, which is the root or
        // node 3 again. Manipulation: node 5 is place-after-pick at position
        // 0, the root or node 1 again.
        std::mt19937_64 rng(38);
        const auto puzzle = make_domain("puzzle", 3, {0, 1, 2, 3});
        const auto manip = make_domain("manipulation", 0, {0, 1, 2, 3});
        for (int i = 0; i < 300; ++i)
            for (const auto& [d, node] : {std::pair{puzzle, 7}, std::pair{manip, 5}}) {
                std::vector<Bits> q{d->sample_start(rng)};
                for (std::size_t e = 0; q.size() <= std::size_t(node); ++e)
                    for (int op = 0; op < 4; ++op) q.push_back(d->apply_action(q[e], op));
                bool repeats = false;
                for (int k = 0; k < node; ++k) repeats |= q[std::size_t(k)] == q[std::size_t(node)];
                CHECK(repeats);
            }
        CHECK_FALSE(level_attainable(*puzzle, 8));
        CHECK_FALSE(level_attainable(*manip, 6));
        CHECK(next_attainable_level(*puzzle, 8) == 9);
        CHECK_THROWS_AS(sample_task(*puzzle, rng, 8), SamplingError);
        const SokobanDomain sok(6);
        for (std::size_t l = 1; l <= 21; ++l) CHECK(level_attainable(sok, l));
        for (std::size_t l = 1; l <= 21; ++l)
            if (level_attainable(*manip, l)) CHECK(sample_task(*manip, rng, l).level == l);
    }

    TEST_CASE("sampled level-5 tasks all have oracle level 5") {
        std::mt19937_64 rng(35);
        const SokobanDomain d(6);
        for (int i = 0; i < 1000; ++i) {
            const auto task = sample_task(d, rng, 5);
            REQUIRE(task.level == 5);
            REQUIRE(oracle_level(d, task.start, task.goal, 10) == 5u);
        }
    }

    TEST_CASE("degenerate and unreachable goals are rejected") {
        std::mt19937_64 rng(36);
        const SokobanDomain d(6);
        const Bits start = d.sample_start(rng);
        CHECK_THROWS_AS(bfs_search(d, start, start), SamplingError);
        CHECK_FALSE(oracle_level(d, start, start, 10).has_value());
        // Agent sealed in a corner cannot reach the other side.
        const auto sealed = d.encode(testref::from_grid({"######", "#@#..#", "###..#", "#....#", "#...$#", "######"}));
        const auto other = d.encode(testref::from_grid({"######", "#.#..#", "###..#", "#....#", "#..@$#", "######"}));
        CHECK_THROWS_AS(bfs_search(d, sealed, other, 50), SamplingError);
    }

    TEST_CASE("remapped codec gives the same trace structure") {
        std::mt19937_64 rng(37);
        const SokobanDomain plain(6), remapped(6, remap_representation({}, {0, 3, 2, 1}));
        for (int i = 0; i < 100; ++i) {
            const auto task = sample_task(plain, rng, 1 + std::size_t(i % 5));
            TaskInstance mapped = task;
            mapped.start = remapped.encode(plain.decode(task.start));
            mapped.goal = remapped.encode(plain.decode(task.goal));
            const auto a = oracle_trace(plain, task, TaskKind::plan);
            const auto b = oracle_trace(remapped, mapped, TaskKind::plan);
            REQUIRE(a.explore.size() == b.explore.size());
            for (std::size_t s = 0; s < a.explore.size(); ++s) {
                CHECK(a.explore[s].op == b.explore[s].op);
                CHECK(plain.decode(a.explore[s].d_m) == remapped.decode(b.explore[s].d_m));
            }
            REQUIRE(a.backtrack.size() == b.backtrack.size());
        }
    }

    TEST_CASE("directly constructed tasks land on the requested level") {
        std::mt19937_64 rng(38);
        const SokobanDomain d(6);
        for (const std::size_t level : {1u, 7u, 40u, 300u}) {
            const auto task = task_at_level(d, rng, level);
            CHECK(task.level == level);
            CHECK(oracle_level(d, task.start, task.goal, level + 1) == level);
        }
    }

    TEST_CASE("tree export mentions every node up to the goal") {
        std::mt19937_64 rng(39);
        const SokobanDomain d(6);
        const auto task = sample_task(d, rng, 2);
        const auto tree = bfs_search(d, task.start, task.goal);
        const auto dot = search_tree_dot(d, tree);
        CHECK(dot.find("digraph") != std::string::npos);
        CHECK(tree.goal_node == tree.nodes.size() - 1);
        CHECK(tree.level == 2);
    }
}
