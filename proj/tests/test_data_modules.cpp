#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ncomp/data_modules.hpp"
#include "ncomp/errors.hpp"

using namespace ncomp;

namespace {

Cell cell_of(char ch) {
    return ch == '#' ? Cell::wall : ch == '$' ? Cell::box : ch == '@' ? Cell::agent : Cell::empty;
}

std::shared_ptr<const SokobanDomain> sokoban6() { return std::make_shared<SokobanDomain>(6); }

}  // namespace

TEST_SUITE("data_modules") {
    TEST_CASE("phase signal examples") {
        CHECK(next_phase(false, {1, 0, 0}) == PhaseSignals{1, 0, 0});
        CHECK(next_phase(true, {1, 0, 0}) == PhaseSignals{0, 1, 0});
        // Raw formulas give (-1, 2, 1) here; clamping keeps them binary.
        CHECK(next_phase(true, {0, 1, 0}) == PhaseSignals{0, 1, 1});
        CHECK(next_phase(false, {0, 1, 0}) == PhaseSignals{0, 1, 0});
    }

    TEST_CASE("property: goal-found latches and termination implies goal-found") {
        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 1000; ++trial) {
            PhaseSignals p{};
            bool latched = false;
            for (int t = 0; t < 30; ++t) {
                p = next_phase(rng() % 3 == 0, p);
                if (latched) CHECK(p.goal_found == 1);
                latched |= p.goal_found == 1;
                if (p.terminated) CHECK(p.goal_found == 1);
                CHECK(p.searching + p.goal_found <= 1);
            }
        }
    }

    TEST_CASE("input module compares words and passes x through") {
        const SokobanOracleModules m(sokoban6());
        std::mt19937_64 rng(2);
        const Bits a = m.domain().sample_start(rng);
        const Bits b = m.domain().apply_action(a, kOpUp) == a ? m.domain().sample_start(rng) : m.domain().apply_action(a, kOpUp);
        const auto r = m.input(a, b, {});
        CHECK_FALSE(r.equal);
        CHECK(r.d_i == b);
        CHECK(m.input(a, a, {}).equal);
        CHECK_THROWS_AS(m.input(a, Bits(10, 0), {}), ConfigError);
    }

    TEST_CASE("agent view in an empty room") {
        const SokobanOracleModules m(sokoban6());
        const GridWorld w = testref::from_grid({"######", "#....#", "#..@.#", "#....#", "#....#", "######"});
        const Bits v = m.transform(m.domain().encode(w));
        REQUIRE(v.size() == kViewWidth);
        CHECK(m.domain().decode_cell(v.data()) == Cell::agent);
        // up2 and right2 are border walls; every other neighbor is empty.
        const std::array<Cell, 9> expected{Cell::agent, Cell::empty, Cell::wall, Cell::empty, Cell::wall,
                                           Cell::empty, Cell::empty, Cell::empty, Cell::empty};
        for (std::size_t i = 0; i < 9; ++i) CHECK(m.domain().decode_cell(v.data() + 4 * i) == expected[i]);
    }

    TEST_CASE("cells outside the grid read as wall") {
        const auto d = std::make_shared<SokobanDomain>(4);
        const SokobanOracleModules m(d);
        const GridWorld w = testref::from_grid({"####", "#@.#", "#..#", "####"});
        const Bits v = m.transform(d->encode(w));
        // up2 and left2 lie outside the 4x4 grid.
        CHECK(d->decode_cell(v.data() + 4 * 2) == Cell::wall);
        CHECK(d->decode_cell(v.data() + 4 * 8) == Cell::wall);
    }

    TEST_CASE("view equals brute-force indexing on random worlds") {
        for (const std::array<std::uint8_t, 4> perm : {std::array<std::uint8_t, 4>{0, 1, 2, 3}, std::array<std::uint8_t, 4>{0, 3, 2, 1}}) {
            const auto d = std::make_shared<SokobanDomain>(6, remap_representation({}, perm));
            const SokobanOracleModules m(d);
            std::mt19937_64 rng(3);
            for (int i = 0; i < 2000; ++i) {
                const GridWorld w = d->sample_world(rng);
                const Bits v = m.transform(d->encode(w));
                const auto ref = testref::view(testref::to_grid(w));
                for (std::size_t k = 0; k < 9; ++k) REQUIRE(d->decode_cell(v.data() + 4 * k) == cell_of(ref[k]));
            }
        }
    }

    TEST_CASE("transform rejects worlds without exactly one agent") {
        const SokobanOracleModules m(sokoban6());
        const GridWorld none = testref::from_grid({"######", "#....#", "#....#", "#.$..#", "#....#", "######"});
        CHECK_THROWS_AS(m.transform(m.domain().encode(none)), DomainError);
    }

    TEST_CASE("ALU rule examples") {
        const SokobanOracleModules m(sokoban6());
        const auto& d = m.domain();
        auto cells = [&](const AluResult& r) {
            return std::array<Cell, 3>{d.decode_cell(r.d_a.data() + 4), d.decode_cell(r.d_a.data() + 8),
                                       d.decode_cell(r.d_a.data() + 12)};
        };
        SUBCASE("move right into empty") {
            const auto w = d.encode(testref::from_grid({"######", "#.@..#", "#....#", "#.$..#", "#....#", "######"}));
            const auto r = m.alu(kOpRight, m.transform(w));
            CHECK(r.c_a);
            CHECK(cells(r) == std::array<Cell, 3>{Cell::empty, Cell::agent, Cell::empty});
            CHECK(r.d_a[kOpRight] == 1);
        }
        SUBCASE("push box right against wall") {
            const auto w = d.encode(testref::from_grid({"######", "#..@$#", "#....#", "#....#", "#....#", "######"}));
            const auto r = m.alu(kOpRight, m.transform(w));
            CHECK_FALSE(r.c_a);
            CHECK(std::count(r.d_a.begin(), r.d_a.begin() + 4, 1) == 0);
            CHECK(cells(r) == std::array<Cell, 3>{Cell::agent, Cell::box, Cell::wall});
        }
        SUBCASE("push box right into empty") {
            const auto w = d.encode(testref::from_grid({"######", "#@$..#", "#....#", "#....#", "#....#", "######"}));
            const auto r = m.alu(kOpRight, m.transform(w));
            CHECK(r.c_a);
            CHECK(cells(r) == std::array<Cell, 3>{Cell::empty, Cell::agent, Cell::box});
        }
        SUBCASE("nop never acts") {
            const auto w = d.encode(testref::from_grid({"######", "#@$..#", "#....#", "#....#", "#....#", "######"}));
            CHECK_FALSE(m.alu(kNop, m.transform(w)).c_a);
        }
    }

    TEST_CASE("output passes through without a change and inserts it otherwise") {
        const SokobanOracleModules m(sokoban6());
        std::mt19937_64 rng(4);
        const Bits w = m.domain().sample_start(rng);
        const auto blocked = m.alu(kNop, m.transform(w));
        const auto r = m.output(false, blocked.d_a, w);
        CHECK_FALSE(r.c_o);
        CHECK(r.d_o == w);

        const auto edge = m.domain().encode(testref::from_grid({"######", "#...@#", "#...$#", "#....#", "#....#", "######"}));
        for (int op = 0; op < 5; ++op) CHECK(m.apply(edge, op) == m.domain().apply_action(edge, op));
        const auto near_wall = m.domain().encode(testref::from_grid({"######", "#..@.#", "#....#", "#....#", "#....#", "######"}));
        CHECK(m.apply(near_wall, kOpRight) == m.domain().apply_action(near_wall, kOpRight));
    }

    TEST_CASE("property: oracle data path equals apply_action for every domain") {
        std::mt19937_64 rng(5);
        const std::vector<std::shared_ptr<const Domain>> domains{
            make_domain("sokoban", 6, {0, 1, 2, 3}), make_domain("sokoban", 6, {0, 3, 2, 1}),
            make_domain("sokoban", 8, {0, 1, 2, 3}), make_domain("puzzle", 3, {0, 1, 2, 3}),
            make_domain("manipulation", 0, {0, 1, 2, 3})};
        for (const auto& d : domains) {
            const auto modules = make_oracle_modules(d);
            Bits w = d->sample_start(rng);
            for (int i = 0; i < 10000; ++i) {
                if (i % 10 == 0) w = d->sample_start(rng);
                const int op = int(rng() % 5);
                const Bits expected = d->apply_action(w, op);
                REQUIRE(modules->apply(w, op) == expected);
                w = expected;
            }
        }
    }

    TEST_CASE("view cell indices by direction") {
        CHECK(view_cells_for(kOpUp) == std::array<std::size_t, 3>{0, 1, 2});
        CHECK(view_cells_for(kOpRight) == std::array<std::size_t, 3>{0, 3, 4});
        CHECK(view_cells_for(kOpDown) == std::array<std::size_t, 3>{0, 5, 6});
        CHECK(view_cells_for(kOpLeft) == std::array<std::size_t, 3>{0, 7, 8});
    }
}
