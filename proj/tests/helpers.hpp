#pragma once

// Independent reference implementations used as test oracles. They work on
// plain character grids and vectors and share no code with the library.

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <stdexcept>

#include "ncomp/domains.hpp"
#include "ncomp/oracle.hpp"

namespace testref {

// '.' empty, '#' wall, '$' box, '@' agent; rows top to bottom.
using Grid = std::vector<std::string>;

inline Grid to_grid(const ncomp::GridWorld& w) {
    Grid g(w.height, std::string(w.width, '.'));
    for (std::size_t r = 0; r < w.height; ++r)
        for (std::size_t c = 0; c < w.width; ++c) g[r][c] = ".#$@"[static_cast<int>(w.at(r, c))];
    return g;
}

inline ncomp::GridWorld from_grid(const Grid& g) {
    ncomp::GridWorld w(g[0].size(), g.size());
    for (std::size_t r = 0; r < g.size(); ++r)
        for (std::size_t c = 0; c < g[r].size(); ++c) {
            const char ch = g[r][c];
            w.at(r, c) = ch == '#' ? ncomp::Cell::wall
                         : ch == '$' ? ncomp::Cell::box
                         : ch == '@' ? ncomp::Cell::agent
                                     : ncomp::Cell::empty;
        }
    return w;
}

// Sokoban move on a character grid: 0 up, 1 right, 2 down, 3 left, 4 nop.
inline Grid move(Grid g, int op) {
    if (op == 4) return g;
    const int dr[] = {-1, 0, 1, 0};
    const int dc[] = {0, 1, 0, -1};
    int ar = -1, ac = -1;
    for (int r = 0; r < int(g.size()); ++r)
        for (int c = 0; c < int(g[r].size()); ++c)
            if (g[r][c] == '@') ar = r, ac = c;
    auto at = [&](int r, int c) -> char {
        if (r < 0 || c < 0 || r >= int(g.size()) || c >= int(g[0].size())) return '#';
        return g[r][c];
    };
    const int tr = ar + dr[op], tc = ac + dc[op];
    const int br = tr + dr[op], bc = tc + dc[op];
    if (at(tr, tc) == '.') {
        g[ar][ac] = '.';
        g[tr][tc] = '@';
    } else if (at(tr, tc) == '$' && at(br, bc) == '.') {
        g[ar][ac] = '.';
        g[tr][tc] = '@';
        g[br][bc] = '$';
    }
    return g;
}

struct Node {
    Grid grid;
    int parent;
    int op;
};

// Plain BFS tree (no duplicate removal) until `goal` is generated.
// Returns explore pairs (node index, op) and the goal's node index.
struct BfsResult {
    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> explore;
    int goal = -1;
    int level = 0;
};

inline BfsResult bfs(const Grid& start, const Grid& goal, int max_level = 100000) {
    BfsResult r;
    r.nodes.push_back({start, -1, -1});
    for (int n = 0; n < int(r.nodes.size()) && n < max_level; ++n) {
        for (int op = 0; op < 4; ++op) {
            r.explore.push_back({n, op});
            Grid child = move(r.nodes[std::size_t(n)].grid, op);
            const bool hit = child == goal;
            r.nodes.push_back({std::move(child), n, op});
            if (hit) {
                r.goal = int(r.nodes.size()) - 1;
                r.level = n + 1;
                return r;
            }
        }
    }
    return r;
}

// Goal-to-start path of node indices.
inline std::vector<int> path_to_root(const BfsResult& r) {
    std::vector<int> p;
    for (int n = r.goal; n >= 0; n = r.nodes[std::size_t(n)].parent) p.push_back(n);
    return p;
}

// 9-cell local view by direct index arithmetic: center, then two cells in
// each direction (up, right, down, left); outside reads as wall.
inline std::array<char, 9> view(const Grid& g) {
    int ar = 0, ac = 0;
    for (int r = 0; r < int(g.size()); ++r)
        for (int c = 0; c < int(g[r].size()); ++c)
            if (g[r][c] == '@') ar = r, ac = c;
    auto at = [&](int r, int c) -> char {
        if (r < 0 || c < 0 || r >= int(g.size()) || c >= int(g[0].size())) return '#';
        return g[r][c];
    };
    return {at(ar, ac),         at(ar - 1, ac), at(ar - 2, ac), at(ar, ac + 1), at(ar, ac + 2),
            at(ar + 1, ac),     at(ar + 2, ac), at(ar, ac - 1), at(ar, ac - 2)};
}

// Goal = last child of the last node expanded at `level`, when that child
// does not occur earlier in the tree (so the search runs to its maximum).
inline std::optional<Grid> max_length_goal(const Grid& start, int level) {
    std::vector<Grid> nodes{start};
    for (int n = 0; n < level; ++n)
        for (int op = 0; op < 4; ++op) nodes.push_back(move(nodes[std::size_t(n)], op));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (nodes[i] == nodes.back()) return std::nullopt;
    return nodes.back();
}

inline ncomp::TaskInstance max_length_task(const ncomp::SokobanDomain& d, int level, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 10000; ++i) {
        const ncomp::GridWorld w = d.sample_world(rng);
        if (auto goal = max_length_goal(to_grid(w), level))
            return {d.encode(w), d.encode(from_grid(*goal)), std::size_t(level), d.name()};
    }
    throw std::runtime_error("no max-length task found");
}

}  // namespace testref
