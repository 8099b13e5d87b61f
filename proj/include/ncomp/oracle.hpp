#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncomp/bits.hpp"
#include "ncomp/domains.hpp"

namespace ncomp {

enum class TaskKind { search, plan };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct TaskInstance {
    Bits start;
    Bits goal;
    std::size_t level = 0;
    std::string domain;
    bool operator==(const TaskInstance&) const = default;
};

struct TraceStep {
    Bits d_m;
    int op = 0;
    bool operator==(const TraceStep&) const = default;
};

// Expected (read word, operation) sequence. Search traces expect one nop
// step after exploration; plan traces expect the goal-to-start path with nops.
struct TargetTrace {
    TaskKind kind = TaskKind::search;
    std::size_t level = 0;
    std::vector<TraceStep> explore;
    std::vector<Bits> backtrack;

    std::size_t explore_steps() const { return explore.size(); }
    std::size_t backtrack_steps() const { return backtrack.size(); }
    std::size_t total_steps() const {
        return explore.size() + (kind == TaskKind::search ? 1 : backtrack.size());
    }
    bool operator==(const TargetTrace&) const = default;
};

// Breadth-first tree without duplicate elimination: every expanded node gets
// four children (blocked moves included), in operation order.
struct SearchTree {
    struct Node {
        Bits word;
        std::optional<std::size_t> parent;
        int op = -1;  // operation that produced the node from its parent
    };
    std::vector<Node> nodes;
    std::size_t goal_node = 0;
    std::size_t level = 0;        // nodes expanded (a partial final expansion counts)
    std::size_t explore_steps = 0;
};

inline constexpr std::size_t kDefaultLevelCap = std::size_t{1} << 21;

// Expands nodes in FIFO order until a produced word equals the goal. Throws
// SamplingError when the goal equals the start or is not found within
// `level_cap` expansions.
SearchTree bfs_search(const Domain& domain, const Bits& start, const Bits& goal,
                      std::size_t level_cap = kDefaultLevelCap);

TargetTrace oracle_trace(const Domain& domain, const TaskInstance& task, TaskKind kind,
                         std::size_t level_cap = kDefaultLevelCap);
TargetTrace trace_from_tree(const SearchTree& tree, TaskKind kind);

// Level of the goal, or nullopt when it is not found within max_level
// expansions (or equals the start).
std::optional<std::size_t> oracle_level(const Domain& domain, const Bits& start, const Bits& goal,
                                        std::size_t max_level);

struct SamplerOptions {
    int min_walk = 1;
    int max_walk = 12;
    std::size_t max_attempts = 20000;
};

// False when no probed world has a first-occurrence state at this level, e.g.
// level 8 of the sliding puzzle, whose 7th expanded node always repeats an
// earlier one. Deterministic and cached per domain and level.
bool level_attainable(const Domain& domain, std::size_t level);

// Smallest attainable level >= `level`.
std::size_t next_attainable_level(const Domain& domain, std::size_t level);

// Random world, random walk of uniform length to a goal, accepted when the
// oracle level matches; falls back to task_at_level after max_attempts
// rejections. Throws SamplingError for unattainable levels.
TaskInstance sample_task(const Domain& domain, std::mt19937_64& rng, std::size_t level,
                         const SamplerOptions& options = {});

// Direct construction for large levels: expands `level` nodes and picks a
// first-occurrence child of the last expanded node as goal. Up to
// 1000 * max_worlds candidate worlds are screened along the op chain of that
// node; at most max_worlds are fully expanded.
TaskInstance task_at_level(const Domain& domain, std::mt19937_64& rng, std::size_t level,
                           std::size_t max_worlds = 1000);

// Graphviz text for the tree (nodes up to the goal).
std::string search_tree_dot(const Domain& domain, const SearchTree& tree);

}  // namespace ncomp
