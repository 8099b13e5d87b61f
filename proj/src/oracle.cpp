#include "ncomp/oracle.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include "ncomp/errors.hpp"

namespace ncomp {

std::string to_string(TaskKind k) { return k == TaskKind::search ? "search" : "plan"; }

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "search") return TaskKind::search;
    if (s == "plan") return TaskKind::plan;
    throw ConfigError("unknown task kind '" + s + "'");
}

SearchTree bfs_search(const Domain& domain, const Bits& start, const Bits& goal, std::size_t level_cap) {
    domain.validate_word(start);
    domain.validate_word(goal);
    if (start == goal) throw SamplingError("goal equals start; level 0 is undefined");
    SearchTree tree;
    tree.nodes.push_back({start, std::nullopt, -1});
    for (std::size_t expand = 0; expand < level_cap && expand < tree.nodes.size(); ++expand) {
        for (int op = 0; op < kNop; ++op) {
            Bits child = domain.apply_action(tree.nodes[expand].word, op);
            const bool found = child == goal;
            tree.nodes.push_back({std::move(child), expand, op});
            if (found) {
                tree.goal_node = tree.nodes.size() - 1;
                tree.level = expand + 1;
                tree.explore_steps = 4 * expand + static_cast<std::size_t>(op) + 1;
                return tree;
            }
        }
    }
    throw SamplingError("goal not reached within " + std::to_string(level_cap) + " expansions");
}

TargetTrace trace_from_tree(const SearchTree& tree, TaskKind kind) {
    TargetTrace trace;
    trace.kind = kind;
    trace.level = tree.level;
    trace.explore.reserve(tree.explore_steps);
    for (std::size_t t = 0; t < tree.explore_steps; ++t)
        trace.explore.push_back({tree.nodes[t / 4].word, static_cast<int>(t % 4)});
    if (kind == TaskKind::plan) {
        std::optional<std::size_t> n = tree.goal_node;
        while (n) {
            trace.backtrack.push_back(tree.nodes[*n].word);
            n = tree.nodes[*n].parent;
        }
    }
    return trace;
}

TargetTrace oracle_trace(const Domain& domain, const TaskInstance& task, TaskKind kind, std::size_t level_cap) {
    return trace_from_tree(bfs_search(domain, task.start, task.goal, level_cap), kind);
}

std::optional<std::size_t> oracle_level(const Domain& domain, const Bits& start, const Bits& goal,
                                        std::size_t max_level) {
    if (start == goal) return std::nullopt;
    std::vector<Bits> queue{start};
    for (std::size_t expand = 0; expand < max_level && expand < queue.size(); ++expand) {
        for (int op = 0; op < kNop; ++op) {
            queue.push_back(domain.apply_action(queue[expand], op));
            if (queue.back() == goal) return expand + 1;
        }
    }
    return std::nullopt;
}

namespace {

// Expands `level` nodes from `start`; returns the first-occurrence children of
// the last expanded node (empty when that node has none or the tree is short).
std::vector<Bits> fresh_at_level(const Domain& domain, Bits start, std::size_t level) {
    std::vector<Bits> queue{std::move(start)};
    std::unordered_set<Bits, BitsHash> seen{queue[0]};
    std::vector<Bits> fresh;
    for (std::size_t expand = 0; expand < level && expand < queue.size(); ++expand) {
        for (int op = 0; op < kNop; ++op) {
            Bits child = domain.apply_action(queue[expand], op);
            const bool is_new = seen.insert(child).second;
            if (expand + 1 == level && is_new) fresh.push_back(child);
            queue.push_back(std::move(child));
        }
    }
    if (queue.size() < 4 * level + 1) fresh.clear();
    return fresh;
}

}  // namespace

bool level_attainable(const Domain& domain, std::size_t level) {
    if (level == 0) return false;
    static std::mutex mu;
    static std::map<std::pair<std::string, std::size_t>, bool> cache;
    const auto key = std::make_pair(domain.descriptor(), level);
    {
        std::lock_guard lock(mu);
        if (const auto it = cache.find(key); it != cache.end()) return it->second;
    }
    std::mt19937_64 rng(0x5eed + level);
    bool found = false;
    for (int world = 0; world < 2000 && !found; ++world) found = !fresh_at_level(domain, domain.sample_start(rng), level).empty();
    std::lock_guard lock(mu);
    cache[key] = found;
    return found;
}

std::size_t next_attainable_level(const Domain& domain, std::size_t level) {
    for (std::size_t l = std::max<std::size_t>(level, 1); l < level + 64; ++l)
        if (level_attainable(domain, l)) return l;
    throw SamplingError("no attainable level at or above " + std::to_string(level));
}

TaskInstance sample_task(const Domain& domain, std::mt19937_64& rng, std::size_t level,
                         const SamplerOptions& options) {
    if (level == 0) throw ConfigError("task level must be >= 1");
    if (!level_attainable(domain, level))
        throw SamplingError("level " + std::to_string(level) + " cannot occur in " + domain.name());
    std::uniform_int_distribution<int> walk_len(options.min_walk, options.max_walk);
    std::uniform_int_distribution<int> move(0, kNop - 1);
    for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        Bits start = domain.sample_start(rng);
        Bits goal = start;
        const int steps = walk_len(rng);
        for (int i = 0; i < steps; ++i) goal = domain.apply_action(goal, move(rng));
        if (oracle_level(domain, start, goal, level) == level)
            return {std::move(start), std::move(goal), level, domain.name()};
    }
    return task_at_level(domain, rng, level);
}

TaskInstance task_at_level(const Domain& domain, std::mt19937_64& rng, std::size_t level, std::size_t max_worlds) {
    if (level == 0) throw ConfigError("task level must be >= 1");
    // Node k's children are 4k+1..4k+4, so the ops leading to node level-1
    // are the base-4 digits of its index. A world where that chain stalls or
    // revisits a state cannot place a fresh goal there; reject it cheaply.
    std::vector<int> chain;
    for (std::size_t node = level - 1; node > 0; node = (node - 1) / 4) chain.push_back(int((node - 1) % 4));
    std::reverse(chain.begin(), chain.end());
    const std::size_t max_candidates = max_worlds * 1000;
    std::size_t full = 0;
    for (std::size_t candidate = 0; candidate < max_candidates && full < max_worlds; ++candidate) {
        Bits start = domain.sample_start(rng);
        std::vector<Bits> path{start};
        bool ok = true;
        for (int op : chain) {
            path.push_back(domain.apply_action(path.back(), op));
            ok = std::find(path.begin(), path.end() - 1, path.back()) == path.end() - 1;
            if (!ok) break;
        }
        if (!ok) continue;
        ++full;
        const auto fresh = fresh_at_level(domain, start, level);
        if (fresh.empty()) continue;
        Bits goal = fresh[std::uniform_int_distribution<std::size_t>(0, fresh.size() - 1)(rng)];
        return {std::move(start), std::move(goal), level, domain.name()};
    }
    throw SamplingError("could not construct a level-" + std::to_string(level) + " task");
}

std::string search_tree_dot(const Domain& domain, const SearchTree& tree) {
    static const char* kOpNames[] = {"up", "right", "down", "left", "nop"};
    std::ostringstream os;
    os << "digraph search_tree {\n  node [shape=box, fontname=monospace];\n";
    for (std::size_t i = 0; i <= tree.goal_node && i < tree.nodes.size(); ++i) {
        std::string label = domain.render(tree.nodes[i].word);
        std::string escaped;
        for (char c : label) escaped += c == '\n' ? std::string("\\l") : std::string(1, c);
        os << "  s" << i << " [label=\"s" << i << "\\l" << escaped << "\"";
        if (i == tree.goal_node) os << ", color=red";
        os << "];\n";
        if (tree.nodes[i].parent)
            os << "  s" << *tree.nodes[i].parent << " -> s" << i << " [label=\"" << kOpNames[tree.nodes[i].op]
               << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace ncomp
