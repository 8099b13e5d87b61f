#include "ncomp/curriculum.hpp"

#include <cmath>

#include "ncomp/errors.hpp"

namespace ncomp {

void CurriculumConfig::validate() const {
    if (final_level < 1) throw ConfigError("final level must be >= 1");
    if (clear_streak < 1 || solve_streak < 1) throw ConfigError("streak lengths must be >= 1");
    if (restart_window < 1) throw ConfigError("restart window must be >= 1");
    if (buffer_share < 0 || old_level_share < 0 || buffer_share + old_level_share > 1)
        throw ConfigError("minibatch shares must be non-negative and sum to at most 1");
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::level_solved: return "level_solved";
        case EventKind::restart: return "restart";
        case EventKind::buffer_cleared: return "buffer_cleared";
        case EventKind::evaluation_passed: return "evaluation_passed";
    }
    return "?";
}

std::vector<CurriculumEvent> curriculum_step(CurriculumState& state, const CurriculumConfig& config,
                                             const FitnessReport& center, bool updated,
                                             std::span<const ScoredTask> batch) {
    std::vector<CurriculumEvent> events;
    auto emit = [&](EventKind kind, bool without_learning = false) {
        events.push_back({kind, state.iteration, state.level, state.lineage, without_learning});
    };
    ++state.iteration;
    ++state.level_iterations;
    if (updated) ++state.level_updates;

    if (config.bad_memories) {
        for (std::size_t i : center.failed()) {
            if (i >= batch.size()) throw ConfigError("fitness report larger than its minibatch");
            state.buffer.push_back(batch[i]);
            if (state.buffer.size() > config.buffer_capacity) state.buffer.pop_front();
        }
    }

    if (!center.at_max) {
        state.streak = 0;
    } else {
        ++state.streak;
        if (state.streak % config.clear_streak == 0 && !state.buffer.empty()) {
            state.buffer.clear();
            emit(EventKind::buffer_cleared);
        }
        if (state.streak >= config.solve_streak) {
            const bool quiet = state.level_updates == 0;
            if (state.level >= config.evaluation_level()) {
                emit(EventKind::evaluation_passed, quiet);
                state.finished = true;
            } else {
                emit(EventKind::level_solved, quiet);
                ++state.level;
            }
            state.streak = 0;
            state.level_iterations = 0;
            state.level_updates = 0;
            return events;
        }
    }

    if (config.restarts && state.level < config.evaluation_level() &&
        state.level_iterations >= config.restart_window) {
        emit(EventKind::restart);
        state.level = 1;
        state.streak = 0;
        state.level_iterations = 0;
        state.level_updates = 0;
        state.buffer.clear();
        ++state.lineage;
    }
    return events;
}

MinibatchPlan plan_minibatch(const CurriculumState& state, const CurriculumConfig& config, std::size_t size) {
    MinibatchPlan p;
    if (config.bad_memories && !state.buffer.empty())
        p.from_buffer = static_cast<std::size_t>(std::lround(config.buffer_share * static_cast<double>(size)));
    if (state.level > 1)
        p.from_old_levels = static_cast<std::size_t>(std::lround(config.old_level_share * static_cast<double>(size)));
    p.from_buffer = std::min(p.from_buffer, size);
    p.from_old_levels = std::min(p.from_old_levels, size - p.from_buffer);
    p.from_current = size - p.from_buffer - p.from_old_levels;
    return p;
}

std::vector<ScoredTask> compose_minibatch(const CurriculumState& state, const CurriculumConfig& config,
                                          std::size_t size, const TaskSource& source, std::mt19937_64& rng) {
    const MinibatchPlan p = plan_minibatch(state, config, size);
    std::vector<ScoredTask> batch;
    batch.reserve(size);
    if (p.from_buffer > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, state.buffer.size() - 1);
        for (std::size_t i = 0; i < p.from_buffer; ++i) batch.push_back(state.buffer[pick(rng)]);
    }
    const bool evaluating = state.level >= config.evaluation_level();
    // On the evaluation level "previous" and "current" both mean any level.
    const std::size_t old_hi = evaluating ? config.final_level : state.level - 1;
    for (std::size_t i = 0; i < p.from_old_levels; ++i)
        batch.push_back(source(std::uniform_int_distribution<std::size_t>(1, old_hi)(rng), rng));
    for (std::size_t i = 0; i < p.from_current; ++i) {
        const std::size_t level =
            evaluating ? std::uniform_int_distribution<std::size_t>(1, config.final_level)(rng) : state.level;
        batch.push_back(source(level, rng));
    }
    return batch;
}

}  // namespace ncomp
