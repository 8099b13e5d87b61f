#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ncomp/fitness.hpp"
#include "ncomp/population.hpp"

namespace ncomp {

struct CurriculumConfig {
    std::size_t final_level = 21;          // last training level; the next one samples all levels
    std::size_t clear_streak = 10;         // max-fitness iterations that empty the buffer
    std::size_t solve_streak = 250;        // max-fitness iterations that solve a level
    std::size_t restart_window = 2500;     // iterations allowed per level before a restart
    std::size_t buffer_capacity = 200;
    double buffer_share = 0.25;
    double old_level_share = 0.20;
    bool bad_memories = true;
    bool restarts = true;

    void validate() const;
    std::size_t evaluation_level() const { return final_level + 1; }
    bool operator==(const CurriculumConfig&) const = default;
};

struct CurriculumState {
    std::size_t level = 1;
    std::size_t streak = 0;
    std::size_t iteration = 0;            // total iterations so far
    std::size_t level_iterations = 0;     // iterations spent on the current level
    std::size_t level_updates = 0;        // iterations on this level that triggered learning
    std::size_t lineage = 0;
    bool finished = false;                // evaluation level passed
    std::deque<ScoredTask> buffer;
};

enum class EventKind { level_solved, restart, buffer_cleared, evaluation_passed };

std::string to_string(EventKind k);

struct CurriculumEvent {
    EventKind kind = EventKind::level_solved;
    std::size_t iteration = 0;
    std::size_t level = 0;
    std::size_t lineage = 0;
    bool without_learning = false;  // level solved with no update on it
};

// Folds one iteration's centre report into the state. `batch` is the
// minibatch the report was computed on; tasks the centre failed enter the
// bad-memory buffer.
std::vector<CurriculumEvent> curriculum_step(CurriculumState& state, const CurriculumConfig& config,
                                             const FitnessReport& center, bool updated,
                                             std::span<const ScoredTask> batch);

// Produces a fresh task of a given level.
using TaskSource = std::function<ScoredTask(std::size_t level, std::mt19937_64& rng)>;

struct MinibatchPlan {
    std::size_t from_buffer = 0;
    std::size_t from_old_levels = 0;
    std::size_t from_current = 0;
};

// Buffer share first (when non-empty), previous levels second (level > 1),
// the remainder from the current level.
MinibatchPlan plan_minibatch(const CurriculumState& state, const CurriculumConfig& config, std::size_t size);

std::vector<ScoredTask> compose_minibatch(const CurriculumState& state, const CurriculumConfig& config,
                                          std::size_t size, const TaskSource& source, std::mt19937_64& rng);

}  // namespace ncomp
