#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ncomp/engine.hpp"

namespace ncomp {

inline constexpr double kMaxSearchFitness = 120.0;
inline constexpr double kMaxPlanFitness = 150.0;

double max_fitness(TaskKind kind);

struct SampleFitness {
    double f_e = 0.0;
    double f_b = 0.0;
    std::optional<std::size_t> first_mistake;
    bool perfect = false;
};

struct FitnessReport {
    TaskKind kind = TaskKind::search;
    std::vector<SampleFitness> samples;
    double fitness = 0.0;  // batch fitness f
    double mean_f_e = 0.0;
    bool at_max = false;

    // Indices of samples with at least one mismatch.
    std::vector<std::size_t> failed() const;
};

// Exploration score in [0, 100]: correct ops count 1, correct reads 2,
// normalised over the trace length or the step of the first mistake.
double exploration_fitness(const EpisodeScore& score);

// f = mean(f_e) while it is below 100, mean(f_e + f_b) afterwards.
// f_b is 20 for a nop after exploration.
FitnessReport fitness_search(std::span<const EpisodeScore> episodes);
// f_b scores the backtrack steps like exploration, scaled to 50.
FitnessReport fitness_plan(std::span<const EpisodeScore> episodes);
FitnessReport fitness(TaskKind kind, std::span<const EpisodeScore> episodes);

}  // namespace ncomp
