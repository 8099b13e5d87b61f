#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "ncomp/fitness.hpp"

namespace ncomp {

struct NesConfig {
    std::size_t population = 20;
    double sigma = 0.1;
    double learning_rate = 0.01;
    double weight_decay = 0.9995;
    std::size_t minibatch = 20;

    void validate() const;  // throws ConfigError
    bool operator==(const NesConfig&) const = default;
};

// Log-rank utilities max(0, ln(P/2 + 1) - ln(rank)), rank 1 = fittest,
// shifted to sum to zero. Tied fitnesses share the mean utility of their
// ranks.
std::vector<double> rank_transform(std::span<const double> fitnesses);

// Fitness of a set of genomes on the current minibatch.
using PopulationEvaluator = std::function<std::vector<FitnessReport>(std::span<const std::vector<double>>)>;

struct NesStep {
    FitnessReport center;
    bool updated = false;
    std::vector<double> offspring_fitness;  // empty when no update ran
};

// One iteration: evaluate the centre; unless it already has maximum
// fitness, evaluate P perturbations theta + sigma * eps_i, move theta by
// alpha / (P sigma) * sum u_i eps_i and apply weight decay. Perturbations are
// drawn before evaluation so the result does not depend on scheduling.
// Throws NumericError if theta becomes non-finite.
NesStep nes_iteration(std::vector<double>& theta, const NesConfig& config, std::mt19937_64& rng,
                      const PopulationEvaluator& evaluate);

}  // namespace ncomp
