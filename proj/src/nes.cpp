#include "ncomp/nes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncomp/errors.hpp"

namespace ncomp {

void NesConfig::validate() const {
    if (population < 1 || minibatch < 1) throw ConfigError("population and minibatch must be >= 1");
    if (!(sigma > 0.0) || !(learning_rate > 0.0)) throw ConfigError("sigma and learning rate must be > 0");
    if (!(weight_decay > 0.0 && weight_decay <= 1.0)) throw ConfigError("weight decay must be in (0, 1]");
}

std::vector<double> rank_transform(std::span<const double> fitnesses) {
    const std::size_t n = fitnesses.size();
    std::vector<double> u(n, 0.0);
    if (n == 0) return u;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitnesses[a] > fitnesses[b]; });

    const double top = std::log(static_cast<double>(n) / 2.0 + 1.0);
    std::vector<double> raw(n);
    for (std::size_t r = 0; r < n; ++r) raw[r] = std::max(0.0, top - std::log(static_cast<double>(r + 1)));
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(n);

    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < n && fitnesses[order[j]] == fitnesses[order[i]]) sum += raw[j++];
        const double shared = sum / static_cast<double>(j - i) - mean;
        for (std::size_t k = i; k < j; ++k) u[order[k]] = shared;
        i = j;
    }
    // Remove rounding drift so the utilities sum to zero.
    const double drift = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
    if (drift != 0.0)
        for (auto& x : u) x -= drift;
    return u;
}

NesStep nes_iteration(std::vector<double>& theta, const NesConfig& config, std::mt19937_64& rng,
                      const PopulationEvaluator& evaluate) {
    config.validate();
    NesStep step;
    {
        const std::vector<std::vector<double>> center{theta};
        auto reports = evaluate(center);
        if (reports.size() != 1) throw ConfigError("evaluator returned the wrong number of reports");
        step.center = std::move(reports[0]);
    }
    if (step.center.at_max) return step;

    const std::size_t n = theta.size();
    const std::size_t P = config.population;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> eps(P, std::vector<double>(n));
    for (auto& e : eps)
        for (auto& x : e) x = normal(rng);

    std::vector<std::vector<double>> offspring(P, theta);
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t k = 0; k < n; ++k) offspring[i][k] += config.sigma * eps[i][k];

    const auto reports = evaluate(offspring);
    if (reports.size() != P) throw ConfigError("evaluator returned the wrong number of reports");
    step.offspring_fitness.reserve(P);
    for (const auto& r : reports) step.offspring_fitness.push_back(r.fitness);
    const auto u = rank_transform(step.offspring_fitness);

    const double scale = config.learning_rate / (static_cast<double>(P) * config.sigma);
    std::vector<double> next(n);
    for (std::size_t k = 0; k < n; ++k) {
        double g = 0.0;
        for (std::size_t i = 0; i < P; ++i) g += u[i] * eps[i][k];
        next[k] = (theta[k] + scale * g) * config.weight_decay;
        if (!std::isfinite(next[k])) throw NumericError("genome became non-finite");
    }
    theta = std::move(next);
    step.updated = true;
    return step;
}

}  // namespace ncomp
