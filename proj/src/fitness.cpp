#include "ncomp/fitness.hpp"

#include "ncomp/errors.hpp"

namespace ncomp {

namespace {

// sum over scored steps of op_ok + 2 dm_ok, and the normalising length.
std::pair<double, std::size_t> weighted_hits(const std::vector<StepHit>& hits, std::size_t expected) {
    double sum = 0.0;
    bool mistake = false;
    for (const auto& h : hits) {
        sum += (h.op_ok ? 1.0 : 0.0) + (h.dm_ok ? 2.0 : 0.0);
        if (!h.ok()) {
            mistake = true;
            break;
        }
    }
    std::size_t length = expected;
    if (mistake) {
        length = 0;
        for (const auto& h : hits) {
            ++length;
            if (!h.ok()) break;
        }
    }
    return {sum, length};
}

FitnessReport combine(TaskKind kind, std::vector<SampleFitness> samples) {
    if (samples.empty()) throw ConfigError("fitness of an empty batch");
    FitnessReport r;
    r.kind = kind;
    double sum_e = 0.0, sum_total = 0.0;
    for (const auto& s : samples) {
        sum_e += s.f_e;
        sum_total += s.f_e + s.f_b;
    }
    const double n = static_cast<double>(samples.size());
    r.mean_f_e = sum_e / n;
    r.fitness = r.mean_f_e < 100.0 ? r.mean_f_e : sum_total / n;
    r.at_max = r.fitness >= max_fitness(kind);
    r.samples = std::move(samples);
    return r;
}

}  // namespace

double max_fitness(TaskKind kind) { return kind == TaskKind::search ? kMaxSearchFitness : kMaxPlanFitness; }

std::vector<std::size_t> FitnessReport::failed() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!samples[i].perfect) out.push_back(i);
    return out;
}

double exploration_fitness(const EpisodeScore& score) {
    if (score.explore_expected == 0) throw ConfigError("episode score without exploration steps");
    const auto [sum, length] = weighted_hits(score.explore, score.explore_expected);
    return 100.0 * sum / (3.0 * static_cast<double>(length));
}

FitnessReport fitness_search(std::span<const EpisodeScore> episodes) {
    std::vector<SampleFitness> samples;
    samples.reserve(episodes.size());
    for (const auto& e : episodes) {
        SampleFitness s;
        s.f_e = exploration_fitness(e);
        s.f_b = e.nop_ok.value_or(false) ? 20.0 : 0.0;
        s.first_mistake = e.first_mistake();
        s.perfect = e.perfect();
        samples.push_back(s);
    }
    return combine(TaskKind::search, std::move(samples));
}

FitnessReport fitness_plan(std::span<const EpisodeScore> episodes) {
    std::vector<SampleFitness> samples;
    samples.reserve(episodes.size());
    for (const auto& e : episodes) {
        SampleFitness s;
        s.f_e = exploration_fitness(e);
        if (e.backtrack_expected == 0) throw ConfigError("plan score without backtrack steps");
        const auto [sum, length] = weighted_hits(e.backtrack, e.backtrack_expected);
        s.f_b = 50.0 * sum / (3.0 * static_cast<double>(length));
        s.first_mistake = e.first_mistake();
        s.perfect = e.perfect();
        samples.push_back(s);
    }
    return combine(TaskKind::plan, std::move(samples));
}

FitnessReport fitness(TaskKind kind, std::span<const EpisodeScore> episodes) {
    return kind == TaskKind::search ? fitness_search(episodes) : fitness_plan(episodes);
}

}  // namespace ncomp
