// Serial reference vs OpenMP versions of the hot loops: offspring fitness
// evaluation, autonomous episode batches and content lookup.
#include <benchmark/benchmark.h>

#include <random>

#include "ncomp/memory.hpp"
#include "ncomp/population.hpp"
#include "ncomp/reference_program.hpp"

using namespace ncomp;

namespace {

struct Fixture {
    std::shared_ptr<const SokobanDomain> domain = std::make_shared<SokobanDomain>(6);
    std::shared_ptr<const DataModules> modules = make_oracle_modules(domain);
    std::vector<ScoredTask> tasks;
    std::vector<std::vector<double>> genomes;

    explicit Fixture(std::size_t level) {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 20; ++i) tasks.push_back(make_scored_task(*domain, sample_task(*domain, rng, level), TaskKind::plan));
        // Reference weights plus small perturbations: long, realistic episodes.
        const auto ref = reference_genome().values;
        std::normal_distribution<double> n(0.0, 0.01);
        for (int p = 0; p < 20; ++p) {
            auto g = ref;
            for (auto& x : g) x += n(rng);
            genomes.push_back(std::move(g));
        }
    }
    EvalContext ctx() const { return {modules.get(), {}, TaskKind::plan}; }
};

void BM_PopulationSerial(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_population_serial(f.genomes, f.tasks, f.ctx()));
}

void BM_PopulationParallel(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_population(f.genomes, f.tasks, f.ctx()));
}

void BM_BatchSerial(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    ReferenceProgram core;
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(core, f.tasks, f.ctx()));
}

void BM_BatchParallel(benchmark::State& state) {
    Fixture f(static_cast<std::size_t>(state.range(0)));
    ReferenceProgram core;
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(core, f.tasks, f.ctx()));
}

DualMemory filled_memory(std::size_t rows) {
    DualMemory m(4);
    std::mt19937_64 rng(3);
    const std::uint8_t d[4] = {0, 1, 0, 1};
    for (std::size_t r = 0; r < rows; ++r) m.allocate_and_write(d, static_cast<CompWord>(1u << (rng() % 5)));
    return m;
}

void BM_ContentLookupScan(benchmark::State& state) {
    const auto m = filled_memory(static_cast<std::size_t>(state.range(0)));
    const CompReals key{-1, -1, 1, -1, -1, -1, -1, -1};
    for (auto _ : state) benchmark::DoNotOptimize(m.content_lookup_scan(key));
}

void BM_ContentLookupIndexed(benchmark::State& state) {
    const auto m = filled_memory(static_cast<std::size_t>(state.range(0)));
    const CompReals key{-1, -1, 1, -1, -1, -1, -1, -1};
    for (auto _ : state) benchmark::DoNotOptimize(m.content_lookup(key));
}

}  // namespace

BENCHMARK(BM_PopulationSerial)->Arg(3)->Arg(21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PopulationParallel)->Arg(3)->Arg(21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchSerial)->Arg(21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContentLookupScan)->Arg(100)->Arg(10000)->Arg(300000);
BENCHMARK(BM_ContentLookupIndexed)->Arg(100)->Arg(10000)->Arg(300000);

BENCHMARK_MAIN();
