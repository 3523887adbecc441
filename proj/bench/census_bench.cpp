// Parallel census against the serial reference on the benchmark lengths.
#include "formation/equilibria.hpp"

#include <benchmark/benchmark.h>

using namespace formation;

namespace {

VectorFieldBundle fig2_bundle() {
    const num::Vector d{2.0, 2.6, 2.0, 3.3, 1.4};
    num::Vector sq(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) sq[i] = d[i] * d[i];
    return VectorFieldBundle(FormationGraph::two_cycles(), ControlLaw::builtin(LawName::gradient_squared),
                             TargetLengths::squared(sq));
}

CensusOptions options(const benchmark::State& state) {
    CensusOptions o;
    o.n_random = static_cast<std::size_t>(state.range(0));
    return o;
}

void BM_CensusParallel(benchmark::State& state) {
    const VectorFieldBundle b = fig2_bundle();
    const CensusOptions o = options(state);
    for (auto _ : state) benchmark::DoNotOptimize(census(b, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CensusSerial(benchmark::State& state) {
    const VectorFieldBundle b = fig2_bundle();
    const CensusOptions o = options(state);
    for (auto _ : state) benchmark::DoNotOptimize(census_serial(b, o));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CensusParallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CensusSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
