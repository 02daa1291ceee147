#include <benchmark/benchmark.h>

#include "drivetel/evt.hpp"
#include "drivetel/synth.hpp"

namespace {

void BM_fit_gpd(benchmark::State& state) {
    const auto sample =
        drivetel::synth::sample_gpd(static_cast<std::size_t>(state.range(0)), 1.0, 0.2, 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(drivetel::evt::fit_gpd(sample, 0.0));
    }
}
BENCHMARK(BM_fit_gpd)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_mean_excess_curve(benchmark::State& state) {
    const auto sample =
        drivetel::synth::sample_gpd(static_cast<std::size_t>(state.range(0)), 1.0, 0.2, 42);
    const auto grid = drivetel::evt::make_threshold_grid(sample, 25, 0.5, 0.98);
    for (auto _ : state) {
        benchmark::DoNotOptimize(drivetel::evt::mean_excess_curve(sample, grid, 30));
    }
}
BENCHMARK(BM_mean_excess_curve)->Arg(10000)->Arg(100000);

}  // namespace
