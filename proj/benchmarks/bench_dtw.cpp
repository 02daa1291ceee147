#include <benchmark/benchmark.h>

#include "drivetel/dtw.hpp"
#include "drivetel/rng.hpp"

namespace {

std::vector<double> timestamps(std::size_t n, double rate_hz, std::uint64_t seed) {
    drivetel::synth::Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t += 1.0 / rate_hz + rng.uniform(-0.02, 0.02);
        out.push_back(t);
    }
    return out;
}

void BM_dtw_full(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto can = timestamps(3 * n, 3.0, 1);
    const auto phone = timestamps(n, 1.0, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(drivetel::align::dtw_align(can, phone));
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(3 * n * n));
}
BENCHMARK(BM_dtw_full)->Arg(100)->Arg(400)->Arg(1600)->Complexity(benchmark::oN);

void BM_dtw_banded_30s(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto can = timestamps(3 * n, 3.0, 1);
    const auto phone = timestamps(n, 1.0, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(drivetel::align::dtw_align(can, phone, 30.0));
    }
}
BENCHMARK(BM_dtw_banded_30s)->Arg(400)->Arg(1600)->Arg(6400);

}  // namespace
