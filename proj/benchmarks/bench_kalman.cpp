#include <benchmark/benchmark.h>

#include "drivetel/kalman.hpp"
#include "drivetel/rng.hpp"

namespace {

drivetel::Trajectory noisy_speed(std::size_t n) {
    drivetel::synth::Rng rng(7);
    drivetel::Trajectory traj;
    traj.channel = drivetel::Channel::speed;
    double v = 10.0;
    for (std::size_t i = 0; i < n; ++i) {
        v = std::max(0.0, v + rng.normal(0.0, 0.5));
        traj.samples.push_back({static_cast<double>(i), v + rng.normal(0.0, 1.0)});
    }
    return traj;
}

void BM_kalman_smooth(benchmark::State& state) {
    const auto traj = noisy_speed(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(drivetel::prep::kalman_smooth(traj));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_kalman_smooth)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace
