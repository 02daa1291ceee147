#include <benchmark/benchmark.h>

#include <filesystem>

#include "drivetel/ingest.hpp"
#include "drivetel/mapmatch.hpp"
#include "drivetel/synth.hpp"

namespace {

// Shared synthetic world: one generated dataset, network loaded once.
struct World {
    std::filesystem::path dir;
    drivetel::synth::DatasetSummary data;
    std::unique_ptr<drivetel::mapmatch::RoadNetwork> network;
    std::map<std::string, std::vector<drivetel::PhoneRecord>> trips;

    World() {
        dir = std::filesystem::temp_directory_path() / "drivetel_bench_world";
        drivetel::synth::SynthConfig cfg;
        cfg.n_trips = 8;
        cfg.write_truth_samples = false;
        data = drivetel::synth::generate_dataset(cfg, dir.string());
        network = std::make_unique<drivetel::mapmatch::RoadNetwork>(
            drivetel::mapmatch::load_network(data.network_path));
        for (const auto& r : drivetel::ingest::parse_phone_log(data.phone_path).records) {
            trips[r.trip_id].push_back(r);
        }
    }
};

const World& world() {
    static World w;
    return w;
}

void BM_candidates_near(benchmark::State& state) {
    const auto& w = world();
    const auto& records = w.trips.begin()->second;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& r = records[i++ % records.size()];
        benchmark::DoNotOptimize(
            w.network->candidates_near({r.latitude, r.longitude}, 50.0));
    }
}
BENCHMARK(BM_candidates_near);

void BM_hmm_match_trip(benchmark::State& state) {
    const auto& w = world();
    const auto& records = w.trips.begin()->second;
    const auto track = drivetel::mapmatch::track_from_phone(records);
    for (auto _ : state) {
        benchmark::DoNotOptimize(drivetel::mapmatch::hmm_match(track, *w.network));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<benchmark::IterationCount>(track.size()));
}
BENCHMARK(BM_hmm_match_trip);

}  // namespace

BENCHMARK_MAIN();
