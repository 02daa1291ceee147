#include <cmath>
#include <doctest.h>

#include "drivetel/errors.hpp"
#include "drivetel/evt.hpp"
#include "drivetel/ingest.hpp"
#include "drivetel/pipeline.hpp"
#include "drivetel/road_network.hpp"
#include "drivetel/stats.hpp"
#include "drivetel/synth.hpp"
#include "helpers.hpp"

#include <nlohmann/json.hpp>

using namespace drivetel;
using synth::Rng;
using synth::SynthConfig;

TEST_CASE("rng streams are deterministic and split independently") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng s1 = Rng::for_stream(42, 1);
    Rng s2 = Rng::for_stream(42, 2);
    Rng s1_again = Rng::for_stream(42, 1);
    CHECK(s1.next_u64() != s2.next_u64());
    Rng s1_ref = Rng::for_stream(42, 1);
    CHECK(s1_again.next_u64() == s1_ref.next_u64());
}

TEST_CASE("uniform stays in [0,1) and normal has the right moments") {
    Rng rng(7);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(std::fabs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("gpd inverse-cdf examples") {
    CHECK(synth::gpd_inverse_cdf(0.0, 1.0, 0.5) == 0.0);
    CHECK(synth::gpd_inverse_cdf(0.0, 1.0, 0.0) == 0.0);
    // U = 5/9 inverts the cdf example 1 - 1.5^-2 = 0.5556 exactly.
    CHECK(synth::gpd_inverse_cdf(5.0 / 9.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(synth::gpd_inverse_cdf(0.5556, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(synth::gpd_inverse_cdf(1.0, 1.0, 0.5), NumericError);
}

TEST_CASE("gpd sample mean approaches sigma/(1-xi)") {
    const auto sample = synth::sample_gpd(1000000, 1.0, 0.2, 97531);
    double sum = 0.0;
    for (double v : sample) sum += v;
    CHECK(sum / static_cast<double>(sample.size()) == doctest::Approx(1.25).epsilon(0.008));
}

TEST_CASE("sampler is self-consistent with the cdf (KS below 1% critical value)") {
    const std::size_t n = 10000;
    const auto sample = synth::sample_gpd(n, 1.0, 0.2, 13);
    evt::GpdFit fit;
    fit.u = 0.0;
    fit.sigma = 1.0;
    fit.xi = 0.2;
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double h = evt::gpd_cdf(sorted[i], fit);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        d = std::max({d, std::fabs(h - hi), std::fabs(h - lo)});
    }
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("group tail contrast: inactive 99th percentile dominates") {
    SynthConfig cfg;  // defaults carry xi_active=0.1, xi_inactive=0.2
    Rng rng_active(2020);
    Rng rng_inactive(2020);
    std::vector<double> active, inactive;
    for (int i = 0; i < 100000; ++i) {
        active.push_back(synth::draw_accel_magnitude(rng_active, cfg, true, false));
        inactive.push_back(synth::draw_accel_magnitude(rng_inactive, cfg, false, false));
    }
    CHECK(stats::quantile(inactive, 0.99) > stats::quantile(active, 0.99));
    CHECK(stats::mean(inactive) > stats::mean(active));
}

TEST_CASE("same seed gives byte-identical outputs") {
    SynthConfig cfg;
    cfg.n_trips = 4;
    cfg.trip_duration_min_s = 60.0;
    cfg.trip_duration_max_s = 120.0;
    cfg.n_segments = 60;

    testutil::TempDir dir_a("synth_a");
    testutil::TempDir dir_b("synth_b");
    const auto sa = synth::generate_dataset(cfg, dir_a.path().string());
    const auto sb = synth::generate_dataset(cfg, dir_b.path().string());
    CHECK(testutil::read_file(sa.phone_path) == testutil::read_file(sb.phone_path));
    CHECK(testutil::read_file(sa.can_path) == testutil::read_file(sb.can_path));
    CHECK(testutil::read_file(sa.network_path) == testutil::read_file(sb.network_path));
    CHECK(testutil::read_file(sa.truth_path) == testutil::read_file(sb.truth_path));

    // A different seed diverges.
    SynthConfig other = cfg;
    other.seed = cfg.seed + 1;
    testutil::TempDir dir_c("synth_c");
    const auto sc = synth::generate_dataset(other, dir_c.path().string());
    CHECK(testutil::read_file(sa.phone_path) != testutil::read_file(sc.phone_path));
}

TEST_CASE("phone deltas are exactly 1 s outside injected gaps") {
    SynthConfig cfg;
    cfg.n_trips = 2;
    cfg.trip_duration_min_s = 200.0;
    cfg.trip_duration_max_s = 300.0;
    testutil::TempDir dir("synth_rate");
    const auto summary = synth::generate_dataset(cfg, dir.path().string());
    const auto parsed = ingest::parse_phone_log(summary.phone_path);
    REQUIRE_FALSE(parsed.records.empty());
    std::map<std::string, std::vector<double>> per_trip;
    for (const auto& r : parsed.records) per_trip[r.trip_id].push_back(r.timestamp);
    for (auto& [trip, times] : per_trip) {
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double dt = times[i] - times[i - 1];
            const double frac = dt - std::floor(dt + 0.5);
            CHECK(std::fabs(frac) < 1e-9);  // whole seconds: 1 s or a gap
            CHECK(dt >= 1.0 - 1e-9);
        }
    }
}

TEST_CASE("generated data passes ingest and preprocess with zero integrity errors") {
    SynthConfig cfg;
    cfg.n_trips = 6;
    cfg.trip_duration_min_s = 120.0;
    cfg.trip_duration_max_s = 240.0;
    testutil::TempDir dir("synth_pipe");
    const auto summary = synth::generate_dataset(cfg, dir.path().string());

    const auto phone = ingest::parse_phone_log(summary.phone_path);
    const auto can = ingest::parse_can_log(summary.can_path);
    CHECK(can.unmapped_channels.empty());
    const auto trips = ingest::build_trips(phone.records, can.records);
    CHECK(trips.size() == cfg.n_trips);

    std::map<std::string, std::vector<Sample>> speed_by_trip;
    for (const auto& r : phone.records) {
        speed_by_trip[r.trip_id].push_back({r.timestamp, r.speed});
    }
    pipeline::PipelineConfig params;
    pipeline::CleanCounts counts;
    std::size_t pieces = 0;
    for (auto& [trip_id, samples] : speed_by_trip) {
        Trajectory traj;
        traj.trip_id = trip_id;
        traj.channel = Channel::speed;
        traj.samples = samples;
        for (const auto& piece : pipeline::preprocess_speed(traj, params, counts)) {
            validate_trajectory(piece.speed_clean);
            validate_trajectory(piece.accel);
            ++pieces;
        }
    }
    CHECK(pieces > 0);
    CHECK(counts.removed_speed_limits == 0);
}

TEST_CASE("ground-truth segments lie within the candidate radius of their fixes") {
    SynthConfig cfg;
    cfg.n_trips = 3;
    cfg.trip_duration_min_s = 60.0;
    cfg.trip_duration_max_s = 120.0;
    cfg.write_truth_samples = true;
    testutil::TempDir dir("synth_truth");
    const auto summary = synth::generate_dataset(cfg, dir.path().string());
    const auto network = mapmatch::load_network(summary.network_path);

    nlohmann::json truth;
    {
        std::ifstream in(summary.truth_path);
        in >> truth;
    }
    std::size_t checked = 0;
    for (const auto& trip : truth.at("trips")) {
        for (const auto& s : trip.at("samples")) {
            const double lat = s.at(1).get<double>();
            const double lon = s.at(2).get<double>();
            const std::string segment = s.at(3).get<std::string>();
            const auto candidates = network.candidates_near({lat, lon}, 50.0);
            bool found = false;
            for (const auto& c : candidates) {
                if (c.segment_id == segment) found = true;
            }
            CHECK(found);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("synth config invariants are enforced") {
    SynthConfig bad;
    bad.phone_rate_hz = 0.0;
    CHECK_THROWS_AS(synth::validate_synth_config(bad), ConfigError);
    bad = SynthConfig{};
    bad.xi_inactive = 1.0;
    CHECK_THROWS_AS(synth::validate_synth_config(bad), ConfigError);
    bad = SynthConfig{};
    bad.active_fraction = 1.5;
    CHECK_THROWS_AS(synth::validate_synth_config(bad), ConfigError);
}
