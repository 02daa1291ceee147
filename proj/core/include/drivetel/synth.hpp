#ifndef DRIVETEL_SYNTH_HPP
#define DRIVETEL_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "drivetel/rng.hpp"

namespace drivetel::synth {

// Deterministic generator of field-study-shaped phone/CAN/network datasets with
// controllable group-level tail behaviour. Streams split per trip, so output
// is a pure function of the config.
struct SynthConfig {
    std::uint64_t seed = 42;
    std::size_t n_drivers = 8;
    std::size_t n_trips = 40;
    double trip_duration_min_s = 300.0;
    double trip_duration_max_s = 600.0;
    double phone_rate_hz = 1.0;
    double can_rate_hz = 3.0;

    // Grid road network around the base coordinate; the central
    // `active_fraction` of segments carries signal information.
    std::size_t n_segments = 420;
    double active_fraction = 0.4;
    double segment_spacing_m = 250.0;
    double base_lat = 37.33;
    double base_lon = -121.89;

    // Group effect: the active group's acceleration-event magnitudes are
    // shifted by mean_shift_mps2 and its tail uses xi_active.
    double mean_shift_mps2 = -0.02;
    double xi_active = 0.1;
    double xi_inactive = 0.2;
    double tail_sigma = 0.35;        // GPD scale of the event tail
    double tail_probability = 0.10;  // chance an event draws a tail excess

    // Stop-and-go drive cycle phases.
    double base_accel_min = 0.3;
    double base_accel_max = 1.2;
    double base_decel_min = 0.35;
    double base_decel_max = 1.3;
    double cruise_speed_min = 8.0;
    double cruise_speed_max = 18.0;
    double cruise_duration_min_s = 20.0;
    double cruise_duration_max_s = 60.0;
    double dwell_min_s = 5.0;
    double dwell_max_s = 30.0;
    double accel_cap_mps2 = 3.8;  // keeps events inside the physical limits

    // Measurement noise.
    double gps_sigma_m = 5.0;
    double speed_sigma_mps = 0.5;

    // Missing-data model: Poisson gap starts; phone gap durations are
    // shifted-exponential, CAN durations shifted-GPD (heavy tail).
    double phone_gap_rate_per_s = 1.0 / 180.0;
    double can_gap_rate_per_s = 1.0 / 120.0;
    double gap_min_s = 6.0;
    double phone_gap_mean_extra_s = 8.0;
    double can_gap_sigma_s = 8.0;
    double can_gap_xi = 0.35;

    bool write_truth_samples = true;
    double start_epoch_s = 1473724800.0;  // trips staggered from here
};

// Throws ConfigError on invariant violations (rates > 0, xi < 1, fraction in
// [0,1], ...).
void validate_synth_config(const SynthConfig& config);

// One acceleration-event magnitude for the given group (exposed so the group
// tail contrast can be measured directly).
double draw_accel_magnitude(Rng& rng, const SynthConfig& config, bool active, bool decel);

struct DatasetSummary {
    std::string phone_path;
    std::string can_path;
    std::string network_path;
    std::string truth_path;
    std::size_t n_phone_records = 0;
    std::size_t n_can_records = 0;
    std::size_t n_segments = 0;
    std::size_t n_active_segments = 0;
};

// Writes phone.csv, can.csv, network.json, and truth.json under out_dir.
DatasetSummary generate_dataset(const SynthConfig& config, const std::string& out_dir);

// Inverse-transform GPD sample of length n (threshold 0).
std::vector<double> sample_gpd(std::size_t n, double sigma, double xi, std::uint64_t seed);

}  // namespace drivetel::synth

#endif
