#ifndef DRIVETEL_PIPELINE_HPP
#define DRIVETEL_PIPELINE_HPP

#include <string>

#include "drivetel/ingest.hpp"
#include "drivetel/kalman.hpp"
#include "drivetel/mapmatch.hpp"
#include "drivetel/preprocess.hpp"
#include "drivetel/report.hpp"

namespace drivetel::pipeline {

// Full configuration of the end-to-end run; every stage default overridable.
struct PipelineConfig {
    std::string phone_path;
    std::string can_path;
    std::string network_path;
    std::string out_dir;
    std::string report_format = "all";  // json | table | csv | all

    // ingest
    double gap_threshold_s = 5.0;
    double frequency_bin_hz = 0.25;
    double gap_bin_s = 5.0;
    char delimiter = ',';

    // preprocess
    prep::PhysicalLimits limits;
    double max_gap_s = 5.0;
    double min_zero_run_s = 3.0;
    prep::SmootherConfig smoother;

    // mapmatch
    mapmatch::HmmParams hmm;

    // align
    double dtw_band_s = 30.0;
    std::size_t dtw_max_cells = 50'000'000;

    // stats
    std::size_t min_segment_count = 100;
    std::size_t max_segment_rows = 10;
    double accel_hist_bin = 0.1;

    // evt
    double threshold_quantile = 0.90;
    double return_period_s = 24.0;
    std::size_t mean_excess_grid_points = 25;
    double mean_excess_hi_quantile = 0.98;
    std::size_t mean_excess_min_count = 30;
};

// Reads a flat JSON object of overrides; unknown keys are ConfigErrors.
PipelineConfig load_pipeline_config(const std::string& path, PipelineConfig base = {});

// One cleaned-and-smoothed piece of a speed trajectory.
struct CleanedPiece {
    Trajectory speed_clean;
    Trajectory speed_smooth;
    Trajectory accel;  // smoothed acceleration after physical limits
};

struct CleanCounts {
    std::size_t removed_speed_limits = 0;
    std::size_t removed_accel_limits = 0;
    std::size_t dropped_nonmonotonic = 0;
    std::size_t removed_zero_runs = 0;
    std::size_t smoothed_samples = 0;
};

// limits -> gap split -> zero-run trim -> gap re-split -> Kalman smooth.
// Pieces shorter than two samples are dropped.
std::vector<CleanedPiece> preprocess_speed(const Trajectory& speed, const PipelineConfig& config,
                                           CleanCounts& counts);

// Smoothed acceleration samples restricted to active segments, grouped by the
// trip condition flag. Used by the standalone analyze/evt commands.
struct AccelSamples {
    std::vector<double> active;
    std::vector<double> inactive;
    std::vector<double> deltas;  // consecutive same-trip timestamp deltas
};

AccelSamples collect_active_segment_accel(
    const std::vector<prep::TrajectoryRecord>& records,
    const std::map<std::string, mapmatch::MatchResult>& matches,
    const mapmatch::RoadNetwork& network,
    std::map<std::string, stats::GroupedSamples>* positive_by_segment);

// Common threshold pick, per-group GPD fits, mean-excess curves, and the
// return-level comparison for one tail (set negated for deceleration
// magnitudes).
TailSide analyze_tail_side(const std::vector<double>& active,
                           const std::vector<double>& inactive, double threshold_quantile,
                           double period_s, double rate_hz, const PipelineConfig& config,
                           bool negated);

// ingest -> preprocess -> mapmatch -> align -> active-segment filter ->
// stats -> evt. Errors propagate with a "<stage>: " message prefix and keep
// their type (ConfigError/DataError/NumericError) for exit-code mapping.
// Deterministic: the report is a pure function of inputs and config (no
// wall-clock content).
AnalysisReport run_pipeline(const PipelineConfig& config);

// Machine-readable failure record (error.json) for nonzero exits.
void write_error_record(const std::string& out_dir, const std::string& stage,
                        const std::string& message, int exit_code);

}  // namespace drivetel::pipeline

#endif
