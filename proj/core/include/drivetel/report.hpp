#ifndef DRIVETEL_REPORT_HPP
#define DRIVETEL_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "drivetel/evt.hpp"
#include "drivetel/ingest.hpp"
#include "drivetel/stats.hpp"

namespace drivetel::pipeline {

// Deterministic number formats shared by every text table. Means print with
// four decimals, trailing zeros trimmed ("0.746", "1285.8"); per-segment
// p-values print fixed four decimals ("0.0013"); global p-values scientific
// with three significant digits; return levels two decimals ("2.18").
std::string format_mean(double v);
std::string format_p_scientific(double p);
std::string format_p_fixed(double p);
std::string format_level(double v);
std::string format_percent(double v);  // "7.6%"
std::string format_ci(double lo, double hi);
std::string format_one_sided_ci(double bound, stats::Direction direction);

struct CleaningSummary {
    std::size_t phone_records_in = 0;
    std::size_t removed_speed_limits = 0;
    std::size_t removed_accel_limits = 0;
    std::size_t dropped_nonmonotonic = 0;
    std::size_t removed_zero_runs = 0;
    std::size_t pieces = 0;
    std::size_t smoothed_samples = 0;
};

struct MatchSummary {
    std::size_t fixes = 0;
    std::size_t matched = 0;
    std::size_t network_segments = 0;
    std::size_t network_active_segments = 0;
};

struct AlignSummary {
    std::size_t can_records = 0;
    std::size_t located_records = 0;
    double mean_abs_dt_s = 0.0;
};

struct AccelComparison {
    stats::MeansRow positive_means;
    stats::MeansRow negative_means;
    std::size_t zeros_discarded = 0;
    stats::WelchResult welch_positive;  // H1: mean(inactive) > mean(active)
    stats::WelchResult welch_negative;  // H1: mean(inactive) < mean(active)
    stats::KsResult ks_positive;        // D-: inactive CDF below active
    stats::KsResult ks_negative;        // D+: inactive CDF above active
};

struct CanChannelRow {
    std::string channel;
    stats::MeansRow means;
    double p_one_sided = 0.0;  // H1: mean(inactive) > mean(active)
};

// One tail side (acceleration, or deceleration fitted on magnitudes).
struct TailSide {
    double threshold = 0.0;  // common threshold on the fitted scale
    evt::GpdFit fit_active;
    evt::GpdFit fit_inactive;
    evt::TailComparison comparison;
    double sample_rate_hz = 0.0;
    evt::MeanExcessCurve mean_excess_active;
    evt::MeanExcessCurve mean_excess_inactive;
    bool negated = false;  // true for deceleration: levels render with a minus
};

struct RunParams {
    // Echoed stage parameters, keyed by flat name; values preformatted.
    std::vector<std::pair<std::string, std::string>> entries;
};

struct AnalysisReport {
    int schema_version = 1;
    RunParams params;
    ingest::IngestReport inventory;
    CleaningSummary cleaning;
    MatchSummary matching;
    AlignSummary alignment;
    AccelComparison accel;
    std::vector<CanChannelRow> can_means;
    stats::SegmentTests segment_tests;
    TailSide tail_positive;
    TailSide tail_negative;
    double return_period_s = 24.0;
    double mean_reduction_percent = 0.0;    // positive-acceleration means
    double return_reduction_percent = 0.0;  // positive-acceleration return levels

    // Plot data carried along so csv emission needs nothing else.
    std::map<std::string, std::vector<std::pair<double, double>>> ecdf_curves;
    std::map<std::string, std::vector<std::pair<double, std::size_t>>> histograms;
};

std::string render_text_report(const AnalysisReport& report);
std::string render_json_report(const AnalysisReport& report);

// format: "json", "table", "csv", or "all"; anything else is a ConfigError.
// Returns the list of files written (deterministic order).
std::vector<std::string> emit_report(const AnalysisReport& report, const std::string& out_dir,
                                     const std::string& format);

}  // namespace drivetel::pipeline

#endif
