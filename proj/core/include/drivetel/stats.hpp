#ifndef DRIVETEL_STATS_HPP
#define DRIVETEL_STATS_HPP

#include <map>
#include <string>
#include <vector>

namespace drivetel::stats {

enum class SignClass { positive_acceleration, negative_acceleration, raw_channel };

// Active/inactive observation sets for one quantity.
struct GroupedSamples {
    std::vector<double> active;
    std::vector<double> inactive;
    std::string units;
    SignClass sign_class = SignClass::raw_channel;
};

enum class Direction { greater, less };

struct SignSplit {
    std::vector<double> positive;  // strictly > 0
    std::vector<double> negative;  // strictly < 0
    std::size_t zero_count = 0;    // discarded
};

SignSplit split_by_sign(const std::vector<double>& acceleration);

double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // unbiased, n-1
double quantile(std::vector<double> x, double p);      // linear interpolation

// Group means with a two-sided 95% Welch confidence interval for the
// difference mean(inactive) - mean(active). Throws DataError naming the empty
// group.
struct MeansRow {
    double mean_active = 0.0;
    double mean_inactive = 0.0;
    std::size_t n_active = 0;
    std::size_t n_inactive = 0;
    double diff_ci_low = 0.0;   // two-sided 95% CI for mean_inactive - mean_active
    double diff_ci_high = 0.0;
};

MeansRow group_means(const GroupedSamples& g);

// One-sided Welch two-sample t-test on the difference mean(a) - mean(b):
//   t  = (mean(a) - mean(b)) / sqrt(s_a^2/n_a + s_b^2/n_b)
//   df = Welch-Satterthwaite
// direction greater tests H1: mean(a) > mean(b); less tests H1: mean(a) <
// mean(b). The 95% one-sided confidence bound is for the same difference.
struct WelchResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double difference = 0.0;  // mean_a - mean_b
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value_one_sided = 0.0;
    double one_sided_ci_bound = 0.0;  // lower bound (greater) or upper bound (less)
    Direction direction = Direction::greater;
};

WelchResult welch_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                            Direction direction);

// Group-orientation wrapper: a = inactive, b = active, so the tested
// difference is mean(inactive) - mean(active).
WelchResult welch_one_sided(const GroupedSamples& g, Direction direction);

// Right-continuous empirical CDF; F(max) = 1, F below min = 0.
struct Ecdf {
    std::vector<double> points;     // sorted distinct sample values
    std::vector<double> cumulative; // fraction of samples <= points[i]

    double operator()(double t) const;
};

Ecdf ecdf(const std::vector<double>& x);

// One-sided two-sample Kolmogorov-Smirnov over samples (a, b):
//   d_plus  = sup_t (F_a(t) - F_b(t)),  d_minus = sup_t (F_b(t) - F_a(t)),
// computed exactly over the pooled sample points. One-sided p-value is the
// asymptotic bound exp(-2 d^2 m n / (m + n)), floored at the smallest normal
// double (p_floored flags the floor).
struct KsResult {
    double d_plus = 0.0;
    double d_minus = 0.0;
    double p_value_one_sided = 0.0;
    bool p_floored = false;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    Direction direction = Direction::greater;
};

KsResult ks_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                      Direction direction);

// Group-orientation wrapper: a = inactive, b = active.
KsResult ks_one_sided(const GroupedSamples& g, Direction direction);

// Per-road-segment Welch tests (one-sided, mean(inactive) > mean(active)).
// Only segments with both group counts >= min_count are tested; rows sort by
// total observation count descending (ties by segment id).
struct SegmentTestRow {
    std::string segment_id;
    double mean_inactive = 0.0;
    std::size_t n_inactive = 0;
    double mean_active = 0.0;
    std::size_t n_active = 0;
    double p_value = 0.0;
};

struct SegmentTests {
    std::vector<SegmentTestRow> rows;
    std::size_t skipped = 0;  // segments below min_count in either group
};

SegmentTests per_segment_tests(const std::map<std::string, GroupedSamples>& by_segment,
                               std::size_t min_count);

}  // namespace drivetel::stats

#endif
