#ifndef DRIVETEL_EVT_HPP
#define DRIVETEL_EVT_HPP

#include <string>
#include <vector>

namespace drivetel::evt {

// Generalized Pareto fit above a threshold u:
//   H(a) = 1 - (1 + xi (a - u) / sigma)^(-1/xi),  xi -> 0: 1 - exp(-(a-u)/sigma)
struct GpdFit {
    double u = 0.0;             // threshold, channel units
    double sigma = 1.0;         // scale, > 0
    double xi = 0.0;            // shape
    double zeta_u = 0.0;        // exceedance rate, n_exceedances / total_count
    std::size_t n_exceedances = 0;
    double log_likelihood = 0.0;
    bool boundary_hit = false;  // optimizer landed on the xi search box edge
};

struct MeanExcessPoint {
    double threshold = 0.0;
    double mean_excess = 0.0;
    std::size_t count = 0;  // exceedances above the threshold
};

struct MeanExcessCurve {
    std::vector<MeanExcessPoint> points;  // ascending thresholds, count >= min_count
};

// Mean of (y - u) over y > u at each grid threshold; grid points with fewer
// than min_count exceedances are omitted.
MeanExcessCurve mean_excess_curve(const std::vector<double>& x,
                                  const std::vector<double>& threshold_grid,
                                  std::size_t min_count);

// Equispaced threshold grid between the lo_q and hi_q sample quantiles.
std::vector<double> make_threshold_grid(const std::vector<double>& x, std::size_t n_points,
                                        double lo_q, double hi_q);

// Least-squares slope of the curve (the GPD diagnostic: slope ~ xi/(1-xi)).
double mean_excess_slope(const MeanExcessCurve& curve);

// Maximum-likelihood (sigma, xi) over the exceedances y - u, xi confined to
// [-0.5, 1); Nelder-Mead from a moment-based start with the support
// constraint 1 + xi (y-u)/sigma > 0 enforced by penalty. Needs at least 30
// exceedances (DataError otherwise); a fit on the box edge sets boundary_hit.
GpdFit fit_gpd(const std::vector<double>& x, double u);

// Log-likelihood of exceedances z at (sigma, xi); -inf outside the support.
double gpd_log_likelihood(const std::vector<double>& exceedances, double sigma, double xi);

// H(a) for a >= u (throws NumericError below the threshold); clamped to [0,1].
double gpd_cdf(double a, const GpdFit& fit);

// Inverse of H for p in [0, 1).
double gpd_quantile(double p, const GpdFit& fit);

// Level exceeded once per `period_s` of observation at `sample_rate_hz`:
//   m = round(period * rate),  x_m = u + (sigma/xi) ((m zeta_u)^xi - 1)
// (xi = 0: u + sigma ln(m zeta_u)). Requires m * zeta_u > 1.
double return_level(const GpdFit& fit, double period_s, double sample_rate_hz);

// Return levels of two fits at a common threshold plus their ratio and the
// relative reduction (inactive - active) / inactive in percent.
struct TailComparison {
    double level_active = 0.0;
    double level_inactive = 0.0;
    double ratio = 1.0;              // inactive / active
    double reduction_percent = 0.0;  // (inactive - active) / inactive * 100
    std::string direction;           // "inactive", "active", or "equal"
};

TailComparison tail_compare(const GpdFit& active, const GpdFit& inactive, double period_s,
                            double sample_rate_hz);

}  // namespace drivetel::evt

#endif
