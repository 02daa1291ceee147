#include "drivetel/evt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "drivetel/errors.hpp"
#include "drivetel/stats.hpp"

namespace drivetel::evt {

namespace {

constexpr double kXiLow = -0.5;
constexpr double kXiHigh = 1.0;
constexpr double kXiZeroEps = 1e-8;

// 2-D Nelder-Mead, minimizing. Returns the best vertex.
template <typename F>
std::pair<std::array<double, 2>, double> nelder_mead(F f, std::array<double, 2> start,
                                                     std::array<double, 2> step,
                                                     double f_tol, int max_iter) {
    struct Vertex {
        std::array<double, 2> x;
        double fx;
    };
    std::array<Vertex, 3> simplex;
    simplex[0] = {start, f(start)};
    simplex[1] = {{start[0] + step[0], start[1]}, 0.0};
    simplex[1].fx = f(simplex[1].x);
    simplex[2] = {{start[0], start[1] + step[1]}, 0.0};
    simplex[2].fx = f(simplex[2].x);

    auto order = [&] {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    };
    order();

    for (int iter = 0; iter < max_iter; ++iter) {
        if (std::fabs(simplex[2].fx - simplex[0].fx) <
            f_tol * (1.0 + std::fabs(simplex[0].fx))) {
            break;
        }
        const std::array<double, 2> centroid = {0.5 * (simplex[0].x[0] + simplex[1].x[0]),
                                                0.5 * (simplex[0].x[1] + simplex[1].x[1])};
        auto affine = [&](double coef) -> std::array<double, 2> {
            return {centroid[0] + coef * (centroid[0] - simplex[2].x[0]),
                    centroid[1] + coef * (centroid[1] - simplex[2].x[1])};
        };

        const auto reflected = affine(1.0);
        const double f_reflected = f(reflected);
        if (f_reflected < simplex[0].fx) {
            const auto expanded = affine(2.0);
            const double f_expanded = f(expanded);
            simplex[2] = f_expanded < f_reflected ? Vertex{expanded, f_expanded}
                                                  : Vertex{reflected, f_reflected};
        } else if (f_reflected < simplex[1].fx) {
            simplex[2] = {reflected, f_reflected};
        } else {
            const auto contracted = affine(-0.5);
            const double f_contracted = f(contracted);
            if (f_contracted < simplex[2].fx) {
                simplex[2] = {contracted, f_contracted};
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i].x = {0.5 * (simplex[i].x[0] + simplex[0].x[0]),
                                    0.5 * (simplex[i].x[1] + simplex[0].x[1])};
                    simplex[i].fx = f(simplex[i].x);
                }
            }
        }
        order();
    }
    return {simplex[0].x, simplex[0].fx};
}

}  // namespace

double gpd_log_likelihood(const std::vector<double>& exceedances, double sigma, double xi) {
    if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(exceedances.size());
    if (std::fabs(xi) < kXiZeroEps) {
        double sum = 0.0;
        for (double z : exceedances) sum += z;
        return -n * std::log(sigma) - sum / sigma;
    }
    double sum = 0.0;
    for (double z : exceedances) {
        const double arg = 1.0 + xi * z / sigma;
        if (arg <= 0.0) return -std::numeric_limits<double>::infinity();
        sum += std::log(arg);
    }
    return -n * std::log(sigma) - (1.0 + 1.0 / xi) * sum;
}

GpdFit fit_gpd(const std::vector<double>& x, double u) {
    std::vector<double> exceedances;
    for (double v : x) {
        if (v > u) exceedances.push_back(v - u);
    }
    if (exceedances.size() < 30) {
        throw DataError("fit_gpd: needs at least 30 exceedances above u=" + std::to_string(u) +
                        ", got " + std::to_string(exceedances.size()));
    }

    // Moment start (Hosking-Wallis), clamped into the search box.
    const double m = stats::mean(exceedances);
    const double v = stats::sample_variance(exceedances);
    double xi0 = v > 0.0 ? 0.5 * (1.0 - m * m / v) : 0.0;
    double sigma0 = v > 0.0 ? 0.5 * m * (m * m / v + 1.0) : m;
    xi0 = std::clamp(xi0, kXiLow + 0.05, kXiHigh - 0.1);
    if (!(sigma0 > 0.0)) sigma0 = m;

    auto objective = [&](const std::array<double, 2>& p) {
        const double sigma = std::exp(p[0]);
        const double xi = p[1];
        double penalty = 0.0;
        if (xi < kXiLow) penalty += 1e12 + 1e8 * (kXiLow - xi);
        if (xi >= kXiHigh) penalty += 1e12 + 1e8 * (xi - kXiHigh);
        if (penalty > 0.0) return penalty;
        const double ll = gpd_log_likelihood(exceedances, sigma, xi);
        if (!std::isfinite(ll)) {
            // Outside the support; slope the penalty toward feasibility.
            double worst = 0.0;
            for (double z : exceedances) {
                worst = std::min(worst, 1.0 + xi * z / sigma);
            }
            return 1e12 - 1e8 * worst;
        }
        return -ll;
    };

    std::array<double, 2> best = {std::log(sigma0), xi0};
    double best_f = objective(best);
    std::array<double, 2> step = {0.3, 0.2};
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto [p, fp] = nelder_mead(objective, best, step, 1e-12, 600);
        if (fp < best_f) {
            best = p;
            best_f = fp;
        }
        step = {0.05, 0.05};  // restart tighter around the incumbent
    }

    GpdFit fit;
    fit.u = u;
    fit.sigma = std::exp(best[0]);
    fit.xi = best[1];
    fit.n_exceedances = exceedances.size();
    fit.zeta_u = static_cast<double>(exceedances.size()) / static_cast<double>(x.size());
    fit.log_likelihood = -best_f;
    fit.boundary_hit = fit.xi < kXiLow + 1e-6 || fit.xi > kXiHigh - 1e-6;
    return fit;
}

double gpd_cdf(double a, const GpdFit& fit) {
    if (a < fit.u) {
        throw NumericError("gpd_cdf: value below threshold u=" + std::to_string(fit.u));
    }
    const double z = a - fit.u;
    double h;
    if (std::fabs(fit.xi) < kXiZeroEps) {
        h = 1.0 - std::exp(-z / fit.sigma);
    } else {
        const double arg = 1.0 + fit.xi * z / fit.sigma;
        h = arg <= 0.0 ? 1.0 : 1.0 - std::pow(arg, -1.0 / fit.xi);
    }
    return std::clamp(h, 0.0, 1.0);
}

double gpd_quantile(double p, const GpdFit& fit) {
    if (p < 0.0 || p >= 1.0) throw NumericError("gpd_quantile: p must be in [0,1)");
    if (std::fabs(fit.xi) < kXiZeroEps) {
        return fit.u - fit.sigma * std::log1p(-p);
    }
    return fit.u + fit.sigma / fit.xi * (std::pow(1.0 - p, -fit.xi) - 1.0);
}

double return_level(const GpdFit& fit, double period_s, double sample_rate_hz) {
    if (!(fit.sigma > 0.0)) throw NumericError("return_level: sigma must be positive");
    // round-half-up observation count
    const double m = std::floor(period_s * sample_rate_hz + 0.5);
    const double mz = m * fit.zeta_u;
    if (mz <= 1.0) {
        throw NumericError("return_level: level below threshold (m*zeta_u = " +
                           std::to_string(mz) + " <= 1)");
    }
    if (std::fabs(fit.xi) < kXiZeroEps) {
        return fit.u + fit.sigma * std::log(mz);
    }
    return fit.u + fit.sigma / fit.xi * (std::pow(mz, fit.xi) - 1.0);
}

TailComparison tail_compare(const GpdFit& active, const GpdFit& inactive, double period_s,
                            double sample_rate_hz) {
    const double scale = std::max({std::fabs(active.u), std::fabs(inactive.u), 1.0});
    if (std::fabs(active.u - inactive.u) > 1e-9 * scale) {
        throw DataError("tail_compare: fits use different thresholds");
    }
    TailComparison cmp;
    cmp.level_active = return_level(active, period_s, sample_rate_hz);
    cmp.level_inactive = return_level(inactive, period_s, sample_rate_hz);
    cmp.ratio = cmp.level_inactive / cmp.level_active;
    cmp.reduction_percent =
        (cmp.level_inactive - cmp.level_active) / cmp.level_inactive * 100.0;
    const double rel_diff = std::fabs(cmp.level_inactive - cmp.level_active) /
                            std::max(std::fabs(cmp.level_inactive), 1e-300);
    if (rel_diff < 1e-12) {
        cmp.direction = "equal";
    } else {
        cmp.direction = cmp.level_inactive > cmp.level_active ? "inactive" : "active";
    }
    return cmp;
}

MeanExcessCurve mean_excess_curve(const std::vector<double>& x,
                                  const std::vector<double>& threshold_grid,
                                  std::size_t min_count) {
    if (x.empty()) throw DataError("mean_excess_curve: empty sample");
    MeanExcessCurve curve;
    for (double u : threshold_grid) {
        double sum = 0.0;
        std::size_t count = 0;
        for (double v : x) {
            if (v > u) {
                sum += v - u;
                ++count;
            }
        }
        if (count >= std::max<std::size_t>(min_count, 1)) {
            curve.points.push_back({u, sum / static_cast<double>(count), count});
        }
    }
    return curve;
}

std::vector<double> make_threshold_grid(const std::vector<double>& x, std::size_t n_points,
                                        double lo_q, double hi_q) {
    if (n_points < 2) throw ConfigError("threshold grid needs at least 2 points");
    const double lo = stats::quantile(x, lo_q);
    const double hi = stats::quantile(x, hi_q);
    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
    }
    return grid;
}

double mean_excess_slope(const MeanExcessCurve& curve) {
    if (curve.points.size() < 2) {
        throw DataError("mean_excess_slope: needs at least 2 curve points");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(curve.points.size());
    for (const auto& p : curve.points) {
        sx += p.threshold;
        sy += p.mean_excess;
        sxx += p.threshold * p.threshold;
        sxy += p.threshold * p.mean_excess;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NumericError("mean_excess_slope: degenerate grid");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace drivetel::evt
