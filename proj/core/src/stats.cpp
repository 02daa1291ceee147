#include "drivetel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drivetel/errors.hpp"
#include "drivetel/special_functions.hpp"

namespace drivetel::stats {

SignSplit split_by_sign(const std::vector<double>& acceleration) {
    SignSplit out;
    for (double a : acceleration) {
        if (a > 0.0) {
            out.positive.push_back(a);
        } else if (a < 0.0) {
            out.negative.push_back(a);
        } else {
            ++out.zero_count;
        }
    }
    return out;
}

double mean(const std::vector<double>& x) {
    if (x.empty()) throw DataError("mean of empty sample");
    double sum = 0.0;
    for (double v : x) sum += v;
    return sum / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
    if (x.size() < 2) throw DataError("sample_variance needs at least 2 values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw DataError("quantile of empty sample");
    if (p < 0.0 || p > 1.0) throw ConfigError("quantile level must be in [0,1]");
    std::sort(x.begin(), x.end());
    const double idx = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(idx);
    if (lo + 1 >= x.size()) return x.back();
    const double frac = idx - static_cast<double>(lo);
    return x[lo] * (1.0 - frac) + x[lo + 1] * frac;
}

namespace {

struct WelchPieces {
    double diff = 0.0;
    double se = 0.0;
    double df = 0.0;
};

WelchPieces welch_pieces(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    WelchPieces p;
    p.diff = mean(a) - mean(b);
    p.se = std::sqrt(va + vb);
    if (va + vb > 0.0) {
        p.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    }
    return p;
}

}  // namespace

WelchResult welch_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                            Direction direction) {
    if (a.size() < 2 || b.size() < 2) {
        throw DataError("welch_one_sided needs at least 2 values per group");
    }
    const WelchPieces pieces = welch_pieces(a, b);

    WelchResult result;
    result.mean_a = mean(a);
    result.mean_b = mean(b);
    result.difference = pieces.diff;
    result.direction = direction;

    if (pieces.se == 0.0) {
        if (pieces.diff == 0.0) {
            throw DataError("welch_one_sided: zero variance in both groups with equal means");
        }
        // Zero variance but distinct means: the difference is certain.
        result.t_statistic = pieces.diff > 0.0 ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity();
        result.degrees_of_freedom = static_cast<double>(a.size() + b.size() - 2);
        const bool consistent =
            (direction == Direction::greater) == (pieces.diff > 0.0);
        result.p_value_one_sided = consistent ? 0.0 : 1.0;
        result.one_sided_ci_bound = pieces.diff;
        return result;
    }

    result.t_statistic = pieces.diff / pieces.se;
    result.degrees_of_freedom = pieces.df;
    const double cdf = student_t_cdf(result.t_statistic, pieces.df);
    result.p_value_one_sided = direction == Direction::greater ? 1.0 - cdf : cdf;
    const double t_crit = student_t_quantile(0.95, pieces.df);
    result.one_sided_ci_bound = direction == Direction::greater
                                    ? pieces.diff - t_crit * pieces.se
                                    : pieces.diff + t_crit * pieces.se;
    return result;
}

WelchResult welch_one_sided(const GroupedSamples& g, Direction direction) {
    return welch_one_sided(g.inactive, g.active, direction);
}

MeansRow group_means(const GroupedSamples& g) {
    if (g.active.empty()) throw DataError("group_means: active group is empty");
    if (g.inactive.empty()) throw DataError("group_means: inactive group is empty");

    MeansRow row;
    row.mean_active = mean(g.active);
    row.mean_inactive = mean(g.inactive);
    row.n_active = g.active.size();
    row.n_inactive = g.inactive.size();

    const double diff = row.mean_inactive - row.mean_active;
    if (g.active.size() >= 2 && g.inactive.size() >= 2) {
        const WelchPieces pieces = welch_pieces(g.inactive, g.active);
        if (pieces.se > 0.0) {
            const double t_crit = student_t_quantile(0.975, pieces.df);
            row.diff_ci_low = diff - t_crit * pieces.se;
            row.diff_ci_high = diff + t_crit * pieces.se;
            return row;
        }
    }
    row.diff_ci_low = row.diff_ci_high = diff;
    return row;
}

double Ecdf::operator()(double t) const {
    auto it = std::upper_bound(points.begin(), points.end(), t);
    if (it == points.begin()) return 0.0;
    return cumulative[static_cast<std::size_t>(it - points.begin()) - 1];
}

Ecdf ecdf(const std::vector<double>& x) {
    if (x.empty()) throw DataError("ecdf of empty sample");
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());

    Ecdf out;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        out.points.push_back(sorted[i]);
        out.cumulative.push_back(static_cast<double>(i + 1) / n);
    }
    return out;
}

KsResult ks_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                      Direction direction) {
    if (a.empty() || b.empty()) throw DataError("ks_one_sided: empty group");

    std::vector<double> sa = a;
    std::vector<double> sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    KsResult result;
    result.n_a = a.size();
    result.n_b = b.size();
    result.direction = direction;

    const double m = static_cast<double>(sa.size());
    const double n = static_cast<double>(sb.size());
    std::size_t ia = 0;
    std::size_t ib = 0;
    while (ia < sa.size() || ib < sb.size()) {
        const double v = (ib >= sb.size() || (ia < sa.size() && sa[ia] <= sb[ib])) ? sa[ia]
                                                                                   : sb[ib];
        while (ia < sa.size() && sa[ia] <= v) ++ia;
        while (ib < sb.size() && sb[ib] <= v) ++ib;
        const double fa = static_cast<double>(ia) / m;
        const double fb = static_cast<double>(ib) / n;
        result.d_plus = std::max(result.d_plus, fa - fb);
        result.d_minus = std::max(result.d_minus, fb - fa);
    }

    const double d = direction == Direction::greater ? result.d_plus : result.d_minus;
    const double log_p = -2.0 * d * d * m * n / (m + n);
    double p = std::exp(log_p);
    const double floor = std::numeric_limits<double>::min();
    if (p < floor) {
        p = floor;
        result.p_floored = true;
    }
    result.p_value_one_sided = std::min(p, 1.0);
    return result;
}

KsResult ks_one_sided(const GroupedSamples& g, Direction direction) {
    return ks_one_sided(g.inactive, g.active, direction);
}

SegmentTests per_segment_tests(const std::map<std::string, GroupedSamples>& by_segment,
                               std::size_t min_count) {
    SegmentTests out;
    const std::size_t needed = std::max<std::size_t>(min_count, 2);
    for (const auto& [segment_id, samples] : by_segment) {
        if (samples.active.size() < needed || samples.inactive.size() < needed) {
            ++out.skipped;
            continue;
        }
        SegmentTestRow row;
        row.segment_id = segment_id;
        row.mean_inactive = mean(samples.inactive);
        row.n_inactive = samples.inactive.size();
        row.mean_active = mean(samples.active);
        row.n_active = samples.active.size();
        row.p_value =
            welch_one_sided(samples.inactive, samples.active, Direction::greater)
                .p_value_one_sided;
        out.rows.push_back(std::move(row));
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const SegmentTestRow& x, const SegmentTestRow& y) {
        const std::size_t tx = x.n_active + x.n_inactive;
        const std::size_t ty = y.n_active + y.n_inactive;
        if (tx != ty) return tx > ty;
        return x.segment_id < y.segment_id;
    });
    return out;
}

}  // namespace drivetel::stats
