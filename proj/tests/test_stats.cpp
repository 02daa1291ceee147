#include <algorithm>
#include <cmath>
#include <doctest.h>

#include "drivetel/errors.hpp"
#include "drivetel/rng.hpp"
#include "drivetel/stats.hpp"

using namespace drivetel::stats;
using drivetel::DataError;
using drivetel::synth::Rng;

namespace {

// Brute-force sup of F_a - F_b over every pooled sample point.
std::pair<double, double> brute_force_ks(const std::vector<double>& a,
                                         const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    double d_plus = 0.0;
    double d_minus = 0.0;
    for (double t : pooled) {
        const double fa =
            static_cast<double>(std::count_if(a.begin(), a.end(),
                                              [&](double v) { return v <= t; })) /
            static_cast<double>(a.size());
        const double fb =
            static_cast<double>(std::count_if(b.begin(), b.end(),
                                              [&](double v) { return v <= t; })) /
            static_cast<double>(b.size());
        d_plus = std::max(d_plus, fa - fb);
        d_minus = std::max(d_minus, fb - fa);
    }
    return {d_plus, d_minus};
}

}  // namespace

TEST_CASE("split_by_sign partitions and counts zeros") {
    const auto split = split_by_sign({0.5, -0.3, 0.0});
    CHECK(split.positive == std::vector<double>{0.5});
    CHECK(split.negative == std::vector<double>{-0.3});
    CHECK(split.zero_count == 1);

    const auto all_pos = split_by_sign({1.0, 2.0});
    CHECK(all_pos.negative.empty());

    Rng rng(3);
    std::vector<double> sample;
    for (int i = 0; i < 500; ++i) sample.push_back(rng.normal(0.0, 1.0));
    const auto s = split_by_sign(sample);
    CHECK(s.positive.size() + s.negative.size() + s.zero_count == sample.size());
}

TEST_CASE("welch hand example: x=[1,2,3], y=[2,3,4]") {
    const auto result =
        welch_one_sided({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}, Direction::greater);
    CHECK(std::fabs(result.t_statistic - (-1.2247)) < 1e-4);
    CHECK(std::fabs(result.degrees_of_freedom - 4.0) < 1e-10);
    CHECK(result.difference == doctest::Approx(-1.0));
}

TEST_CASE("identical groups give one-sided p exactly 0.5") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const auto result = welch_one_sided(x, x, Direction::greater);
    CHECK(result.t_statistic == 0.0);
    CHECK(std::fabs(result.p_value_one_sided - 0.5) < 1e-12);
}

TEST_CASE("greater and less p-values sum to one") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> a, b;
        for (int i = 0; i < 20; ++i) a.push_back(rng.normal(0.0, 1.0));
        for (int i = 0; i < 25; ++i) b.push_back(rng.normal(0.3, 1.5));
        const auto greater = welch_one_sided(a, b, Direction::greater);
        const auto less = welch_one_sided(a, b, Direction::less);
        CHECK(std::fabs(greater.p_value_one_sided + less.p_value_one_sided - 1.0) < 1e-12);
        CHECK(greater.t_statistic == less.t_statistic);
    }
}

TEST_CASE("one-sided confidence bound format matches the tested difference") {
    // Construct a case where the 95% bound lands near a known value: with
    // equal variances the bound is diff - t_crit * se.
    const auto result =
        welch_one_sided({2.0, 3.0, 4.0, 5.0}, {1.0, 2.0, 3.0, 4.0}, Direction::greater);
    CHECK(result.one_sided_ci_bound < result.difference);
    const auto less = welch_one_sided({2.0, 3.0, 4.0, 5.0}, {1.0, 2.0, 3.0, 4.0}, Direction::less);
    CHECK(less.one_sided_ci_bound > less.difference);
}

TEST_CASE("welch degenerate input errors") {
    CHECK_THROWS_AS(welch_one_sided({1.0}, {1.0, 2.0}, Direction::greater), DataError);
    CHECK_THROWS_AS(welch_one_sided({2.0, 2.0}, {2.0, 2.0}, Direction::greater), DataError);
}

TEST_CASE("group_means matches hand means and orientation") {
    GroupedSamples g;
    g.active = {1.0, 2.0, 3.0};
    g.inactive = {2.0, 3.0, 4.0};
    const auto row = group_means(g);
    CHECK(row.mean_active == 2.0);
    CHECK(row.mean_inactive == 3.0);
    CHECK(row.n_active == 3);
    // Two-sided CI brackets the difference mean(inactive) - mean(active) = 1.
    CHECK(row.diff_ci_low < 1.0);
    CHECK(row.diff_ci_high > 1.0);

    GroupedSamples empty;
    empty.inactive = {1.0};
    CHECK_THROWS_WITH_AS(group_means(empty), "group_means: active group is empty", DataError);
}

TEST_CASE("ecdf basics") {
    const auto f = ecdf({1.0, 2.0, 3.0});
    CHECK(f(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(f(0.5) == 0.0);
    CHECK(f(3.0) == 1.0);
    CHECK(f(10.0) == 1.0);

    const auto dup = ecdf({1.0, 1.0, 2.0});
    CHECK(dup(1.0) == doctest::Approx(2.0 / 3.0));
    REQUIRE(dup.points.size() == 2);
}

TEST_CASE("ks example: interleaved quarters") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y = {1.5, 2.5, 3.5, 4.5};
    const auto result = ks_one_sided(x, y, Direction::greater);
    CHECK(result.d_plus == 0.25);
    CHECK(result.d_minus == 0.0);
    const auto [bp, bm] = brute_force_ks(x, y);
    CHECK(result.d_plus == bp);
    CHECK(result.d_minus == bm);
}

TEST_CASE("identical samples: d=0, p=1") {
    const std::vector<double> x = {1.0, 2.0, 3.0};
    const auto result = ks_one_sided(x, x, Direction::greater);
    CHECK(result.d_plus == 0.0);
    CHECK(result.d_minus == 0.0);
    CHECK(result.p_value_one_sided == 1.0);
    CHECK_FALSE(result.p_floored);
}

TEST_CASE("ks equals brute force on random samples and p matches the bound") {
    Rng rng(23);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> a, b;
        const std::size_t na = 1 + rng.next_u64() % 1000;
        const std::size_t nb = 1 + rng.next_u64() % 1000;
        for (std::size_t i = 0; i < na; ++i) a.push_back(rng.normal(0.0, 1.0));
        for (std::size_t i = 0; i < nb; ++i) b.push_back(rng.normal(0.2, 0.8));
        // Inject ties across samples now and then.
        if (rep % 3 == 0 && !a.empty() && !b.empty()) b[0] = a[0];

        const auto result = ks_one_sided(a, b, Direction::greater);
        const auto [bp, bm] = brute_force_ks(a, b);
        CHECK(result.d_plus == bp);
        CHECK(result.d_minus == bm);

        const double m = static_cast<double>(na);
        const double n = static_cast<double>(nb);
        const double expected = std::exp(-2.0 * bp * bp * m * n / (m + n));
        CHECK(std::fabs(result.p_value_one_sided - std::min(expected, 1.0)) < 1e-12);
    }
}

TEST_CASE("ks statistics are invariant under strictly increasing transforms") {
    Rng rng(29);
    std::vector<double> a, b;
    for (int i = 0; i < 200; ++i) a.push_back(rng.normal(0.0, 1.0));
    for (int i = 0; i < 150; ++i) b.push_back(rng.normal(0.5, 1.0));
    const auto base = ks_one_sided(a, b, Direction::greater);
    auto transform = [](double v) { return std::exp(0.5 * v) + v * v * v; };
    for (auto& v : a) v = transform(v);
    for (auto& v : b) v = transform(v);
    const auto mapped = ks_one_sided(a, b, Direction::greater);
    CHECK(base.d_plus == mapped.d_plus);
    CHECK(base.d_minus == mapped.d_minus);
}

TEST_CASE("ks p-value floors at the smallest normal double with a flag") {
    std::vector<double> lo, hi;
    for (int i = 0; i < 200000; ++i) {
        lo.push_back(i);
        hi.push_back(i + 1e6);
    }
    const auto result = ks_one_sided(lo, hi, Direction::greater);
    CHECK(result.d_plus == 1.0);
    CHECK(result.p_value_one_sided == std::numeric_limits<double>::min());
    CHECK(result.p_floored);
}

TEST_CASE("per-segment tests: ordering, skipping, p-values") {
    std::map<std::string, GroupedSamples> by_segment;
    Rng rng(31);
    auto fill = [&](const std::string& id, std::size_t n_inactive, std::size_t n_active,
                    double shift) {
        auto& g = by_segment[id];
        for (std::size_t i = 0; i < n_inactive; ++i) {
            g.inactive.push_back(rng.normal(0.7 + shift, 0.3));
        }
        for (std::size_t i = 0; i < n_active; ++i) g.active.push_back(rng.normal(0.7, 0.3));
    };
    fill("busy", 886, 2686, 0.075);
    fill("medium", 400, 300, 0.0);
    fill("sparse", 5, 900, 0.0);

    const auto tests = per_segment_tests(by_segment, 100);
    REQUIRE(tests.rows.size() == 2);
    CHECK(tests.skipped == 1);
    CHECK(tests.rows[0].segment_id == "busy");  // most-traveled first
    CHECK(tests.rows[1].segment_id == "medium");
    CHECK(tests.rows[0].n_active == 2686);
    CHECK(tests.rows[0].p_value < 0.05);   // shifted means detected
    CHECK(tests.rows[1].p_value > 0.01);   // homogeneous segment not significant
}

TEST_CASE("permutation property: one-sided welch p is calibrated at level 0.05") {
    Rng rng(41);
    std::vector<double> pool;
    for (int i = 0; i < 60; ++i) pool.push_back(rng.normal(0.0, 1.0));

    int rejections = 0;
    const int shuffles = 10000;
    for (int s = 0; s < shuffles; ++s) {
        for (std::size_t i = pool.size(); i > 1; --i) {
            std::swap(pool[i - 1], pool[rng.next_u64() % i]);
        }
        const std::vector<double> a(pool.begin(), pool.begin() + 30);
        const std::vector<double> b(pool.begin() + 30, pool.end());
        if (welch_one_sided(a, b, Direction::greater).p_value_one_sided < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / shuffles;
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
}

TEST_CASE("quantile interpolates") {
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({5.0}, 0.9) == 5.0);
    CHECK(quantile({1.0, 3.0}, 0.25) == doctest::Approx(1.5));
}
