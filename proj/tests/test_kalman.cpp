#include <cmath>
#include <doctest.h>
#include <vector>

#include "drivetel/errors.hpp"
#include "drivetel/kalman.hpp"
#include "drivetel/rng.hpp"
#include "helpers.hpp"

using namespace drivetel;
using prep::KinematicState;
using prep::Mat2;
using prep::SmootherConfig;
using prep::Vec2;

namespace {

Trajectory speed_traj(const std::vector<Sample>& samples) {
    Trajectory t;
    t.trip_id = "t";
    t.channel = Channel::speed;
    t.units = "m/s";
    t.samples = samples;
    return t;
}

// Batch joint-Gaussian posterior mean over all states, assembled directly
// from the model (prior N(mu0, C0) on the first state, transitions G(dt),
// scalar speed observations) and solved as one dense linear system. This is
// the oracle the recursive smoother must match exactly on small instances.
std::vector<double> batch_posterior_mean(const Trajectory& obs, const SmootherConfig& cfg) {
    const std::size_t n = obs.samples.size();
    const std::size_t dim = 2 * n;
    std::vector<std::vector<double>> lambda(dim, std::vector<double>(dim, 0.0));
    std::vector<double> rhs(dim, 0.0);

    auto inv_diag2 = [](const Mat2& m) {
        // All test covariances are diagonal.
        return Mat2::diag(1.0 / m.a, 1.0 / m.d);
    };

    // Prior on the first state.
    const Mat2 c0_inv = inv_diag2(cfg.C0);
    lambda[0][0] += c0_inv.a;
    lambda[1][1] += c0_inv.d;
    rhs[0] += c0_inv.a * cfg.mu0.x;
    rhs[1] += c0_inv.d * cfg.mu0.y;

    // Transitions theta_i = G_i theta_{i-1} + w.
    const Mat2 w_inv = inv_diag2(cfg.W);
    for (std::size_t i = 1; i < n; ++i) {
        const double dt = obs.samples[i].timestamp - obs.samples[i - 1].timestamp;
        const double g[2][2] = {{1.0, dt}, {0.0, 1.0}};
        const double wi[2] = {w_inv.a, w_inv.d};
        const std::size_t p = 2 * (i - 1);
        const std::size_t q = 2 * i;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                double gwg = 0.0;
                for (int k = 0; k < 2; ++k) gwg += g[k][r] * wi[k] * g[k][c];
                lambda[p + r][p + c] += gwg;
            }
        }
        for (int r = 0; r < 2; ++r) {
            for (int k = 0; k < 2; ++k) {
                lambda[p + r][q + k] -= g[k][r] * wi[k];
                lambda[q + k][p + r] -= wi[k] * g[k][r];
            }
        }
        lambda[q][q] += wi[0];
        lambda[q + 1][q + 1] += wi[1];
    }

    // Scalar observations y_i = h . theta_i + v.
    const double h0 = cfg.F.a;
    const double h1 = cfg.F.b;
    const double v_inv = 1.0 / cfg.V.a;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t q = 2 * i;
        lambda[q][q] += h0 * h0 * v_inv;
        lambda[q][q + 1] += h0 * h1 * v_inv;
        lambda[q + 1][q] += h1 * h0 * v_inv;
        lambda[q + 1][q + 1] += h1 * h1 * v_inv;
        rhs[q] += h0 * obs.samples[i].value * v_inv;
        rhs[q + 1] += h1 * obs.samples[i].value * v_inv;
    }
    return testutil::solve_dense(std::move(lambda), std::move(rhs));
}

}  // namespace

TEST_CASE("noiseless constant speed recovers speed and zero acceleration") {
    std::vector<Sample> samples;
    for (int i = 0; i < 20; ++i) samples.push_back({static_cast<double>(i), 10.0});
    SmootherConfig cfg;
    cfg.V = Mat2::diag(1e-8, 1e-8);
    cfg.mu0 = {0.0, 0.0};  // prior-neutral acceleration
    const auto smoothed = prep::kalman_smooth(speed_traj(samples), cfg);
    REQUIRE(smoothed.size() == samples.size());
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
        CHECK(std::fabs(smoothed[i].mean.speed - 10.0) < 1e-6);
        CHECK(std::fabs(smoothed[i].mean.acceleration) < 1e-6);
    }

    // With the default prior (acceleration mean 2) the transient decays along
    // the trajectory instead of vanishing instantly.
    const auto with_default = prep::kalman_smooth(speed_traj(samples), SmootherConfig{});
    CHECK(std::fabs(with_default.front().mean.acceleration) < 2e-3);
    CHECK(std::fabs(with_default.back().mean.acceleration) <
          std::fabs(with_default.front().mean.acceleration));
    // Default V=1 treats observations as noisy, so speed only tracks loosely.
    for (const auto& p : with_default) CHECK(std::fabs(p.mean.speed - 10.0) < 0.05);
}

TEST_CASE("smoother equals the batch joint-Gaussian posterior on random instances") {
    synth::Rng rng(2024);
    double worst = 0.0;
    for (int instance = 0; instance < 100; ++instance) {
        const std::size_t n = 5 + rng.next_u64() % 6;  // 5..10 steps
        std::vector<Sample> samples;
        double t = rng.uniform(0.0, 100.0);
        for (std::size_t i = 0; i < n; ++i) {
            t += rng.uniform(0.3, 2.5);
            samples.push_back({t, rng.uniform(0.0, 30.0)});
        }
        SmootherConfig cfg;
        cfg.V = Mat2::diag(rng.uniform(0.2, 3.0), 1.0);
        cfg.W = Mat2::diag(rng.uniform(0.2, 2.0), rng.uniform(0.05, 1.0));
        cfg.mu0 = {rng.uniform(0.0, 20.0), rng.uniform(-2.0, 2.0)};
        cfg.C0 = Mat2::diag(rng.uniform(10.0, 3000.0), rng.uniform(10.0, 3000.0));

        const auto traj = speed_traj(samples);
        const auto smoothed = prep::kalman_smooth(traj, cfg);
        const auto oracle = batch_posterior_mean(traj, cfg);
        REQUIRE(smoothed.size() == n);
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::fabs(smoothed[i].mean.speed - oracle[2 * i]));
            worst = std::max(worst,
                             std::fabs(smoothed[i].mean.acceleration - oracle[2 * i + 1]));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("defaults follow the documented initial conditions") {
    SmootherConfig cfg;
    CHECK(cfg.mu0.x == 0.0);
    CHECK(cfg.mu0.y == 2.0);
    CHECK(cfg.C0.a == 2000.0);
    CHECK(cfg.C0.d == 2000.0);
    CHECK(cfg.W.a == 1.0);
    CHECK(cfg.W.d == 0.2);
    CHECK(cfg.V.a == 1.0);
}

TEST_CASE("smoothed variance never exceeds filtered variance") {
    synth::Rng rng(11);
    std::vector<Sample> samples;
    double t = 0.0;
    for (int i = 0; i < 60; ++i) {
        t += rng.uniform(0.5, 1.5);
        samples.push_back({t, 15.0 + rng.normal(0.0, 2.0)});
    }
    const auto traj = speed_traj(samples);
    const auto filtered = prep::kalman_filter(traj);
    const auto smoothed = prep::kalman_smooth(traj);
    REQUIRE(filtered.size() == smoothed.size());
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        CHECK(smoothed[i].covariance.a <= filtered[i].covariance.a + 1e-9);
        CHECK(smoothed[i].covariance.d <= filtered[i].covariance.d + 1e-9);
    }
}

TEST_CASE("V -> 0 reproduces state-consistent observations") {
    // Consistent path: constant acceleration 0.5 from speed 5.
    std::vector<Sample> samples;
    for (int i = 0; i < 30; ++i) {
        samples.push_back({static_cast<double>(i), 5.0 + 0.5 * i});
    }
    SmootherConfig cfg;
    cfg.V = Mat2::diag(1e-10, 1e-10);
    const auto smoothed = prep::kalman_smooth(speed_traj(samples), cfg);
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
        CHECK(std::fabs(smoothed[i].mean.speed - samples[i].value) < 1e-6);
    }
}

TEST_CASE("linear ramp yields interior acceleration near 1") {
    std::vector<Sample> samples;
    for (int i = 0; i <= 10; ++i) samples.push_back({static_cast<double>(i), 1.0 * i});
    SmootherConfig cfg;
    cfg.V = Mat2::diag(1e-6, 1e-6);
    const auto smoothed = prep::kalman_smooth(speed_traj(samples), cfg);
    auto [speed, accel] = prep::derive_kinematics(speed_traj(samples), smoothed);
    REQUIRE(accel.samples.size() == samples.size());
    for (std::size_t i = 2; i + 2 < accel.samples.size(); ++i) {
        CHECK(accel.samples[i].value == doctest::Approx(1.0).epsilon(0.05));
    }
    // Output timestamps equal input timestamps exactly.
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(accel.samples[i].timestamp == samples[i].timestamp);
        CHECK(speed.samples[i].timestamp == samples[i].timestamp);
    }
}

TEST_CASE("derive_kinematics uses the state's second component") {
    std::vector<prep::SmoothedPoint> points(3);
    points[0] = {0.0, {1.0, 0.25}, Mat2::identity()};
    points[1] = {1.0, {2.0, 0.50}, Mat2::identity()};
    points[2] = {2.0, {3.0, 0.75}, Mat2::identity()};
    auto [speed, accel] = prep::derive_kinematics(speed_traj({{0, 0}}), points);
    CHECK(accel.channel == Channel::acceleration);
    CHECK(accel.samples[1].value == 0.50);
    CHECK(speed.samples[2].value == 3.0);
    CHECK_THROWS_AS(prep::derive_kinematics(speed_traj({{0, 0}}), {}), DataError);
}

TEST_CASE("config validation and error paths") {
    SmootherConfig bad;
    bad.V = Mat2{1.0, 0.5, -0.5, 1.0};  // asymmetric
    CHECK_THROWS_AS(prep::validate_smoother_config(bad), ConfigError);

    SmootherConfig negative;
    negative.W = Mat2::diag(-1.0, 1.0);
    CHECK_THROWS_AS(prep::validate_smoother_config(negative), ConfigError);

    CHECK_THROWS_AS(prep::kalman_smooth(speed_traj({{0.0, 1.0}})), DataError);

    // Zero V and zero W make the innovation covariance collapse after the
    // first exact update.
    SmootherConfig degenerate;
    degenerate.V = Mat2::diag(0.0, 0.0);
    degenerate.W = Mat2::diag(0.0, 0.0);
    degenerate.C0 = Mat2::diag(0.0, 0.0);
    CHECK_THROWS_AS(prep::kalman_smooth(speed_traj({{0, 1}, {1, 2}, {2, 3}}), degenerate),
                    NumericError);
}
