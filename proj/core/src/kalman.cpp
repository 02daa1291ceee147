#include "drivetel/kalman.hpp"

#include <cmath>
#include <string>

#include "drivetel/errors.hpp"

namespace drivetel::prep {

Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

Mat2 operator+(const Mat2& l, const Mat2& r) { return {l.a + r.a, l.b + r.b, l.c + r.c, l.d + r.d}; }

Mat2 operator-(const Mat2& l, const Mat2& r) { return {l.a - r.a, l.b - r.b, l.c - r.c, l.d - r.d}; }

Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

Mat2 inverse(const Mat2& m) {
    const double det = m.det();
    if (!std::isfinite(det) || std::fabs(det) < 1e-300) {
        throw NumericError("singular 2x2 matrix");
    }
    const double inv = 1.0 / det;
    return {m.d * inv, -m.b * inv, -m.c * inv, m.a * inv};
}

namespace {

Mat2 transition(double dt) { return {1.0, dt, 0.0, 1.0}; }

Mat2 symmetrize(const Mat2& m) {
    const double off = 0.5 * (m.b + m.c);
    return {m.a, off, off, m.d};
}

void check_psd(const Mat2& m, const char* name) {
    const double scale = std::max({std::fabs(m.a), std::fabs(m.d), 1.0});
    if (std::fabs(m.b - m.c) > 1e-9 * scale) {
        throw ConfigError(std::string(name) + " must be symmetric");
    }
    if (m.a < 0.0 || m.d < 0.0 || m.det() < -1e-9 * scale * scale) {
        throw ConfigError(std::string(name) + " must be positive semidefinite");
    }
}

struct ForwardPass {
    std::vector<double> timestamps;
    std::vector<double> dts;           // dts[t] = timestamps[t] - timestamps[t-1]
    std::vector<Vec2> predicted_mean;  // a_t
    std::vector<Mat2> predicted_cov;   // R_t
    std::vector<Vec2> filtered_mean;   // m_t
    std::vector<Mat2> filtered_cov;    // C_t
};

ForwardPass run_filter(const Trajectory& speed, const SmootherConfig& config) {
    validate_smoother_config(config);
    validate_trajectory(speed);
    if (speed.samples.size() < 2) {
        throw DataError("kalman_smooth needs at least 2 samples, got " +
                        std::to_string(speed.samples.size()));
    }

    const std::size_t n = speed.samples.size();
    ForwardPass fwd;
    fwd.timestamps.resize(n);
    fwd.dts.resize(n, 0.0);
    fwd.predicted_mean.resize(n);
    fwd.predicted_cov.resize(n);
    fwd.filtered_mean.resize(n);
    fwd.filtered_cov.resize(n);

    // Observation model: first row of F, measurement noise V(0,0).
    const double h0 = config.F.a;
    const double h1 = config.F.b;
    const double v = config.V.a;

    Vec2 mean_prev;
    Mat2 cov_prev;
    for (std::size_t t = 0; t < n; ++t) {
        fwd.timestamps[t] = speed.samples[t].timestamp;

        Vec2 a;
        Mat2 r;
        if (t == 0) {
            a = config.mu0;
            r = config.C0;
        } else {
            fwd.dts[t] = fwd.timestamps[t] - fwd.timestamps[t - 1];
            const Mat2 g = transition(fwd.dts[t]);
            a = g * mean_prev;
            r = symmetrize(g * cov_prev * g.transpose() + config.W);
        }

        const double innovation = speed.samples[t].value - (h0 * a.x + h1 * a.y);
        const Vec2 rh = {r.a * h0 + r.b * h1, r.c * h0 + r.d * h1};
        const double q = h0 * rh.x + h1 * rh.y + v;
        if (!std::isfinite(q) || q <= 0.0) {
            throw NumericError("kalman_smooth: non-positive innovation covariance at step " +
                               std::to_string(t));
        }
        const Vec2 gain = {rh.x / q, rh.y / q};
        const Vec2 m = {a.x + gain.x * innovation, a.y + gain.y * innovation};
        const Mat2 c = symmetrize(
            r - Mat2{gain.x * gain.x * q, gain.x * gain.y * q,
                     gain.y * gain.x * q, gain.y * gain.y * q});

        fwd.predicted_mean[t] = a;
        fwd.predicted_cov[t] = r;
        fwd.filtered_mean[t] = m;
        fwd.filtered_cov[t] = c;
        mean_prev = m;
        cov_prev = c;
    }
    return fwd;
}

std::vector<SmoothedPoint> to_points(const ForwardPass& fwd, const std::vector<Vec2>& means,
                                     const std::vector<Mat2>& covs) {
    std::vector<SmoothedPoint> out(means.size());
    for (std::size_t t = 0; t < means.size(); ++t) {
        out[t].timestamp = fwd.timestamps[t];
        out[t].mean = {means[t].x, means[t].y};
        out[t].covariance = covs[t];
    }
    return out;
}

}  // namespace

void validate_smoother_config(const SmootherConfig& config) {
    check_psd(config.V, "V");
    check_psd(config.W, "W");
    check_psd(config.C0, "C0");
}

std::vector<SmoothedPoint> kalman_filter(const Trajectory& speed, const SmootherConfig& config) {
    const ForwardPass fwd = run_filter(speed, config);
    return to_points(fwd, fwd.filtered_mean, fwd.filtered_cov);
}

std::vector<SmoothedPoint> kalman_smooth(const Trajectory& speed, const SmootherConfig& config) {
    const ForwardPass fwd = run_filter(speed, config);
    const std::size_t n = fwd.timestamps.size();

    std::vector<Vec2> smoothed_mean(n);
    std::vector<Mat2> smoothed_cov(n);
    smoothed_mean[n - 1] = fwd.filtered_mean[n - 1];
    smoothed_cov[n - 1] = fwd.filtered_cov[n - 1];

    for (std::size_t t = n - 1; t-- > 0;) {
        const Mat2 g_next = transition(fwd.dts[t + 1]);
        const Mat2 j = fwd.filtered_cov[t] * g_next.transpose() * inverse(fwd.predicted_cov[t + 1]);
        const Vec2 mean_diff = {smoothed_mean[t + 1].x - fwd.predicted_mean[t + 1].x,
                                smoothed_mean[t + 1].y - fwd.predicted_mean[t + 1].y};
        smoothed_mean[t] = {fwd.filtered_mean[t].x + j.a * mean_diff.x + j.b * mean_diff.y,
                            fwd.filtered_mean[t].y + j.c * mean_diff.x + j.d * mean_diff.y};
        const Mat2 cov_diff = smoothed_cov[t + 1] - fwd.predicted_cov[t + 1];
        smoothed_cov[t] = symmetrize(fwd.filtered_cov[t] + j * cov_diff * j.transpose());
    }
    return to_points(fwd, smoothed_mean, smoothed_cov);
}

std::pair<Trajectory, Trajectory> derive_kinematics(const Trajectory& source,
                                                    const std::vector<SmoothedPoint>& smoothed) {
    if (smoothed.empty()) throw DataError("derive_kinematics: empty smoothed sequence");

    Trajectory speed;
    speed.trip_id = source.trip_id;
    speed.channel = Channel::speed;
    speed.units = "m/s";
    speed.samples.reserve(smoothed.size());

    Trajectory accel;
    accel.trip_id = source.trip_id;
    accel.channel = Channel::acceleration;
    accel.units = "m/s^2";
    accel.samples.reserve(smoothed.size());

    for (const SmoothedPoint& p : smoothed) {
        speed.samples.push_back({p.timestamp, p.mean.speed});
        accel.samples.push_back({p.timestamp, p.mean.acceleration});
    }
    return {std::move(speed), std::move(accel)};
}

}  // namespace drivetel::prep
