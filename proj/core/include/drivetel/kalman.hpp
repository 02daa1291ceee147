#ifndef DRIVETEL_KALMAN_HPP
#define DRIVETEL_KALMAN_HPP

#include <array>
#include <vector>

#include "drivetel/trajectory.hpp"

namespace drivetel::prep {

// Minimal fixed-size linear algebra for the 2-dimensional state.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Mat2 {
    // Row-major: [[a, b], [c, d]].
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }

    Mat2 transpose() const { return {a, c, b, d}; }
    double det() const { return a * d - b * c; }
};

Mat2 operator*(const Mat2& lhs, const Mat2& rhs);
Mat2 operator+(const Mat2& lhs, const Mat2& rhs);
Mat2 operator-(const Mat2& lhs, const Mat2& rhs);
Vec2 operator*(const Mat2& m, const Vec2& v);
Mat2 inverse(const Mat2& m);  // throws NumericError when singular

// State vector: speed (m/s) and acceleration (m/s^2).
struct KinematicState {
    double speed = 0.0;
    double acceleration = 0.0;
};

struct SmoothedPoint {
    double timestamp = 0.0;
    KinematicState mean;
    Mat2 covariance;
};

// Linear-Gaussian state-space model
//   y_t     = F theta_t + v,        v ~ N(0, V)
//   theta_t = G(dt) theta_{t-1} + w, w ~ N(0, W),  G(dt) = [[1, dt], [0, 1]]
// with theta = (speed, acceleration). mu0/C0 are the prior for the first
// state; no transition is applied before the first observation. When only
// speed is observed the observation model is the first row of F with noise
// V(0,0).
struct SmootherConfig {
    Mat2 F = Mat2::identity();
    Mat2 V = Mat2::diag(1.0, 1.0);
    Mat2 W = Mat2::diag(1.0, 0.2);
    Vec2 mu0 = {0.0, 2.0};
    Mat2 C0 = Mat2::diag(2000.0, 2000.0);
};

// Throws ConfigError when V, W, or C0 is not symmetric positive semidefinite.
void validate_smoother_config(const SmootherConfig& config);

// Forward Kalman filter over the speed observations followed by a backward
// (Rauch-Tung-Striebel) pass; G uses the exact per-step time delta. Requires
// at least two samples. Throws NumericError naming the step when an
// innovation covariance fails to be positive.
std::vector<SmoothedPoint> kalman_smooth(const Trajectory& speed,
                                         const SmootherConfig& config = {});

// Filtered (forward-only) states, exposed for variance-ordering checks.
std::vector<SmoothedPoint> kalman_filter(const Trajectory& speed,
                                         const SmootherConfig& config = {});

// Splits the smoothed states into speed and acceleration trajectories; the
// acceleration is the state's second component, not a re-differenced speed.
std::pair<Trajectory, Trajectory> derive_kinematics(const Trajectory& source,
                                                    const std::vector<SmoothedPoint>& smoothed);

}  // namespace drivetel::prep

#endif
