#ifndef DRIVETEL_PREPROCESS_HPP
#define DRIVETEL_PREPROCESS_HPP

#include <vector>

#include "drivetel/trajectory.hpp"

namespace drivetel::prep {

// Closed physical bounds per channel; samples outside are removed, never
// clamped (clamping would pile mass on the bound and distort the tail
// analysis downstream). Speed bounds are [0, 160] mi/h expressed in m/s,
// acceleration bounds [-6, 4] m/s^2. Other channels pass through.
struct PhysicalLimits {
    double speed_min_mps = 0.0;
    double speed_max_mps = 160.0 * kMetersPerSecondPerMph;  // 71.5264
    double accel_min = -6.0;
    double accel_max = 4.0;
};

struct RemovalReport {
    std::size_t removed_below = 0;
    std::size_t removed_above = 0;
    std::size_t kept = 0;
    std::size_t removed() const { return removed_below + removed_above; }
};

std::pair<Trajectory, RemovalReport> enforce_physical_limits(
    const Trajectory& traj, const PhysicalLimits& limits = {});

// Drops samples whose timestamp does not strictly increase, then splits the
// trajectory wherever the time delta exceeds max_gap. Every kept sample is
// preserved exactly.
std::vector<Trajectory> split_on_time_gaps(const Trajectory& traj, double max_gap_s);

// Removes maximal runs of exactly-zero speed whose duration (last zero time
// minus first zero time) is at least min_run_s; shorter runs are kept.
Trajectory trim_zero_runs(const Trajectory& traj, double min_run_s);

// Trajectory CSV: trip_id,timestamp,channel,value,active,provenance
// (the ingest CAN schema plus a provenance column: raw|cleaned|smoothed).
void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajectories,
                          const std::vector<bool>& active_flags, const std::string& provenance);

struct TrajectoryRecord {
    std::string trip_id;
    double timestamp = 0.0;
    Channel channel = Channel::speed;
    double value = 0.0;
    bool active = false;
    std::string provenance;
};

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path);

}  // namespace drivetel::prep

#endif
