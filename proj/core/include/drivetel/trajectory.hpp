#ifndef DRIVETEL_TRAJECTORY_HPP
#define DRIVETEL_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "drivetel/records.hpp"

namespace drivetel {

struct Sample {
    double timestamp = 0.0;
    double value = 0.0;
};

// Time-ordered scalar samples for one trip and channel; the unit every
// pipeline stage transforms. Timestamps strictly increase, values are finite.
struct Trajectory {
    std::string trip_id;
    Channel channel = Channel::speed;
    std::string units;  // "m/s", "m/s^2", ...
    std::vector<Sample> samples;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    double start() const { return samples.front().timestamp; }
    double end() const { return samples.back().timestamp; }
};

// Throws DataError if timestamps are not strictly increasing or a value is
// non-finite.
void validate_trajectory(const Trajectory& traj);

}  // namespace drivetel

#endif
