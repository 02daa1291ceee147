#include "drivetel/trajectory.hpp"

#include <cmath>

#include "drivetel/errors.hpp"

namespace drivetel {

void validate_trajectory(const Trajectory& traj) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Sample& s = traj.samples[i];
        if (!std::isfinite(s.timestamp) || !std::isfinite(s.value)) {
            throw DataError("trajectory " + traj.trip_id + ": non-finite sample at index " +
                            std::to_string(i));
        }
        if (i > 0 && s.timestamp <= traj.samples[i - 1].timestamp) {
            throw DataError("trajectory " + traj.trip_id +
                            ": timestamps not strictly increasing at index " + std::to_string(i));
        }
    }
}

}  // namespace drivetel
