#include "drivetel/preprocess.hpp"

#include <cmath>
#include <fstream>

#include "drivetel/csv.hpp"
#include "drivetel/errors.hpp"

namespace drivetel::prep {

std::pair<Trajectory, RemovalReport> enforce_physical_limits(const Trajectory& traj,
                                                             const PhysicalLimits& limits) {
    double lo, hi;
    switch (traj.channel) {
        case Channel::speed:
            lo = limits.speed_min_mps;
            hi = limits.speed_max_mps;
            break;
        case Channel::acceleration:
            lo = limits.accel_min;
            hi = limits.accel_max;
            break;
        default: {
            RemovalReport report;
            report.kept = traj.samples.size();
            return {traj, report};
        }
    }

    Trajectory out = traj;
    out.samples.clear();
    out.samples.reserve(traj.samples.size());
    RemovalReport report;
    for (const Sample& s : traj.samples) {
        if (s.value < lo) {
            ++report.removed_below;
        } else if (s.value > hi) {
            ++report.removed_above;
        } else {
            out.samples.push_back(s);
            ++report.kept;
        }
    }
    return {std::move(out), report};
}

std::vector<Trajectory> split_on_time_gaps(const Trajectory& traj, double max_gap_s) {
    if (max_gap_s <= 0.0) throw ConfigError("max_gap must be positive");

    std::vector<Trajectory> pieces;
    Trajectory current = traj;
    current.samples.clear();

    double last_t = -std::numeric_limits<double>::infinity();
    for (const Sample& s : traj.samples) {
        if (s.timestamp <= last_t) continue;  // non-increasing timestamp, drop
        if (!current.samples.empty() && s.timestamp - last_t > max_gap_s) {
            pieces.push_back(current);
            current.samples.clear();
        }
        current.samples.push_back(s);
        last_t = s.timestamp;
    }
    if (!current.samples.empty()) pieces.push_back(std::move(current));
    return pieces;
}

Trajectory trim_zero_runs(const Trajectory& traj, double min_run_s) {
    if (min_run_s <= 0.0) throw ConfigError("min_run must be positive");
    if (traj.channel != Channel::speed) {
        throw ConfigError("trim_zero_runs applies to speed trajectories only");
    }

    Trajectory out = traj;
    out.samples.clear();
    out.samples.reserve(traj.samples.size());

    const auto& samples = traj.samples;
    std::size_t i = 0;
    while (i < samples.size()) {
        if (samples[i].value != 0.0) {
            out.samples.push_back(samples[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < samples.size() && samples[j + 1].value == 0.0) ++j;
        const double duration = samples[j].timestamp - samples[i].timestamp;
        if (duration < min_run_s) {
            for (std::size_t k = i; k <= j; ++k) out.samples.push_back(samples[k]);
        }
        i = j + 1;
    }
    return out;
}

void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajectories,
                          const std::vector<bool>& active_flags, const std::string& provenance) {
    if (trajectories.size() != active_flags.size()) {
        throw ConfigError("write_trajectory_csv: flags size mismatch");
    }
    std::ofstream out(path);
    if (!out.is_open()) throw ConfigError("cannot open output file: " + path);
    out << "trip_id,timestamp,channel,value,active,provenance\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const Trajectory& traj = trajectories[i];
        for (const Sample& s : traj.samples) {
            out << csv::join({traj.trip_id, csv::format_double(s.timestamp),
                              std::string(channel_name(traj.channel)),
                              csv::format_double(s.value), active_flags[i] ? "true" : "false",
                              provenance},
                             ',')
                << "\n";
        }
    }
}

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open input file: " + path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<TrajectoryRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;  // header
        auto fields = csv::split(line, ',');
        if (fields.size() != 6) {
            throw ParseError(path, line_no,
                             "expected 6 fields, got " + std::to_string(fields.size()));
        }
        TrajectoryRecord rec;
        rec.trip_id = csv::trim(fields[0]);
        const auto channel = parse_channel(fields[2]);
        if (!channel) throw ParseError(path, line_no, "unknown channel " + csv::trim(fields[2]));
        rec.channel = *channel;
        if (!csv::parse_double(fields[1], rec.timestamp) ||
            !csv::parse_double(fields[3], rec.value) || !csv::parse_bool(fields[4], rec.active)) {
            throw ParseError(path, line_no, "bad numeric or boolean field");
        }
        rec.provenance = csv::trim(fields[5]);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace drivetel::prep
