#include "drivetel/mapmatch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "drivetel/csv.hpp"
#include "drivetel/errors.hpp"

namespace drivetel::mapmatch {

std::size_t MatchResult::matched_count() const {
    std::size_t n = 0;
    for (const auto& p : points) {
        if (p.has_value()) ++n;
    }
    return n;
}

const MatchedPoint* MatchResult::at_time(double timestamp) const {
    auto it = std::lower_bound(timestamps.begin(), timestamps.end(), timestamp);
    if (it == timestamps.end() || *it != timestamp) return nullptr;
    const auto idx = static_cast<std::size_t>(it - timestamps.begin());
    return points[idx].has_value() ? &points[idx].value() : nullptr;
}

double emission_log_density(double distance_m, double sigma_z_m) {
    const double z = distance_m / sigma_z_m;
    return -0.5 * z * z - std::log(sigma_z_m * std::sqrt(2.0 * std::numbers::pi));
}

double transition_log_density(double route_m, double great_circle_m, double beta_m) {
    return -std::log(beta_m) - std::fabs(route_m - great_circle_m) / beta_m;
}

MatchResult hmm_match(const std::vector<GpsFix>& track, const RoadNetwork& network,
                      const HmmParams& params) {
    if (track.empty()) throw DataError("hmm_match: empty trajectory");
    if (params.sigma_z_m <= 0.0 || params.beta_m <= 0.0 || params.radius_m <= 0.0) {
        throw ConfigError("hmm_match: sigma_z, beta, and radius must be positive");
    }

    MatchResult result;
    result.timestamps.reserve(track.size());
    for (const auto& fix : track) result.timestamps.push_back(fix.timestamp);
    result.points.assign(track.size(), std::nullopt);

    const std::size_t n = track.size();
    std::vector<std::vector<Candidate>> candidates(n);
    for (std::size_t i = 0; i < n; ++i) {
        candidates[i] = network.candidates_near(track[i].position, params.radius_m);
    }

    // Decode one chain: a maximal run of consecutive fixes that all have
    // candidates. backptr[i][j] is the best predecessor state at i-1.
    auto decode_chain = [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<double>> score(end - begin);
        std::vector<std::vector<int>> backptr(end - begin);

        score[0].resize(candidates[begin].size());
        backptr[0].assign(candidates[begin].size(), -1);
        for (std::size_t j = 0; j < candidates[begin].size(); ++j) {
            score[0][j] = emission_log_density(candidates[begin][j].distance_m, params.sigma_z_m);
        }

        for (std::size_t i = begin + 1; i < end; ++i) {
            const std::size_t row = i - begin;
            const auto& prev = candidates[i - 1];
            const auto& cur = candidates[i];
            score[row].assign(cur.size(), -std::numeric_limits<double>::infinity());
            backptr[row].assign(cur.size(), -1);
            const double gc = geo::great_circle_m(track[i - 1].position, track[i].position);

            // One route search per predecessor candidate covers all targets.
            for (std::size_t k = 0; k < prev.size(); ++k) {
                for (std::size_t j = 0; j < cur.size(); ++j) {
                    const auto route =
                        network.route_distance(prev[k], cur[j], params.max_route_m);
                    const double log_trans =
                        route.has_value()
                            ? transition_log_density(*route, gc, params.beta_m)
                            : params.no_route_log_prob;
                    const double log_emit =
                        emission_log_density(cur[j].distance_m, params.sigma_z_m);
                    const double total = score[row - 1][k] + log_trans + log_emit;
                    if (total > score[row][j]) {
                        score[row][j] = total;
                        backptr[row][j] = static_cast<int>(k);
                    }
                }
            }
        }

        // Backtrack from the best terminal state.
        const auto& last = score.back();
        std::size_t best = 0;
        for (std::size_t j = 1; j < last.size(); ++j) {
            if (last[j] > last[best]) best = j;
        }
        int state = static_cast<int>(best);
        for (std::size_t i = end; i-- > begin;) {
            const auto& c = candidates[i][static_cast<std::size_t>(state)];
            result.points[i] = MatchedPoint{c.segment_id, c.distance_m, c.position_m};
            state = backptr[i - begin][static_cast<std::size_t>(state)];
        }
    };

    std::size_t i = 0;
    while (i < n) {
        if (candidates[i].empty()) {
            ++i;
            continue;
        }
        std::size_t end = i + 1;
        while (end < n && !candidates[end].empty()) ++end;
        decode_chain(i, end);
        i = end;
    }
    return result;
}

std::vector<GpsFix> track_from_phone(const std::vector<PhoneRecord>& records) {
    std::vector<GpsFix> track;
    track.reserve(records.size());
    for (const auto& r : records) {
        track.push_back({r.timestamp, {r.latitude, r.longitude}});
    }
    return track;
}

void append_match_csv(std::string& out, const std::string& trip_id, const MatchResult& match) {
    for (std::size_t i = 0; i < match.timestamps.size(); ++i) {
        const auto& p = match.points[i];
        out += csv::join({trip_id, csv::format_double(match.timestamps[i]),
                          p ? p->segment_id : "",
                          p ? csv::format_double(p->distance_m) : "",
                          p ? csv::format_double(p->position_m) : ""},
                         ',');
        out += "\n";
    }
}

void write_match_csv(const std::string& path, const std::string& trip_id,
                     const MatchResult& match) {
    std::ofstream out(path);
    if (!out.is_open()) throw ConfigError("cannot open output file: " + path);
    out << "trip_id,timestamp,segment_id,distance_m,position_m\n";
    std::string body;
    append_match_csv(body, trip_id, match);
    out << body;
}

std::map<std::string, MatchResult> read_match_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open input file: " + path);
    std::map<std::string, MatchResult> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;
        auto fields = csv::split(line, ',');
        if (fields.size() != 5) {
            throw ParseError(path, line_no,
                             "expected 5 fields, got " + std::to_string(fields.size()));
        }
        MatchResult& match = out[csv::trim(fields[0])];
        double t = 0.0;
        if (!csv::parse_double(fields[1], t)) throw ParseError(path, line_no, "bad timestamp");
        if (!match.timestamps.empty() && t <= match.timestamps.back()) {
            throw ParseError(path, line_no, "timestamps not increasing within trip");
        }
        match.timestamps.push_back(t);
        const std::string segment = csv::trim(fields[2]);
        if (segment.empty()) {
            match.points.push_back(std::nullopt);
        } else {
            MatchedPoint p;
            p.segment_id = segment;
            if (!csv::parse_double(fields[3], p.distance_m) ||
                !csv::parse_double(fields[4], p.position_m)) {
                throw ParseError(path, line_no, "bad distance or position");
            }
            match.points.push_back(p);
        }
    }
    return out;
}

Partition filter_active(const std::vector<PhoneRecord>& records, const MatchResult& match,
                        const RoadNetwork& network) {
    Partition partition;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const MatchedPoint* point = match.at_time(records[i].timestamp);
        const RoadSegment* segment = point ? network.find(point->segment_id) : nullptr;
        if (segment != nullptr && segment->active) {
            partition.active_indices.push_back(i);
        } else {
            partition.other_indices.push_back(i);
        }
    }
    return partition;
}

}  // namespace drivetel::mapmatch
