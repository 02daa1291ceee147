#ifndef DRIVETEL_MAPMATCH_HPP
#define DRIVETEL_MAPMATCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "drivetel/records.hpp"
#include "drivetel/road_network.hpp"

namespace drivetel::mapmatch {

struct GpsFix {
    double timestamp = 0.0;
    geo::LatLon position;
};

struct HmmParams {
    double sigma_z_m = 4.07;        // emission: N(0, sigma_z) on perpendicular distance
    double beta_m = 3.0;            // transition: (1/beta) exp(-d/beta)
    double radius_m = 50.0;         // candidate search radius
    double max_route_m = 2000.0;    // route search cap
    double no_route_log_prob = -30.0;  // log-space floor when no route exists
};

struct MatchedPoint {
    std::string segment_id;
    double distance_m = 0.0;
    double position_m = 0.0;
};

// Per-sample matches, parallel to the input track; nullopt = unmatched.
struct MatchResult {
    std::vector<double> timestamps;
    std::vector<std::optional<MatchedPoint>> points;

    std::size_t matched_count() const;
    // Exact-timestamp lookup (binary search); nullptr when absent/unmatched.
    const MatchedPoint* at_time(double timestamp) const;
};

double emission_log_density(double distance_m, double sigma_z_m);
double transition_log_density(double route_m, double great_circle_m, double beta_m);

// Viterbi decoding over candidate segments: emission N(0, sigma_z) on the
// perpendicular distance, transition (1/beta) exp(-|route - great-circle|/beta)
// between consecutive fixes. All probabilities combine additively in log
// space. Fixes with no candidates in radius are left unmatched and break the
// chain (decoding restarts at the next matchable fix).
MatchResult hmm_match(const std::vector<GpsFix>& track, const RoadNetwork& network,
                      const HmmParams& params = {});

std::vector<GpsFix> track_from_phone(const std::vector<PhoneRecord>& records);

// CSV columns: trip_id,timestamp,segment_id,distance_m,position_m
// (unmatched samples serialize with an empty segment_id).
void write_match_csv(const std::string& path, const std::string& trip_id,
                     const MatchResult& match);
void append_match_csv(std::string& out, const std::string& trip_id, const MatchResult& match);

// Per-trip match results; each trip's rows must be time-ordered in the file.
std::map<std::string, MatchResult> read_match_csv(const std::string& path);

// Partition records by the matched segment's active flag; unmatched records
// go to `other`. Sizes always sum to the input size.
struct Partition {
    std::vector<std::size_t> active_indices;
    std::vector<std::size_t> other_indices;
};

Partition filter_active(const std::vector<PhoneRecord>& records, const MatchResult& match,
                        const RoadNetwork& network);

}  // namespace drivetel::mapmatch

#endif
