#ifndef DRIVETEL_ROAD_NETWORK_HPP
#define DRIVETEL_ROAD_NETWORK_HPP

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "drivetel/geo.hpp"

namespace drivetel::mapmatch {

struct RoadSegment {
    std::string segment_id;
    std::vector<geo::LatLon> polyline;  // >= 2 points
    bool active = false;                // traffic-signal information available
    double length_m = 0.0;              // derived from the polyline
};

struct Candidate {
    std::string segment_id;
    double distance_m = 0.0;  // perpendicular distance from the GPS point
    double position_m = 0.0;  // arc position along the segment
};

// Immutable after load; shareable across threads.
class RoadNetwork {
  public:
    // `adjacency` maps segment ids to neighbouring segment ids (endpoint
    // connectivity). Throws DataError on segments with fewer than 2 points,
    // zero length, or adjacency referencing a missing segment.
    RoadNetwork(std::vector<RoadSegment> segments,
                std::map<std::string, std::vector<std::string>> adjacency);

    std::size_t segment_count() const { return segments_.size(); }
    std::size_t active_count() const { return active_count_; }

    const RoadSegment* find(const std::string& segment_id) const;
    const std::vector<RoadSegment>& segments() const { return segments_; }
    const std::vector<std::vector<int>>& adjacency_indices() const { return adjacency_; }
    int index_of(const std::string& segment_id) const;  // -1 when unknown

    // All segments within `radius_m` (minimal great-circle distance), sorted
    // ascending by distance; ties break on segment_id.
    std::vector<Candidate> candidates_near(const geo::LatLon& point, double radius_m) const;

    // Distance travelled along the network between two candidate positions,
    // capped at `max_route_m`. Returns nullopt if no route exists within the
    // cap. Entry/exit from a segment costs the nearer end (segment-level
    // adjacency carries no endpoint orientation).
    std::optional<double> route_distance(const Candidate& from, const Candidate& to,
                                         double max_route_m) const;

    const geo::LocalProjection& projection() const { return projection_; }

  private:
    std::vector<RoadSegment> segments_;
    std::unordered_map<std::string, int> id_to_index_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<geo::XY>> projected_;
    std::vector<std::vector<double>> cumulative_;
    geo::LocalProjection projection_;
    std::size_t active_count_ = 0;

    // Uniform grid over projected coordinates for radius queries.
    double cell_size_m_ = 250.0;
    std::unordered_map<std::int64_t, std::vector<int>> grid_;
    std::int64_t cell_key(double x, double y) const;
    void index_segment(int idx);
};

// Feature-collection JSON (see docs/network-format.md). Reports total and
// active segment counts via the log.
RoadNetwork load_network(const std::string& path);

void write_network(const std::string& path, const std::vector<RoadSegment>& segments,
                   const std::map<std::string, std::vector<std::string>>& adjacency);

}  // namespace drivetel::mapmatch

#endif
