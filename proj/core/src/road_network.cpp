#include "drivetel/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include <nlohmann/json.hpp>

#include "drivetel/errors.hpp"
#include "drivetel/log.hpp"

namespace drivetel::mapmatch {

namespace {

geo::LatLon network_origin(const std::vector<RoadSegment>& segments) {
    if (segments.empty() || segments.front().polyline.empty()) return {0.0, 0.0};
    return segments.front().polyline.front();
}

}  // namespace

RoadNetwork::RoadNetwork(std::vector<RoadSegment> segments,
                         std::map<std::string, std::vector<std::string>> adjacency)
    : segments_(std::move(segments)), projection_(network_origin(segments_)) {
    id_to_index_.reserve(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        RoadSegment& seg = segments_[i];
        if (seg.polyline.size() < 2) {
            throw DataError("segment " + seg.segment_id + ": needs at least 2 polyline points");
        }
        if (!id_to_index_.emplace(seg.segment_id, static_cast<int>(i)).second) {
            throw DataError("duplicate segment id: " + seg.segment_id);
        }

        std::vector<geo::XY> xy;
        xy.reserve(seg.polyline.size());
        for (const auto& p : seg.polyline) xy.push_back(projection_.to_xy(p));

        std::vector<double> cum(seg.polyline.size(), 0.0);
        double total = 0.0;
        for (std::size_t k = 1; k < seg.polyline.size(); ++k) {
            total += geo::great_circle_m(seg.polyline[k - 1], seg.polyline[k]);
            cum[k] = total;
        }
        seg.length_m = total;
        if (!(seg.length_m > 0.0)) {
            throw DataError("segment " + seg.segment_id + ": zero length");
        }
        projected_.push_back(std::move(xy));
        cumulative_.push_back(std::move(cum));
        if (seg.active) ++active_count_;
    }

    adjacency_.assign(segments_.size(), {});
    for (const auto& [id, neighbours] : adjacency) {
        const int idx = index_of(id);
        if (idx < 0) throw DataError("adjacency references unknown segment: " + id);
        for (const auto& n : neighbours) {
            const int nidx = index_of(n);
            if (nidx < 0) {
                throw DataError("adjacency of " + id + " references unknown segment: " + n);
            }
            if (nidx != idx) adjacency_[idx].push_back(nidx);
        }
    }
    for (auto& nbrs : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }

    for (std::size_t i = 0; i < segments_.size(); ++i) index_segment(static_cast<int>(i));
}

const RoadSegment* RoadNetwork::find(const std::string& segment_id) const {
    const int idx = index_of(segment_id);
    return idx < 0 ? nullptr : &segments_[idx];
}

int RoadNetwork::index_of(const std::string& segment_id) const {
    auto it = id_to_index_.find(segment_id);
    return it == id_to_index_.end() ? -1 : it->second;
}

std::int64_t RoadNetwork::cell_key(double x, double y) const {
    const auto ix = static_cast<std::int64_t>(std::floor(x / cell_size_m_));
    const auto iy = static_cast<std::int64_t>(std::floor(y / cell_size_m_));
    return (ix << 32) ^ (iy & 0xffffffff);
}

void RoadNetwork::index_segment(int idx) {
    const auto& xy = projected_[idx];
    for (std::size_t k = 0; k + 1 < xy.size(); ++k) {
        const double min_x = std::min(xy[k].x, xy[k + 1].x);
        const double max_x = std::max(xy[k].x, xy[k + 1].x);
        const double min_y = std::min(xy[k].y, xy[k + 1].y);
        const double max_y = std::max(xy[k].y, xy[k + 1].y);
        for (double cx = min_x; ; cx += cell_size_m_) {
            for (double cy = min_y; ; cy += cell_size_m_) {
                auto& bucket = grid_[cell_key(cx, cy)];
                if (bucket.empty() || bucket.back() != idx) bucket.push_back(idx);
                if (cy >= max_y) break;
            }
            if (cx >= max_x) break;
        }
    }
}

std::vector<Candidate> RoadNetwork::candidates_near(const geo::LatLon& point,
                                                    double radius_m) const {
    if (radius_m <= 0.0) throw ConfigError("candidate radius must be positive");
    const geo::XY p = projection_.to_xy(point);

    std::vector<int> seen;
    const double reach = radius_m + cell_size_m_;
    for (double cx = p.x - reach; cx <= p.x + reach; cx += cell_size_m_) {
        for (double cy = p.y - reach; cy <= p.y + reach; cy += cell_size_m_) {
            auto it = grid_.find(cell_key(cx, cy));
            if (it == grid_.end()) continue;
            seen.insert(seen.end(), it->second.begin(), it->second.end());
        }
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

    std::vector<Candidate> out;
    for (int idx : seen) {
        const auto proj = geo::project_to_polyline(p, projected_[idx], cumulative_[idx]);
        if (proj.distance_m <= radius_m) {
            out.push_back({segments_[idx].segment_id, proj.distance_m,
                           std::clamp(proj.position_m, 0.0, segments_[idx].length_m)});
        }
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        return a.segment_id < b.segment_id;
    });
    return out;
}

std::optional<double> RoadNetwork::route_distance(const Candidate& from, const Candidate& to,
                                                  double max_route_m) const {
    const int src = index_of(from.segment_id);
    const int dst = index_of(to.segment_id);
    if (src < 0 || dst < 0) return std::nullopt;

    if (src == dst) {
        const double d = std::fabs(to.position_m - from.position_m);
        return d <= max_route_m ? std::optional<double>(d) : std::nullopt;
    }

    const double exit_cost =
        std::min(from.position_m, segments_[src].length_m - from.position_m);
    const double entry_cost = std::min(to.position_m, segments_[dst].length_m - to.position_m);

    // Dijkstra over segments; dist[s] = cost to arrive at segment s's boundary.
    using QueueItem = std::pair<double, int>;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
    std::unordered_map<int, double> dist;
    for (int n : adjacency_[src]) {
        if (exit_cost <= max_route_m) {
            dist[n] = exit_cost;
            queue.push({exit_cost, n});
        }
    }
    while (!queue.empty()) {
        const auto [d, s] = queue.top();
        queue.pop();
        auto it = dist.find(s);
        if (it != dist.end() && d > it->second) continue;
        if (s == dst) {
            const double total = d + entry_cost;
            return total <= max_route_m ? std::optional<double>(total) : std::nullopt;
        }
        const double through = d + segments_[s].length_m;
        if (through > max_route_m) continue;
        for (int n : adjacency_[s]) {
            auto found = dist.find(n);
            if (found == dist.end() || through < found->second) {
                dist[n] = through;
                queue.push({through, n});
            }
        }
    }
    return std::nullopt;
}

RoadNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open network file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("network file " + path + ": " + e.what());
    }
    if (!doc.contains("features") || !doc["features"].is_array()) {
        throw DataError("network file " + path + ": missing features array");
    }

    std::vector<RoadSegment> segments;
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& feature : doc["features"]) {
        RoadSegment seg;
        const auto& props = feature.at("properties");
        seg.segment_id = props.at("segment_id").get<std::string>();
        seg.active = props.value("active", false);
        if (props.contains("adjacent")) {
            adjacency[seg.segment_id] = props["adjacent"].get<std::vector<std::string>>();
        }
        const auto& coords = feature.at("geometry").at("coordinates");
        for (const auto& c : coords) {
            seg.polyline.push_back({c.at(1).get<double>(), c.at(0).get<double>()});
        }
        segments.push_back(std::move(seg));
    }

    RoadNetwork network(std::move(segments), std::move(adjacency));
    log::info("loaded network " + path + ": " + std::to_string(network.segment_count()) +
              " segments, " + std::to_string(network.active_count()) + " active");
    return network;
}

void write_network(const std::string& path, const std::vector<RoadSegment>& segments,
                   const std::map<std::string, std::vector<std::string>>& adjacency) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = nlohmann::ordered_json::array();
    for (const auto& seg : segments) {
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        feature["geometry"]["type"] = "LineString";
        auto coords = nlohmann::ordered_json::array();
        for (const auto& p : seg.polyline) coords.push_back({p.lon, p.lat});
        feature["geometry"]["coordinates"] = std::move(coords);
        feature["properties"]["segment_id"] = seg.segment_id;
        feature["properties"]["active"] = seg.active;
        auto it = adjacency.find(seg.segment_id);
        feature["properties"]["adjacent"] =
            it == adjacency.end() ? std::vector<std::string>{} : it->second;
        doc["features"].push_back(std::move(feature));
    }
    std::ofstream out(path);
    if (!out.is_open()) throw ConfigError("cannot open output file: " + path);
    out << doc.dump(1) << "\n";
}

}  // namespace drivetel::mapmatch
