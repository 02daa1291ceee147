#include "drivetel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "drivetel/errors.hpp"
#include "drivetel/geo.hpp"
#include "drivetel/ingest.hpp"
#include "drivetel/records.hpp"
#include "drivetel/road_network.hpp"

namespace drivetel::synth {

void validate_synth_config(const SynthConfig& c) {
    if (c.phone_rate_hz <= 0.0 || c.can_rate_hz <= 0.0) {
        throw ConfigError("synth: sample rates must be positive");
    }
    if (c.xi_active >= 1.0 || c.xi_inactive >= 1.0) {
        throw ConfigError("synth: tail shapes must be < 1");
    }
    if (c.active_fraction < 0.0 || c.active_fraction > 1.0) {
        throw ConfigError("synth: active_fraction must be in [0,1]");
    }
    if (c.n_trips == 0 || c.n_segments < 1) {
        throw ConfigError("synth: need at least one trip and one segment");
    }
    if (c.trip_duration_min_s <= 0.0 || c.trip_duration_max_s < c.trip_duration_min_s) {
        throw ConfigError("synth: bad trip duration range");
    }
    if (c.tail_sigma <= 0.0 || c.tail_probability < 0.0 || c.tail_probability > 1.0) {
        throw ConfigError("synth: bad tail parameters");
    }
}

double draw_accel_magnitude(Rng& rng, const SynthConfig& c, bool active, bool decel) {
    double a = decel ? rng.uniform(c.base_decel_min, c.base_decel_max)
                     : rng.uniform(c.base_accel_min, c.base_accel_max);
    if (active) a += c.mean_shift_mps2;
    if (rng.uniform() < c.tail_probability) {
        a += rng.gpd(c.tail_sigma, active ? c.xi_active : c.xi_inactive);
    }
    return std::clamp(a, 0.05, c.accel_cap_mps2);
}

std::vector<double> sample_gpd(std::size_t n, double sigma, double xi, std::uint64_t seed) {
    if (n < 1) throw ConfigError("sample_gpd: n must be >= 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.gpd(sigma, xi);
    return out;
}

namespace {

constexpr double kMetersPerDegLat = geo::kEarthRadiusM * std::numbers::pi / 180.0;

// Square grid network; the segments nearest the grid centre are active.
struct GridNetwork {
    std::vector<mapmatch::RoadSegment> segments;
    std::map<std::string, std::vector<std::string>> adjacency;
    // node id -> indices of incident segments
    std::vector<std::vector<int>> incidence;
    std::vector<std::pair<int, int>> segment_nodes;  // (node_a, node_b) per segment
    std::vector<geo::LatLon> nodes;
};

GridNetwork build_grid_network(const SynthConfig& c) {
    // Smallest square grid with at least n_segments edges: 2n(n-1) >= target.
    std::size_t side = 2;
    while (2 * side * (side - 1) < c.n_segments) ++side;

    GridNetwork net;
    const double dlat = c.segment_spacing_m / kMetersPerDegLat;
    const double dlon =
        c.segment_spacing_m / (kMetersPerDegLat * std::cos(c.base_lat * std::numbers::pi / 180.0));

    auto node_id = [side](std::size_t i, std::size_t j) {
        return static_cast<int>(j * side + i);
    };
    net.nodes.resize(side * side);
    for (std::size_t j = 0; j < side; ++j) {
        for (std::size_t i = 0; i < side; ++i) {
            net.nodes[static_cast<std::size_t>(node_id(i, j))] = {
                c.base_lat + static_cast<double>(j) * dlat,
                c.base_lon + static_cast<double>(i) * dlon};
        }
    }

    struct Edge {
        int a, b;
    };
    std::vector<Edge> edges;
    for (std::size_t j = 0; j < side; ++j) {
        for (std::size_t i = 0; i + 1 < side; ++i) {
            edges.push_back({node_id(i, j), node_id(i + 1, j)});
        }
    }
    for (std::size_t j = 0; j + 1 < side; ++j) {
        for (std::size_t i = 0; i < side; ++i) {
            edges.push_back({node_id(i, j), node_id(i, j + 1)});
        }
    }
    edges.resize(std::min(edges.size(), c.n_segments));

    // Activate the segments closest to the grid centre.
    const double mid = (static_cast<double>(side) - 1.0) / 2.0;
    std::vector<std::pair<double, std::size_t>> by_centre_distance;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto ax = static_cast<double>(edges[e].a % static_cast<int>(side));
        const auto ay = static_cast<double>(edges[e].a / static_cast<int>(side));
        const auto bx = static_cast<double>(edges[e].b % static_cast<int>(side));
        const auto by = static_cast<double>(edges[e].b / static_cast<int>(side));
        const double cx = 0.5 * (ax + bx) - mid;
        const double cy = 0.5 * (ay + by) - mid;
        by_centre_distance.emplace_back(cx * cx + cy * cy, e);
    }
    std::sort(by_centre_distance.begin(), by_centre_distance.end());
    std::vector<bool> active(edges.size(), false);
    const auto n_active = static_cast<std::size_t>(
        std::llround(c.active_fraction * static_cast<double>(edges.size())));
    for (std::size_t k = 0; k < n_active && k < edges.size(); ++k) {
        active[by_centre_distance[k].second] = true;
    }

    net.incidence.resize(net.nodes.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        mapmatch::RoadSegment seg;
        seg.segment_id = std::to_string(10000 + e);
        seg.active = active[e];
        seg.polyline = {net.nodes[static_cast<std::size_t>(edges[e].a)],
                        net.nodes[static_cast<std::size_t>(edges[e].b)]};
        seg.length_m = geo::great_circle_m(seg.polyline[0], seg.polyline[1]);
        net.segments.push_back(std::move(seg));
        net.segment_nodes.emplace_back(edges[e].a, edges[e].b);
        net.incidence[static_cast<std::size_t>(edges[e].a)].push_back(static_cast<int>(e));
        net.incidence[static_cast<std::size_t>(edges[e].b)].push_back(static_cast<int>(e));
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto& neighbours = net.adjacency[net.segments[e].segment_id];
        for (int node : {edges[e].a, edges[e].b}) {
            for (int other : net.incidence[static_cast<std::size_t>(node)]) {
                if (other != static_cast<int>(e)) {
                    neighbours.push_back(net.segments[static_cast<std::size_t>(other)].segment_id);
                }
            }
        }
        std::sort(neighbours.begin(), neighbours.end());
        neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
    }
    return net;
}

// Walks the vehicle along the grid, hopping to a random incident segment at
// every node (avoiding immediate U-turns when possible).
class RouteCursor {
  public:
    RouteCursor(const GridNetwork& net, Rng& rng) : net_(net), rng_(rng) {
        segment_ = static_cast<int>(rng_.next_u64() % net_.segments.size());
        entry_node_ = net_.segment_nodes[static_cast<std::size_t>(segment_)].first;
        position_m_ = 0.0;
    }

    void advance(double distance_m) {
        while (distance_m > 0.0) {
            const double len = net_.segments[static_cast<std::size_t>(segment_)].length_m;
            const double remaining = len - position_m_;
            if (distance_m < remaining) {
                position_m_ += distance_m;
                return;
            }
            distance_m -= remaining;
            const int exit_node = other_node(segment_, entry_node_);
            const auto& incident = net_.incidence[static_cast<std::size_t>(exit_node)];
            int next = segment_;
            if (incident.size() > 1) {
                do {
                    next = incident[rng_.next_u64() % incident.size()];
                } while (next == segment_);
            }
            entry_node_ = exit_node;
            segment_ = next;
            position_m_ = 0.0;
        }
    }

    geo::LatLon position() const {
        const auto& seg = net_.segments[static_cast<std::size_t>(segment_)];
        const double t = position_m_ / seg.length_m;
        const geo::LatLon from = net_.nodes[static_cast<std::size_t>(entry_node_)];
        const geo::LatLon to =
            net_.nodes[static_cast<std::size_t>(other_node(segment_, entry_node_))];
        return {from.lat + t * (to.lat - from.lat), from.lon + t * (to.lon - from.lon)};
    }

    double bearing_deg() const {
        const geo::LatLon from = net_.nodes[static_cast<std::size_t>(entry_node_)];
        const geo::LatLon to =
            net_.nodes[static_cast<std::size_t>(other_node(segment_, entry_node_))];
        const double dy = to.lat - from.lat;
        const double dx = (to.lon - from.lon) *
                          std::cos(from.lat * std::numbers::pi / 180.0);
        double b = std::atan2(dx, dy) * 180.0 / std::numbers::pi;
        if (b < 0.0) b += 360.0;
        return b;
    }

    const std::string& segment_id() const {
        return net_.segments[static_cast<std::size_t>(segment_)].segment_id;
    }

  private:
    int other_node(int segment, int node) const {
        const auto& [a, b] = net_.segment_nodes[static_cast<std::size_t>(segment)];
        return node == a ? b : a;
    }

    const GridNetwork& net_;
    Rng& rng_;
    int segment_ = 0;
    int entry_node_ = 0;
    double position_m_ = 0.0;
};

struct Phase {
    double start_s = 0.0;  // relative to trip start
    double duration_s = 0.0;
    double v0 = 0.0;
    double accel = 0.0;
    double dist0 = 0.0;  // cumulative distance at phase start
};

std::vector<Phase> build_phases(Rng& rng, const SynthConfig& c, bool active, double duration_s) {
    std::vector<Phase> phases;
    double t = 0.0;
    double v = 0.0;
    double dist = 0.0;
    int mode = 0;  // 0 accelerate, 1 cruise, 2 decelerate, 3 dwell
    while (t < duration_s) {
        Phase p;
        p.start_s = t;
        p.v0 = v;
        p.dist0 = dist;
        switch (mode) {
            case 0: {
                const double a = draw_accel_magnitude(rng, c, active, false);
                const double target = rng.uniform(c.cruise_speed_min, c.cruise_speed_max);
                p.accel = a;
                p.duration_s = std::max(target - v, 0.0) / a;
                break;
            }
            case 1:
                p.accel = 0.0;
                p.duration_s = rng.uniform(c.cruise_duration_min_s, c.cruise_duration_max_s);
                break;
            case 2: {
                const double a = draw_accel_magnitude(rng, c, active, true);
                p.accel = -a;
                p.duration_s = v / a;
                break;
            }
            default:
                p.accel = 0.0;
                p.v0 = 0.0;
                p.duration_s = rng.uniform(c.dwell_min_s, c.dwell_max_s);
                break;
        }
        p.duration_s = std::min(p.duration_s, duration_s - t);
        t += p.duration_s;
        v = p.v0 + p.accel * p.duration_s;
        if (mode == 2 && v < 1e-9) v = 0.0;
        dist = p.dist0 + p.v0 * p.duration_s + 0.5 * p.accel * p.duration_s * p.duration_s;
        if (p.duration_s > 0.0) phases.push_back(p);
        mode = (mode + 1) % 4;
    }
    return phases;
}

struct Kinematics {
    double speed = 0.0;
    double accel = 0.0;
    double distance = 0.0;
};

Kinematics kinematics_at(const std::vector<Phase>& phases, double t) {
    // Phases are queried in nondecreasing t; linear scan from a hint would
    // also work, binary search keeps it stateless.
    std::size_t lo = 0;
    std::size_t hi = phases.size();
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (phases[mid].start_s <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const Phase& p = phases[lo];
    const double tau = std::clamp(t - p.start_s, 0.0, p.duration_s);
    Kinematics k;
    k.speed = std::max(0.0, p.v0 + p.accel * tau);
    k.accel = p.accel;
    k.distance = p.dist0 + p.v0 * tau + 0.5 * p.accel * tau * tau;
    return k;
}

struct GapWindows {
    std::vector<std::pair<double, double>> windows;

    bool covers(double t) const {
        for (const auto& [a, b] : windows) {
            if (t >= a && t < b) return true;
        }
        return false;
    }
};

GapWindows draw_gaps(Rng& rng, double duration_s, double rate_per_s, double min_s,
                     const std::function<double(Rng&)>& extra) {
    GapWindows gaps;
    if (rate_per_s <= 0.0) return gaps;
    double t = rng.exponential(1.0 / rate_per_s);
    while (t < duration_s) {
        const double dur = min_s + extra(rng);
        gaps.windows.emplace_back(t, t + dur);
        t += dur + rng.exponential(1.0 / rate_per_s);
    }
    return gaps;
}

std::string zero_padded(std::size_t value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

DatasetSummary generate_dataset(const SynthConfig& config, const std::string& out_dir) {
    validate_synth_config(config);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw ConfigError("synth: cannot create output directory " + out_dir);
    }
    {
        // Fail fast on read-only targets before generating anything.
        const auto probe = std::filesystem::path(out_dir) / ".write_probe";
        std::ofstream test(probe);
        if (!test.is_open()) throw ConfigError("synth: output directory not writable: " + out_dir);
        test.close();
        std::filesystem::remove(probe, ec);
    }

    const GridNetwork grid = build_grid_network(config);

    std::vector<PhoneRecord> phone;
    std::vector<CanRecord> can;
    nlohmann::ordered_json truth;
    truth["seed"] = config.seed;
    truth["params"] = {{"mean_shift_mps2", config.mean_shift_mps2},
                       {"xi_active", config.xi_active},
                       {"xi_inactive", config.xi_inactive},
                       {"tail_sigma", config.tail_sigma},
                       {"tail_probability", config.tail_probability}};
    truth["network"] = {{"n_segments", grid.segments.size()}};
    truth["trips"] = nlohmann::ordered_json::array();

    std::size_t n_active_segments = 0;
    for (const auto& s : grid.segments) {
        if (s.active) ++n_active_segments;
    }
    truth["network"]["n_active_segments"] = n_active_segments;

    for (std::size_t trip = 0; trip < config.n_trips; ++trip) {
        Rng rng = Rng::for_stream(config.seed, trip + 1);
        const std::string trip_id = "T" + zero_padded(trip + 1, 5);
        const std::string driver_id = "D" + zero_padded(trip % config.n_drivers + 1, 3);
        const bool active = trip >= config.n_trips / 2;
        const double duration =
            rng.uniform(config.trip_duration_min_s, config.trip_duration_max_s);
        const double start =
            config.start_epoch_s +
            static_cast<double>(trip) * (config.trip_duration_max_s + 120.0);

        const std::vector<Phase> phases = build_phases(rng, config, active, duration);
        RouteCursor cursor(grid, rng);
        const GapWindows phone_gaps =
            draw_gaps(rng, duration, config.phone_gap_rate_per_s, config.gap_min_s,
                      [&](Rng& r) { return r.exponential(config.phone_gap_mean_extra_s); });
        const GapWindows can_gaps =
            draw_gaps(rng, duration, config.can_gap_rate_per_s, config.gap_min_s,
                      [&](Rng& r) { return r.gpd(config.can_gap_sigma_s, config.can_gap_xi); });

        // Merge phone and CAN sample times so the route cursor advances once.
        struct Event {
            double t_rel;
            bool is_phone;
            std::size_t index;
        };
        std::vector<Event> events;
        const auto n_phone = static_cast<std::size_t>(duration * config.phone_rate_hz);
        const auto n_can = static_cast<std::size_t>(duration * config.can_rate_hz);
        events.reserve(n_phone + n_can);
        for (std::size_t k = 0; k < n_phone; ++k) {
            events.push_back({static_cast<double>(k) / config.phone_rate_hz, true, k});
        }
        for (std::size_t k = 0; k < n_can; ++k) {
            double jitter = std::clamp(rng.normal(0.0, 0.02), -0.1, 0.1);
            if (k == 0) jitter = std::fabs(jitter);
            events.push_back({static_cast<double>(k) / config.can_rate_hz + jitter, false, k});
        }
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& a, const Event& b) { return a.t_rel < b.t_rel; });

        nlohmann::ordered_json trip_truth;
        trip_truth["trip_id"] = trip_id;
        trip_truth["driver_id"] = driver_id;
        trip_truth["active"] = active;
        trip_truth["start"] = start;
        trip_truth["duration_s"] = duration;
        auto truth_samples = nlohmann::ordered_json::array();

        double last_distance = 0.0;
        const bool emit_fuel_rate = trip % 10 < 3;  // vehicle-dependent channel
        for (const Event& ev : events) {
            const Kinematics kin = kinematics_at(phases, ev.t_rel);
            cursor.advance(kin.distance - last_distance);
            last_distance = kin.distance;
            const double t_abs = start + ev.t_rel;

            if (ev.is_phone) {
                const geo::LatLon true_pos = cursor.position();
                if (config.write_truth_samples) {
                    truth_samples.push_back({t_abs, true_pos.lat, true_pos.lon,
                                             cursor.segment_id(), kin.speed, kin.accel});
                }
                if (phone_gaps.covers(ev.t_rel)) continue;
                PhoneRecord rec;
                rec.trip_id = trip_id;
                rec.driver_id = driver_id;
                rec.timestamp = t_abs;
                const double dn = rng.normal(0.0, config.gps_sigma_m);
                const double de = rng.normal(0.0, config.gps_sigma_m);
                rec.latitude = true_pos.lat + dn / kMetersPerDegLat;
                rec.longitude = true_pos.lon +
                                de / (kMetersPerDegLat *
                                      std::cos(true_pos.lat * std::numbers::pi / 180.0));
                rec.speed = std::max(0.0, kin.speed + rng.normal(0.0, config.speed_sigma_mps));
                if (kin.speed == 0.0) rec.speed = 0.0;  // stationary fixes report zero
                rec.heading = std::fmod(cursor.bearing_deg() + rng.normal(0.0, 5.0) + 360.0,
                                        360.0);
                rec.active = active;
                phone.push_back(std::move(rec));
            } else {
                if (can_gaps.covers(ev.t_rel)) continue;
                auto push = [&](Channel channel, double value) {
                    can.push_back({trip_id, t_abs, channel, value, active});
                };
                const double v = kin.speed;
                const double a = kin.accel;
                push(Channel::speed, std::max(0.0, v + rng.normal(0.0, 0.1)));
                push(Channel::acceleration, a + rng.normal(0.0, 0.02));
                push(Channel::rpm, std::max(650.0, 800.0 + 120.0 * v + 400.0 * std::max(a, 0.0) +
                                                       rng.normal(0.0, 30.0)));
                const double throttle =
                    std::clamp(25.0 + 2.0 * v + 18.0 * std::max(a, 0.0) + rng.normal(0.0, 2.0),
                               0.0, 100.0);
                push(Channel::throttle, throttle);
                push(Channel::throttle_relative, 0.4 * throttle);
                push(Channel::throttle_position, std::clamp(1.15 * throttle, 0.0, 100.0));
                push(Channel::accel_pedal_d,
                     std::clamp(20.0 + 1.5 * v + 22.0 * std::max(a, 0.0) + rng.normal(0.0, 2.0),
                                0.0, 100.0));
                push(Channel::accel_pedal_e,
                     std::clamp(18.0 + 1.4 * v + 20.0 * std::max(a, 0.0) + rng.normal(0.0, 2.0),
                                0.0, 100.0));
                if (emit_fuel_rate) {
                    push(Channel::fuel_rate,
                         std::max(0.0, 500.0 + 250.0 * v + 2200.0 * std::max(a, 0.0) +
                                           rng.normal(0.0, 50.0)));
                }
                push(Channel::brake, a < -0.3 ? 1.0 : 0.0);
            }
        }
        if (config.write_truth_samples) trip_truth["samples"] = std::move(truth_samples);
        truth["trips"].push_back(std::move(trip_truth));
    }

    DatasetSummary summary;
    const std::filesystem::path dir(out_dir);
    summary.phone_path = (dir / "phone.csv").string();
    summary.can_path = (dir / "can.csv").string();
    summary.network_path = (dir / "network.json").string();
    summary.truth_path = (dir / "truth.json").string();
    summary.n_phone_records = phone.size();
    summary.n_can_records = can.size();
    summary.n_segments = grid.segments.size();
    summary.n_active_segments = n_active_segments;

    ingest::write_phone_csv(summary.phone_path, phone);
    ingest::write_can_csv(summary.can_path, can);
    mapmatch::write_network(summary.network_path, grid.segments, grid.adjacency);
    std::ofstream truth_out(summary.truth_path);
    if (!truth_out.is_open()) throw ConfigError("synth: cannot write " + summary.truth_path);
    truth_out << truth.dump(1) << "\n";
    return summary;
}

}  // namespace drivetel::synth
