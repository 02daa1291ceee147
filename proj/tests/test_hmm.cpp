#include <cmath>
#include <doctest.h>

#include "drivetel/errors.hpp"
#include "drivetel/mapmatch.hpp"
#include "drivetel/rng.hpp"
#include "helpers.hpp"

using namespace drivetel;
using mapmatch::Candidate;
using mapmatch::GpsFix;
using mapmatch::HmmParams;
using mapmatch::RoadNetwork;
using mapmatch::RoadSegment;

namespace {

RoadSegment segment(const std::string& id, geo::LatLon a, geo::LatLon b, bool active = false) {
    RoadSegment s;
    s.segment_id = id;
    s.polyline = {a, b};
    s.active = active;
    return s;
}

// Exhaustive maximization over all candidate sequences, accumulating the
// score in the same order the decoder does.
struct BruteForceResult {
    std::vector<std::size_t> states;
    double score = -std::numeric_limits<double>::infinity();
};

BruteForceResult brute_force_decode(const std::vector<GpsFix>& track,
                                    const std::vector<std::vector<Candidate>>& candidates,
                                    const RoadNetwork& network, const HmmParams& params) {
    BruteForceResult best;
    std::vector<std::size_t> states(track.size(), 0);

    const std::size_t n = track.size();
    while (true) {
        double score = mapmatch::emission_log_density(candidates[0][states[0]].distance_m,
                                                      params.sigma_z_m);
        for (std::size_t i = 1; i < n; ++i) {
            const auto& prev = candidates[i - 1][states[i - 1]];
            const auto& cur = candidates[i][states[i]];
            const double gc = geo::great_circle_m(track[i - 1].position, track[i].position);
            const auto route = network.route_distance(prev, cur, params.max_route_m);
            const double trans = route.has_value()
                                     ? mapmatch::transition_log_density(*route, gc,
                                                                        params.beta_m)
                                     : params.no_route_log_prob;
            score = score + trans +
                    mapmatch::emission_log_density(cur.distance_m, params.sigma_z_m);
        }
        if (score > best.score) {
            best.score = score;
            best.states = states;
        }
        // Next sequence (odometer increment).
        std::size_t pos = 0;
        while (pos < n) {
            if (++states[pos] < candidates[pos].size()) break;
            states[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    return best;
}

double viterbi_path_score(const std::vector<GpsFix>& track, const mapmatch::MatchResult& match,
                          const RoadNetwork& network, const HmmParams& params) {
    double score = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < track.size(); ++i) {
        REQUIRE(match.points[i].has_value());
        const auto& p = *match.points[i];
        const Candidate cur{p.segment_id, p.distance_m, p.position_m};
        if (first) {
            score = mapmatch::emission_log_density(cur.distance_m, params.sigma_z_m);
            first = false;
        } else {
            const auto& q = *match.points[i - 1];
            const Candidate prev{q.segment_id, q.distance_m, q.position_m};
            const double gc = geo::great_circle_m(track[i - 1].position, track[i].position);
            const auto route = network.route_distance(prev, cur, params.max_route_m);
            const double trans =
                route.has_value()
                    ? mapmatch::transition_log_density(*route, gc, params.beta_m)
                    : params.no_route_log_prob;
            score = score + trans +
                    mapmatch::emission_log_density(cur.distance_m, params.sigma_z_m);
        }
    }
    return score;
}

// Two parallel 3-segment chains ~30 m apart: up to 4 candidates per fix.
struct ToyWorld {
    std::vector<RoadSegment> segments;
    std::map<std::string, std::vector<std::string>> adjacency;
};

ToyWorld make_toy_world() {
    ToyWorld world;
    const double dlat = 0.0009;  // ~100 m hops going north
    const double offset = 0.00034;  // ~30 m east-west separation
    for (int chain = 0; chain < 2; ++chain) {
        const double lon = -121.9 + chain * offset;
        for (int k = 0; k < 3; ++k) {
            const std::string id = "c" + std::to_string(chain) + "s" + std::to_string(k);
            world.segments.push_back(
                segment(id, {37.0 + k * dlat, lon}, {37.0 + (k + 1) * dlat, lon}));
            if (k > 0) {
                const std::string prev = "c" + std::to_string(chain) + "s" + std::to_string(k - 1);
                world.adjacency[id].push_back(prev);
                world.adjacency[prev].push_back(id);
            }
        }
    }
    return world;
}

}  // namespace

TEST_CASE("emission density matches the direct formula") {
    const double log_density = mapmatch::emission_log_density(4.07, 4.07);
    CHECK(std::exp(log_density) == doctest::Approx(0.0594).epsilon(1e-3));
    // Transition density at zero discrepancy is 1/beta.
    CHECK(std::exp(mapmatch::transition_log_density(100.0, 100.0, 3.0)) ==
          doctest::Approx(1.0 / 3.0));
}

TEST_CASE("viterbi equals brute force on random toy instances") {
    const ToyWorld world = make_toy_world();
    const RoadNetwork network(world.segments, world.adjacency);
    HmmParams params;
    params.radius_m = 45.0;

    synth::Rng rng(31337);
    int decoded = 0;
    for (int instance = 0; instance < 100; ++instance) {
        const std::size_t n_points = 2 + rng.next_u64() % 4;  // 2..5
        std::vector<GpsFix> track;
        double t = 0.0;
        for (std::size_t i = 0; i < n_points; ++i) {
            t += 1.0;
            const double along = rng.uniform(0.0, 0.0027);
            const double across = rng.uniform(-0.0002, 0.00054);
            track.push_back({t, {37.0 + along, -121.9 + across}});
        }

        std::vector<std::vector<Candidate>> candidates(n_points);
        bool all_have_candidates = true;
        for (std::size_t i = 0; i < n_points; ++i) {
            candidates[i] = network.candidates_near(track[i].position, params.radius_m);
            REQUIRE(candidates[i].size() <= 4);
            if (candidates[i].empty()) all_have_candidates = false;
        }
        if (!all_have_candidates) continue;

        const auto match = mapmatch::hmm_match(track, network, params);
        const auto oracle = brute_force_decode(track, candidates, network, params);
        ++decoded;

        bool same_states = true;
        for (std::size_t i = 0; i < n_points; ++i) {
            REQUIRE(match.points[i].has_value());
            if (match.points[i]->segment_id != candidates[i][oracle.states[i]].segment_id) {
                same_states = false;
            }
        }
        if (!same_states) {
            // A genuine tie: the decoded path must score exactly the optimum.
            CHECK(viterbi_path_score(track, match, network, params) == oracle.score);
        } else {
            CHECK(viterbi_path_score(track, match, network, params) == oracle.score);
        }
    }
    CHECK(decoded >= 80);  // the toy geometry leaves few fixes uncovered
}

TEST_CASE("all points near one straight segment match it") {
    const auto seg = segment("only", {37.0, -121.9}, {37.002, -121.9});
    const RoadNetwork network({seg}, {});
    std::vector<GpsFix> track;
    for (int i = 0; i < 10; ++i) {
        track.push_back({static_cast<double>(i), {37.0 + i * 0.0002, -121.9000005}});
    }
    const auto match = mapmatch::hmm_match(track, network, {});
    REQUIRE(match.matched_count() == track.size());
    for (const auto& p : match.points) CHECK(p->segment_id == "only");
}

TEST_CASE("fixes without candidates stay unmatched and break the chain") {
    const auto seg = segment("only", {37.0, -121.9}, {37.002, -121.9});
    const RoadNetwork network({seg}, {});
    std::vector<GpsFix> track = {
        {0.0, {37.0, -121.9}},
        {1.0, {37.05, -121.5}},  // far away from everything
        {2.0, {37.001, -121.9}},
    };
    const auto match = mapmatch::hmm_match(track, network, {});
    CHECK(match.points[0].has_value());
    CHECK_FALSE(match.points[1].has_value());
    CHECK(match.points[2].has_value());
    CHECK(match.matched_count() == 2);
}

TEST_CASE("multiple coverage holes produce independent decoded chains") {
    const auto seg = segment("only", {37.0, -121.9}, {37.004, -121.9});
    const RoadNetwork network({seg}, {});
    std::vector<GpsFix> track;
    for (int i = 0; i < 9; ++i) {
        const bool hole = i == 2 || i == 3 || i == 6;
        track.push_back({static_cast<double>(i),
                         hole ? geo::LatLon{38.5, -120.0}
                              : geo::LatLon{37.0 + i * 0.0004, -121.9}});
    }
    const auto match = mapmatch::hmm_match(track, network, {});
    CHECK(match.matched_count() == 6);
    for (int i : {2, 3, 6}) CHECK_FALSE(match.points[static_cast<std::size_t>(i)].has_value());
    for (int i : {0, 1, 4, 5, 7, 8}) {
        CHECK(match.points[static_cast<std::size_t>(i)]->segment_id == "only");
    }
}

TEST_CASE("matching is invariant under uniform time shift") {
    const ToyWorld world = make_toy_world();
    const RoadNetwork network(world.segments, world.adjacency);
    std::vector<GpsFix> track;
    synth::Rng rng(5);
    for (int i = 0; i < 8; ++i) {
        track.push_back({static_cast<double>(i),
                         {37.0 + i * 0.0003, -121.9 + rng.uniform(-0.0001, 0.0001)}});
    }
    const auto base = mapmatch::hmm_match(track, network, {});
    std::vector<GpsFix> shifted = track;
    for (auto& fix : shifted) fix.timestamp += 12345.0;
    const auto moved = mapmatch::hmm_match(shifted, network, {});
    REQUIRE(base.points.size() == moved.points.size());
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        REQUIRE(base.points[i].has_value() == moved.points[i].has_value());
        if (base.points[i]) CHECK(base.points[i]->segment_id == moved.points[i]->segment_id);
    }
}

TEST_CASE("log-domain decoding survives long trajectories") {
    const auto seg = segment("long", {37.0, -121.9}, {37.2, -121.9});
    const RoadNetwork network({seg}, {});
    std::vector<GpsFix> track;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
        track.push_back({static_cast<double>(i), {37.0 + i * (0.2 / n), -121.9}});
    }
    const auto match = mapmatch::hmm_match(track, network, {});
    CHECK(match.matched_count() == n);
}

TEST_CASE("filter_active partitions by matched segment flag") {
    auto active_seg = segment("a", {37.0, -121.9}, {37.001, -121.9}, true);
    auto other_seg = segment("b", {37.01, -121.9}, {37.011, -121.9}, false);
    const RoadNetwork network({active_seg, other_seg}, {});

    std::vector<PhoneRecord> records(3);
    records[0].timestamp = 0.0;
    records[0].latitude = 37.0005;
    records[0].longitude = -121.9;
    records[1].timestamp = 1.0;
    records[1].latitude = 37.0105;
    records[1].longitude = -121.9;
    records[2].timestamp = 2.0;
    records[2].latitude = 38.5;  // unmatched
    records[2].longitude = -120.0;

    const auto match = mapmatch::hmm_match(mapmatch::track_from_phone(records), network, {});
    const auto partition = mapmatch::filter_active(records, match, network);
    CHECK(partition.active_indices == std::vector<std::size_t>{0});
    CHECK(partition.other_indices == std::vector<std::size_t>{1, 2});
    CHECK(partition.active_indices.size() + partition.other_indices.size() == records.size());
}

TEST_CASE("match CSV round-trips through read_match_csv") {
    testutil::TempDir dir("match_csv");
    mapmatch::MatchResult match;
    match.timestamps = {1.0, 2.0, 3.0};
    match.points = {mapmatch::MatchedPoint{"s1", 4.5, 10.0}, std::nullopt,
                    mapmatch::MatchedPoint{"s2", 1.25, 0.5}};
    mapmatch::write_match_csv(dir.file("m.csv"), "trip9", match);
    const auto loaded = mapmatch::read_match_csv(dir.file("m.csv"));
    REQUIRE(loaded.count("trip9") == 1);
    const auto& m = loaded.at("trip9");
    REQUIRE(m.timestamps.size() == 3);
    CHECK(m.points[0]->segment_id == "s1");
    CHECK(m.points[0]->distance_m == 4.5);
    CHECK_FALSE(m.points[1].has_value());
    CHECK(m.points[2]->position_m == 0.5);
    CHECK(m.at_time(3.0)->segment_id == "s2");
    CHECK(m.at_time(2.0) == nullptr);
}

TEST_CASE("empty trajectory is a precondition error") {
    const auto seg = segment("only", {37.0, -121.9}, {37.002, -121.9});
    const RoadNetwork network({seg}, {});
    CHECK_THROWS_AS(mapmatch::hmm_match({}, network, {}), DataError);
}
