#include <doctest.h>

#include "drivetel/csv.hpp"
#include "drivetel/errors.hpp"
#include "drivetel/ingest.hpp"
#include "drivetel/rng.hpp"
#include "helpers.hpp"

using namespace drivetel;

TEST_CASE("csv split and round-trip formatting") {
    auto fields = csv::split("a,b,,d", ',');
    REQUIRE(fields.size() == 4);
    CHECK(fields[2].empty());

    double v = 0.0;
    CHECK(csv::parse_double(csv::format_double(0.1), v));
    CHECK(v == 0.1);
    CHECK(csv::parse_double(csv::format_double(-1.0 / 3.0), v));
    CHECK(v == -1.0 / 3.0);
    CHECK_FALSE(csv::parse_double("1.2.3", v));
    CHECK_FALSE(csv::parse_double("", v));
}

TEST_CASE("iso-8601 timestamps") {
    double t = 0.0;
    REQUIRE(csv::parse_iso_timestamp("1970-01-01T00:00:00Z", t));
    CHECK(t == 0.0);
    REQUIRE(csv::parse_iso_timestamp("2016-09-13 00:00:00", t));
    CHECK(t == doctest::Approx(1473724800.0));
    REQUIRE(csv::parse_iso_timestamp("2016-09-13T00:00:01.5Z", t));
    CHECK(t == doctest::Approx(1473724801.5));
    CHECK_FALSE(csv::parse_iso_timestamp("2016-13-40T99:00:00", t));
    CHECK(csv::looks_like_iso_timestamp("2016-09-13T00:00:00"));
    CHECK_FALSE(csv::looks_like_iso_timestamp("1473724800.25"));
    CHECK_FALSE(csv::looks_like_iso_timestamp("-12.5"));
}

namespace {

constexpr const char* kPhoneHeader =
    "trip_id,driver_id,timestamp,lat,lon,speed_mps,heading_deg,active\n";

}

TEST_CASE("parse_phone_log happy path preserves order") {
    testutil::TempDir dir("phone");
    testutil::write_file(dir.file("p.csv"), std::string(kPhoneHeader) +
                                                "t1,d1,100.0,37.0,-121.9,3.5,90,true\n"
                                                "t1,d1,101.0,37.001,-121.9,3.6,90,true\n"
                                                "t2,d2,50.0,37.2,-121.8,0,10,false\n");
    const auto parsed = ingest::parse_phone_log(dir.file("p.csv"));
    REQUIRE(parsed.records.size() == 3);
    CHECK(parsed.records[0].trip_id == "t1");
    CHECK(parsed.records[2].trip_id == "t2");
    CHECK(parsed.records[1].timestamp == 101.0);
    CHECK(parsed.records[2].active == false);
    CHECK(parsed.timestamp_format == ingest::TimestampFormat::epoch_seconds);
}

TEST_CASE("parse_phone_log rejects out-of-range latitude with line number") {
    testutil::TempDir dir("phone_bad");
    testutil::write_file(dir.file("p.csv"), std::string(kPhoneHeader) +
                                                "t1,d1,100.0,37.0,-121.9,3.5,90,true\n"
                                                "t1,d1,101.0,91.2,-121.9,3.5,90,true\n");
    try {
        ingest::parse_phone_log(dir.file("p.csv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 3);
        CHECK(std::string(e.what()).find("lat") != std::string::npos);
    }
}

TEST_CASE("parse_phone_log rejects negative speed and unknown columns") {
    testutil::TempDir dir("phone_bad2");
    testutil::write_file(dir.file("neg.csv"),
                         std::string(kPhoneHeader) + "t1,d1,100.0,37.0,-121.9,-1,90,true\n");
    CHECK_THROWS_AS(ingest::parse_phone_log(dir.file("neg.csv")), ParseError);

    testutil::write_file(dir.file("cols.csv"),
                         "trip,driver_id,timestamp,lat,lon,speed_mps,heading_deg,active\n");
    CHECK_THROWS_AS(ingest::parse_phone_log(dir.file("cols.csv")), ConfigError);
}

TEST_CASE("parse_phone_log auto-detects ISO-8601 timestamps") {
    testutil::TempDir dir("phone_iso");
    testutil::write_file(dir.file("p.csv"),
                         std::string(kPhoneHeader) +
                             "t1,d1,2016-09-13T00:00:00Z,37.0,-121.9,3.5,90,true\n"
                             "t1,d1,2016-09-13T00:00:01.5Z,37.0,-121.9,3.6,90,true\n");
    const auto parsed = ingest::parse_phone_log(dir.file("p.csv"));
    REQUIRE(parsed.records.size() == 2);
    CHECK(parsed.timestamp_format == ingest::TimestampFormat::iso8601);
    CHECK(parsed.records[0].timestamp == doctest::Approx(1473724800.0));
    CHECK(parsed.records[1].timestamp - parsed.records[0].timestamp ==
          doctest::Approx(1.5));
}

TEST_CASE("parse_phone_log empty file warns, yields nothing") {
    testutil::TempDir dir("phone_empty");
    testutil::write_file(dir.file("p.csv"), "");
    const auto parsed = ingest::parse_phone_log(dir.file("p.csv"));
    CHECK(parsed.records.empty());
    REQUIRE_FALSE(parsed.warnings.empty());
}

TEST_CASE("parse_can_log normalizes names and routes unknown channels") {
    testutil::TempDir dir("can");
    testutil::write_file(dir.file("c.csv"), "trip_id,timestamp,channel,value,active\n"
                                            "t1,100.0,Fuel Rate,820.5,true\n"
                                            "t1,100.1,XYZ,1,true\n"
                                            "t1,100.2,Throttle R,20,true\n");
    const auto parsed = ingest::parse_can_log(dir.file("c.csv"));
    REQUIRE(parsed.records.size() == 2);
    CHECK(parsed.records[0].channel == Channel::fuel_rate);
    CHECK(parsed.records[1].channel == Channel::throttle_relative);
    REQUIRE(parsed.unmapped_channels.count("XYZ") == 1);
    CHECK(parsed.unmapped_channels.at("XYZ") == 1);
}

TEST_CASE("parse_can_log rejects non-numeric values with line number") {
    testutil::TempDir dir("can_bad");
    testutil::write_file(dir.file("c.csv"), "trip_id,timestamp,channel,value,active\n"
                                            "t1,100.0,rpm,abc,true\n");
    try {
        ingest::parse_can_log(dir.file("c.csv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
    }
}

TEST_CASE("3 Hz stream of 300 records: count and hand-computed span") {
    testutil::TempDir dir("can_3hz");
    std::string body = "trip_id,timestamp,channel,value,active\n";
    for (int k = 0; k < 300; ++k) {
        body += "t1," + csv::format_double(k / 3.0) + ",speed,10,true\n";
    }
    testutil::write_file(dir.file("c.csv"), body);
    const auto parsed = ingest::parse_can_log(dir.file("c.csv"));
    REQUIRE(parsed.records.size() == 300);
    const auto trips = ingest::build_trips({}, parsed.records);
    REQUIRE(trips.size() == 1);
    // 299 intervals of 1/3 s: the stream covers just under 100 s.
    CHECK(trips[0].start == 0.0);
    CHECK(trips[0].end == doctest::Approx(299.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("build_trips aggregates and validates") {
    std::vector<PhoneRecord> phone;
    PhoneRecord r;
    r.trip_id = "a";
    r.driver_id = "d1";
    r.active = true;
    for (double t : {10.0, 12.0, 11.0}) {
        r.timestamp = t;
        phone.push_back(r);
    }
    r.trip_id = "b";
    r.driver_id = "d2";
    r.active = false;
    r.timestamp = 5.0;
    phone.push_back(r);

    const auto trips = ingest::build_trips(phone, {});
    REQUIRE(trips.size() == 2);
    CHECK(trips[0].trip_id == "a");
    CHECK(trips[0].start == 10.0);
    CHECK(trips[0].end == 12.0);
    CHECK(trips[0].sample_count == 3);
    CHECK(trips[1].driver_id == "d2");

    // Mixed active flags within one trip are an integrity error.
    phone[1].active = false;
    CHECK_THROWS_AS(ingest::build_trips(phone, {}), DataError);
    try {
        ingest::build_trips(phone, {});
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("a") != std::string::npos);
    }
}

TEST_CASE("inventory: constant 1 s spacing lands in the 1 Hz bin") {
    std::vector<PhoneRecord> phone;
    PhoneRecord r;
    r.trip_id = "a";
    r.active = true;
    for (int k = 0; k < 20; ++k) {
        r.timestamp = 100.0 + k;
        phone.push_back(r);
    }
    const auto trips = ingest::build_trips(phone, {});
    const auto report = ingest::inventory_report(phone, {}, trips);
    REQUIRE(report.frequency_hist.count("phone") == 1);
    const auto& hist = report.frequency_hist.at("phone");
    REQUIRE(hist.size() == 1);
    CHECK(hist.begin()->first == 1.0);
    CHECK(hist.begin()->second == 19);
    CHECK(report.gap_hist.count("phone") == 0);
}

TEST_CASE("inventory: gap threshold separates a single 8 s gap") {
    std::vector<PhoneRecord> phone;
    PhoneRecord r;
    r.trip_id = "a";
    r.active = false;
    for (double t : {0.0, 1.0, 2.0, 10.0, 11.0}) {
        r.timestamp = t;
        phone.push_back(r);
    }
    const auto trips = ingest::build_trips(phone, {});
    const auto report = ingest::inventory_report(phone, {}, trips);
    REQUIRE(report.gap_hist.count("phone") == 1);
    const auto& gaps = report.gap_hist.at("phone");
    REQUIRE(gaps.size() == 1);
    CHECK(gaps.begin()->first == 5.0);  // bin [5, 10) holds the 8 s gap
    CHECK(gaps.begin()->second == 1);
    // 3 frequency events + 1 gap event = 4 consecutive pairs, each counted once.
    std::size_t freq_events = 0;
    for (const auto& [bin, count] : report.frequency_hist.at("phone")) freq_events += count;
    CHECK(freq_events == 3);
}

TEST_CASE("inventory is permutation-invariant and conserves pair events") {
    synth::Rng rng(99);
    std::vector<PhoneRecord> phone;
    PhoneRecord r;
    r.active = true;
    for (int trip = 0; trip < 3; ++trip) {
        r.trip_id = "trip" + std::to_string(trip);
        double t = 1000.0 * trip;
        for (int k = 0; k < 50; ++k) {
            t += rng.uniform(0.2, 8.0);
            r.timestamp = t;
            phone.push_back(r);
        }
    }
    const auto trips = ingest::build_trips(phone, {});
    const auto base = ingest::inventory_report(phone, {}, trips);

    // Shuffle.
    std::vector<PhoneRecord> shuffled = phone;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
    }
    const auto again = ingest::inventory_report(shuffled, {}, trips);
    CHECK(base.frequency_hist == again.frequency_hist);
    CHECK(base.gap_hist == again.gap_hist);

    std::size_t events = 0;
    for (const auto& [src, hist] : base.frequency_hist) {
        for (const auto& [bin, count] : hist) events += count;
    }
    for (const auto& [src, hist] : base.gap_hist) {
        for (const auto& [bin, count] : hist) events += count;
    }
    CHECK(events == 3 * 49);  // one event per consecutive same-trip pair
}

TEST_CASE("inventory table mirrors the counts-in-thousands row shape") {
    CHECK(ingest::format_count_k(6461000) == "6461k");
    CHECK(ingest::format_count_k(9941000) == "9941k");
    CHECK(ingest::format_count_k(2535) == "2535");

    ingest::IngestReport report;
    ingest::ChannelCounts row;
    row.source = "can";
    row.channel = "speed";
    row.obs_active = 6461000;
    row.obs_inactive = 9941000;
    row.trips_active = 2535;
    row.trips_inactive = 4406;
    report.rows.push_back(row);
    const std::string table = ingest::inventory_table(report);
    CHECK(table.find("CAN Speed") != std::string::npos);
    CHECK(table.find("6461k") != std::string::npos);
    CHECK(table.find("9941k") != std::string::npos);
    CHECK(table.find("2535") != std::string::npos);
    CHECK(table.find("4406") != std::string::npos);
}

TEST_CASE("phone and CAN CSV round-trip reproduces records exactly") {
    synth::Rng rng(4242);
    std::vector<PhoneRecord> phone;
    for (int i = 0; i < 100; ++i) {
        PhoneRecord r;
        r.trip_id = "t" + std::to_string(i % 5);
        r.driver_id = "d" + std::to_string(i % 3);
        r.timestamp = 1473724800.0 + rng.uniform() * 1e5;
        r.latitude = rng.uniform(-90.0, 90.0);
        r.longitude = rng.uniform(-180.0, 180.0);
        r.speed = rng.uniform(0.0, 70.0);
        r.heading = rng.uniform(0.0, 360.0);
        r.active = (rng.next_u64() & 1) != 0;
        phone.push_back(r);
    }
    testutil::TempDir dir("roundtrip");
    ingest::write_phone_csv(dir.file("p.csv"), phone);
    const auto parsed = ingest::parse_phone_log(dir.file("p.csv"));
    REQUIRE(parsed.records.size() == phone.size());
    for (std::size_t i = 0; i < phone.size(); ++i) {
        CHECK(parsed.records[i].trip_id == phone[i].trip_id);
        CHECK(parsed.records[i].driver_id == phone[i].driver_id);
        CHECK(parsed.records[i].timestamp == phone[i].timestamp);
        CHECK(parsed.records[i].latitude == phone[i].latitude);
        CHECK(parsed.records[i].longitude == phone[i].longitude);
        CHECK(parsed.records[i].speed == phone[i].speed);
        CHECK(parsed.records[i].heading == phone[i].heading);
        CHECK(parsed.records[i].active == phone[i].active);
    }

    std::vector<CanRecord> can;
    for (int i = 0; i < 100; ++i) {
        can.push_back({"t" + std::to_string(i % 4), rng.uniform() * 1e6,
                       static_cast<Channel>(i % kChannelCount), rng.normal(0.0, 100.0),
                       (i % 2) == 0});
    }
    ingest::write_can_csv(dir.file("c.csv"), can);
    const auto can_parsed = ingest::parse_can_log(dir.file("c.csv"));
    REQUIRE(can_parsed.records.size() == can.size());
    for (std::size_t i = 0; i < can.size(); ++i) {
        CHECK(can_parsed.records[i].trip_id == can[i].trip_id);
        CHECK(can_parsed.records[i].timestamp == can[i].timestamp);
        CHECK(can_parsed.records[i].channel == can[i].channel);
        CHECK(can_parsed.records[i].value == can[i].value);
        CHECK(can_parsed.records[i].active == can[i].active);
    }
}
