#include "drivetel/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drivetel/csv.hpp"
#include "drivetel/errors.hpp"
#include "drivetel/log.hpp"

namespace drivetel::ingest {

namespace {

constexpr const char* kPhoneHeader[] = {"trip_id", "driver_id", "timestamp", "lat",
                                        "lon",     "speed_mps", "heading_deg", "active"};
constexpr const char* kCanHeader[] = {"trip_id", "timestamp", "channel", "value", "active"};

template <std::size_t N>
void check_header(const std::string& path, std::string_view line, char delimiter,
                  const char* const (&expected)[N]) {
    auto fields = csv::split(line, delimiter);
    if (fields.size() != N) {
        throw ConfigError(path + ": header has " + std::to_string(fields.size()) +
                          " columns, expected " + std::to_string(N));
    }
    for (std::size_t i = 0; i < N; ++i) {
        if (csv::trim(fields[i]) != expected[i]) {
            throw ConfigError(path + ": unknown column \"" + csv::trim(fields[i]) +
                              "\" at position " + std::to_string(i + 1) + ", expected \"" +
                              expected[i] + "\"");
        }
    }
}

double parse_timestamp_field(const std::string& path, std::size_t line_no,
                             std::string_view field, TimestampFormat format) {
    double t = 0.0;
    bool ok = format == TimestampFormat::iso8601 ? csv::parse_iso_timestamp(field, t)
                                                 : csv::parse_double(field, t);
    if (!ok || !std::isfinite(t)) {
        throw ParseError(path, line_no, "bad timestamp field \"" + csv::trim(field) + "\"");
    }
    return t;
}

double parse_numeric_field(const std::string& path, std::size_t line_no,
                           std::string_view field, const char* name) {
    double v = 0.0;
    if (!csv::parse_double(field, v) || !std::isfinite(v)) {
        throw ParseError(path, line_no,
                         std::string("bad ") + name + " field \"" + csv::trim(field) + "\"");
    }
    return v;
}

bool parse_bool_field(const std::string& path, std::size_t line_no, std::string_view field) {
    bool b = false;
    if (!csv::parse_bool(field, b)) {
        throw ParseError(path, line_no, "bad active field \"" + csv::trim(field) + "\"");
    }
    return b;
}

struct LineReader {
    explicit LineReader(const std::string& path) : path_(path), in_(path) {
        if (!in_.is_open()) throw ConfigError("cannot open input file: " + path);
    }
    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }
    std::size_t line_no() const { return line_no_; }

    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

TimestampFormat detect_format(std::string_view timestamp_field) {
    return csv::looks_like_iso_timestamp(timestamp_field) ? TimestampFormat::iso8601
                                                          : TimestampFormat::epoch_seconds;
}

const char* format_name(TimestampFormat f) {
    return f == TimestampFormat::iso8601 ? "iso8601" : "epoch_seconds";
}

}  // namespace

ParsedPhoneLog parse_phone_log(const std::string& path, const CsvFormat& format) {
    ParsedPhoneLog out;
    LineReader reader(path);
    std::string line;

    if (format.has_header) {
        if (!reader.next(line)) {
            out.warnings.push_back(path + ": empty file");
            log::warn(out.warnings.back());
            return out;
        }
        check_header(path, line, format.delimiter, kPhoneHeader);
    }

    bool format_detected = false;
    while (reader.next(line)) {
        const std::size_t line_no = reader.line_no();
        auto fields = csv::split(line, format.delimiter);
        if (fields.size() != 8) {
            throw ParseError(path, line_no,
                             "expected 8 fields, got " + std::to_string(fields.size()));
        }
        if (!format_detected) {
            out.timestamp_format = detect_format(fields[2]);
            format_detected = true;
            log::info(path + ": timestamp format " + format_name(out.timestamp_format));
        }
        PhoneRecord rec;
        rec.trip_id = csv::trim(fields[0]);
        rec.driver_id = csv::trim(fields[1]);
        rec.timestamp = parse_timestamp_field(path, line_no, fields[2], out.timestamp_format);
        rec.latitude = parse_numeric_field(path, line_no, fields[3], "lat");
        rec.longitude = parse_numeric_field(path, line_no, fields[4], "lon");
        rec.speed = parse_numeric_field(path, line_no, fields[5], "speed_mps");
        rec.heading = parse_numeric_field(path, line_no, fields[6], "heading_deg");
        rec.active = parse_bool_field(path, line_no, fields[7]);

        if (rec.trip_id.empty()) throw ParseError(path, line_no, "empty trip_id");
        if (rec.latitude < -90.0 || rec.latitude > 90.0) {
            throw ParseError(path, line_no,
                             "lat out of [-90,90]: " + csv::format_double(rec.latitude));
        }
        if (rec.longitude < -180.0 || rec.longitude > 180.0) {
            throw ParseError(path, line_no,
                             "lon out of [-180,180]: " + csv::format_double(rec.longitude));
        }
        if (rec.speed < 0.0) {
            throw ParseError(path, line_no,
                             "negative speed_mps: " + csv::format_double(rec.speed));
        }
        rec.heading = std::fmod(rec.heading, 360.0);
        if (rec.heading < 0.0) rec.heading += 360.0;
        out.records.push_back(std::move(rec));
    }

    if (out.records.empty()) {
        out.warnings.push_back(path + ": no phone records");
        log::warn(out.warnings.back());
    }
    return out;
}

ParsedCanLog parse_can_log(const std::string& path, const CsvFormat& format) {
    ParsedCanLog out;
    LineReader reader(path);
    std::string line;

    if (format.has_header) {
        if (!reader.next(line)) {
            out.warnings.push_back(path + ": empty file");
            log::warn(out.warnings.back());
            return out;
        }
        check_header(path, line, format.delimiter, kCanHeader);
    }

    bool format_detected = false;
    while (reader.next(line)) {
        const std::size_t line_no = reader.line_no();
        auto fields = csv::split(line, format.delimiter);
        if (fields.size() != 5) {
            throw ParseError(path, line_no,
                             "expected 5 fields, got " + std::to_string(fields.size()));
        }
        if (!format_detected) {
            out.timestamp_format = detect_format(fields[1]);
            format_detected = true;
            log::info(path + ": timestamp format " + format_name(out.timestamp_format));
        }
        const std::string raw_channel = csv::trim(fields[2]);
        const auto channel = parse_channel(raw_channel);
        if (!channel) {
            ++out.unmapped_channels[raw_channel];
            continue;
        }
        CanRecord rec;
        rec.trip_id = csv::trim(fields[0]);
        rec.timestamp = parse_timestamp_field(path, line_no, fields[1], out.timestamp_format);
        rec.channel = *channel;
        rec.value = parse_numeric_field(path, line_no, fields[3], "value");
        rec.active = parse_bool_field(path, line_no, fields[4]);
        if (rec.trip_id.empty()) throw ParseError(path, line_no, "empty trip_id");
        out.records.push_back(std::move(rec));
    }

    if (!out.unmapped_channels.empty()) {
        std::size_t total = 0;
        for (const auto& [name, count] : out.unmapped_channels) total += count;
        out.warnings.push_back(path + ": " + std::to_string(total) +
                               " records on unmapped channels");
        log::warn(out.warnings.back());
    }
    if (out.records.empty()) {
        out.warnings.push_back(path + ": no CAN records");
        log::warn(out.warnings.back());
    }
    return out;
}

void write_phone_csv(const std::string& path, const std::vector<PhoneRecord>& records,
                     char delimiter) {
    std::ofstream outf(path);
    if (!outf.is_open()) throw ConfigError("cannot open output file: " + path);
    std::vector<std::string> header(std::begin(kPhoneHeader), std::end(kPhoneHeader));
    outf << csv::join(header, delimiter) << "\n";
    for (const auto& r : records) {
        outf << csv::join({r.trip_id, r.driver_id, csv::format_double(r.timestamp),
                           csv::format_double(r.latitude), csv::format_double(r.longitude),
                           csv::format_double(r.speed), csv::format_double(r.heading),
                           r.active ? "true" : "false"},
                          delimiter)
             << "\n";
    }
}

void write_can_csv(const std::string& path, const std::vector<CanRecord>& records,
                   char delimiter) {
    std::ofstream outf(path);
    if (!outf.is_open()) throw ConfigError("cannot open output file: " + path);
    std::vector<std::string> header(std::begin(kCanHeader), std::end(kCanHeader));
    outf << csv::join(header, delimiter) << "\n";
    for (const auto& r : records) {
        outf << csv::join({r.trip_id, csv::format_double(r.timestamp),
                           std::string(channel_name(r.channel)), csv::format_double(r.value),
                           r.active ? "true" : "false"},
                          delimiter)
             << "\n";
    }
}

namespace {

struct TripAccumulator {
    std::string driver_id;
    bool active = false;
    bool has_records = false;
    double start = 0.0;
    double end = 0.0;
    std::size_t count = 0;

    void add(const std::string& trip_id, double t, bool record_active,
             const std::string& driver) {
        if (!has_records) {
            has_records = true;
            active = record_active;
            start = end = t;
        } else {
            if (record_active != active) {
                throw DataError("trip " + trip_id + ": mixed active flags");
            }
            start = std::min(start, t);
            end = std::max(end, t);
        }
        if (!driver.empty()) driver_id = driver;
        ++count;
    }
};

}  // namespace

std::vector<Trip> build_trips(const std::vector<PhoneRecord>& phone,
                              const std::vector<CanRecord>& can) {
    std::map<std::string, TripAccumulator> acc;
    for (const auto& r : phone) acc[r.trip_id].add(r.trip_id, r.timestamp, r.active, r.driver_id);
    for (const auto& r : can) acc[r.trip_id].add(r.trip_id, r.timestamp, r.active, "");

    std::vector<Trip> trips;
    trips.reserve(acc.size());
    for (const auto& [trip_id, a] : acc) {
        Trip t;
        t.trip_id = trip_id;
        t.driver_id = a.driver_id;
        t.active = a.active;
        t.start = a.start;
        t.end = a.end;
        t.sample_count = a.count;
        trips.push_back(std::move(t));
    }
    return trips;
}

namespace {

// Frequency bins are lower-inclusive [k*w, (k+1)*w) over (0, 10] Hz; the top
// bin absorbs anything faster (including zero/duplicate deltas), so every
// consecutive-pair event is counted exactly once across the two histograms.
void count_delta(IngestReport& report, const std::string& source, double dt) {
    if (dt > report.gap_threshold_s) {
        const double key = std::floor(dt / report.gap_bin_s) * report.gap_bin_s;
        ++report.gap_hist[source][key];
        return;
    }
    const double top_key = 10.0 - report.frequency_bin_hz;
    double key;
    if (dt <= 0.0) {
        key = top_key;
    } else {
        const double f = 1.0 / dt;
        key = std::floor(f / report.frequency_bin_hz) * report.frequency_bin_hz;
        key = std::min(std::max(key, 0.0), top_key);
    }
    ++report.frequency_hist[source][key];
}

template <typename Key>
void count_deltas_for_groups(IngestReport& report, const std::string& source,
                             std::map<Key, std::vector<double>>& groups) {
    for (auto& [key, times] : groups) {
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i < times.size(); ++i) {
            count_delta(report, source, times[i] - times[i - 1]);
        }
    }
}

}  // namespace

IngestReport inventory_report(const std::vector<PhoneRecord>& phone,
                              const std::vector<CanRecord>& can,
                              const std::vector<Trip>& trips,
                              const InventoryOptions& options) {
    IngestReport report;
    report.gap_threshold_s = options.gap_threshold_s;
    report.frequency_bin_hz = options.frequency_bin_hz;
    report.gap_bin_s = options.gap_bin_s;

    std::map<std::string, bool> trip_active;
    for (const auto& t : trips) trip_active[t.trip_id] = t.active;

    // Phone: a single "speed" dataset.
    {
        ChannelCounts row;
        row.source = "phone";
        row.channel = "speed";
        std::set<std::string> active_trips, inactive_trips;
        for (const auto& r : phone) {
            (r.active ? row.obs_active : row.obs_inactive)++;
            (r.active ? active_trips : inactive_trips).insert(r.trip_id);
        }
        row.trips_active = active_trips.size();
        row.trips_inactive = inactive_trips.size();
        if (row.obs_active + row.obs_inactive > 0) report.rows.push_back(row);
    }

    // CAN: one row per channel present, canonical enum order.
    std::map<Channel, ChannelCounts> can_rows;
    std::map<Channel, std::pair<std::set<std::string>, std::set<std::string>>> can_trips;
    for (const auto& r : can) {
        auto& row = can_rows[r.channel];
        row.source = "can";
        row.channel = std::string(channel_name(r.channel));
        (r.active ? row.obs_active : row.obs_inactive)++;
        auto& [act, inact] = can_trips[r.channel];
        (r.active ? act : inact).insert(r.trip_id);
    }
    for (auto& [channel, row] : can_rows) {
        row.trips_active = can_trips[channel].first.size();
        row.trips_inactive = can_trips[channel].second.size();
        report.rows.push_back(row);
    }

    // Histograms from consecutive same-trip (and, for CAN, same-channel)
    // timestamp deltas. Sorting makes the report permutation-invariant.
    {
        std::map<std::string, std::vector<double>> phone_groups;
        for (const auto& r : phone) phone_groups[r.trip_id].push_back(r.timestamp);
        count_deltas_for_groups(report, "phone", phone_groups);
    }
    {
        std::map<std::pair<std::string, Channel>, std::vector<double>> can_groups;
        for (const auto& r : can) can_groups[{r.trip_id, r.channel}].push_back(r.timestamp);
        count_deltas_for_groups(report, "can", can_groups);
    }
    return report;
}

std::string format_count_k(std::size_t n) {
    if (n >= 10000) {
        return std::to_string(static_cast<long long>(std::llround(n / 1000.0))) + "k";
    }
    return std::to_string(n);
}

namespace {

std::string dataset_label(const ChannelCounts& row) {
    std::string source = row.source == "phone" ? "Phone" : "CAN";
    const auto channel = parse_channel(row.channel);
    std::string label = channel ? std::string(channel_label(*channel)) : row.channel;
    return source + " " + label;
}

}  // namespace

std::string inventory_table(const IngestReport& report) {
    std::vector<std::vector<std::string>> table;
    table.push_back({"Dataset", "Obs (A)", "Obs (I)", "Trips (A)", "Trips (I)"});
    for (const auto& row : report.rows) {
        table.push_back({dataset_label(row), format_count_k(row.obs_active),
                         format_count_k(row.obs_inactive), std::to_string(row.trips_active),
                         std::to_string(row.trips_inactive)});
    }
    std::vector<std::size_t> widths(table[0].size(), 0);
    for (const auto& r : table) {
        for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
    }
    std::ostringstream out;
    for (const auto& r : table) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << r[c];
            if (c + 1 < r.size()) {
                out << std::string(widths[c] - r[c].size() + 2, ' ');
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string inventory_json(const IngestReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        j["rows"].push_back({{"source", row.source},
                             {"channel", row.channel},
                             {"obs_active", row.obs_active},
                             {"obs_inactive", row.obs_inactive},
                             {"trips_active", row.trips_active},
                             {"trips_inactive", row.trips_inactive}});
    }
    auto hist_to_json = [](const std::map<double, std::size_t>& hist) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [edge, count] : hist) arr.push_back({{"bin", edge}, {"count", count}});
        return arr;
    };
    j["gap_threshold_s"] = report.gap_threshold_s;
    j["frequency_bin_hz"] = report.frequency_bin_hz;
    j["gap_bin_s"] = report.gap_bin_s;
    for (const auto& [source, hist] : report.frequency_hist) {
        j["frequency_hist"][source] = hist_to_json(hist);
    }
    for (const auto& [source, hist] : report.gap_hist) {
        j["gap_hist"][source] = hist_to_json(hist);
    }
    return j.dump(2) + "\n";
}

}  // namespace drivetel::ingest
