#ifndef DRIVETEL_INGEST_HPP
#define DRIVETEL_INGEST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drivetel/records.hpp"

namespace drivetel::ingest {

enum class TimestampFormat { epoch_seconds, iso8601 };

struct CsvFormat {
    char delimiter = ',';
    bool has_header = true;
};

struct ParsedPhoneLog {
    std::vector<PhoneRecord> records;
    TimestampFormat timestamp_format = TimestampFormat::epoch_seconds;
    std::vector<std::string> warnings;
};

struct ParsedCanLog {
    std::vector<CanRecord> records;
    TimestampFormat timestamp_format = TimestampFormat::epoch_seconds;
    // Raw channel name -> occurrence count, for channels outside the known set.
    std::map<std::string, std::size_t> unmapped_channels;
    std::vector<std::string> warnings;
};

// Columns: trip_id,driver_id,timestamp,lat,lon,speed_mps,heading_deg,active
// Timestamps are epoch seconds or ISO-8601, auto-detected per file.
// Throws ParseError (file:line) on malformed fields or invariant violations,
// ConfigError on an unexpected header.
ParsedPhoneLog parse_phone_log(const std::string& path, const CsvFormat& format = {});

// Columns: trip_id,timestamp,channel,value,active
// Channel names are normalized; unknown channels land in unmapped_channels.
ParsedCanLog parse_can_log(const std::string& path, const CsvFormat& format = {});

void write_phone_csv(const std::string& path, const std::vector<PhoneRecord>& records,
                     char delimiter = ',');
void write_can_csv(const std::string& path, const std::vector<CanRecord>& records,
                   char delimiter = ',');

// One Trip per distinct trip_id over both sources; start/end are min/max
// timestamps, driver_id comes from phone records when present. A trip whose
// records disagree on the active flag throws DataError naming the trip.
std::vector<Trip> build_trips(const std::vector<PhoneRecord>& phone,
                              const std::vector<CanRecord>& can);

// Inventory statistics: per (source, channel) active/inactive observation and
// trip counts, plus per-source sampling-frequency and data-gap histograms.
struct ChannelCounts {
    std::string source;   // "phone" | "can"
    std::string channel;  // canonical channel name
    std::size_t obs_active = 0;
    std::size_t obs_inactive = 0;
    std::size_t trips_active = 0;
    std::size_t trips_inactive = 0;
};

struct IngestReport {
    std::vector<ChannelCounts> rows;  // stable order: phone first, then can channels
    // source -> histogram keyed by bin lower edge. Every consecutive same-trip
    // same-channel pair lands in exactly one of the two histograms.
    std::map<std::string, std::map<double, std::size_t>> frequency_hist;  // Hz bins
    std::map<std::string, std::map<double, std::size_t>> gap_hist;        // seconds bins
    double gap_threshold_s = 5.0;
    double frequency_bin_hz = 0.25;   // bins over (0, 10] Hz
    double gap_bin_s = 5.0;
};

struct InventoryOptions {
    double gap_threshold_s = 5.0;
    double frequency_bin_hz = 0.25;
    double gap_bin_s = 5.0;
};

IngestReport inventory_report(const std::vector<PhoneRecord>& phone,
                              const std::vector<CanRecord>& can,
                              const std::vector<Trip>& trips,
                              const InventoryOptions& options = {});

// "6461k" for large counts, raw digits below 10k (inventory table style).
std::string format_count_k(std::size_t n);

// Aligned-column text table, one row per (source, channel).
std::string inventory_table(const IngestReport& report);
// Versioned JSON document.
std::string inventory_json(const IngestReport& report);

}  // namespace drivetel::ingest

#endif
