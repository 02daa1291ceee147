#ifndef DRIVETEL_RECORDS_HPP
#define DRIVETEL_RECORDS_HPP

#include <optional>
#include <string>
#include <string_view>

namespace drivetel {

// One GPS fix from the phone stream. Angles in degrees (WGS84), speed in m/s,
// timestamp in epoch seconds (fractional allowed).
struct PhoneRecord {
    std::string trip_id;
    std::string driver_id;
    double timestamp = 0.0;
    double latitude = 0.0;
    double longitude = 0.0;
    double speed = 0.0;          // m/s, >= 0
    double heading = 0.0;        // degrees, [0, 360)
    bool active = false;         // information service on for this trip
};

enum class Channel {
    speed,
    rpm,
    throttle,
    throttle_relative,
    throttle_position,
    accel_pedal_d,
    accel_pedal_e,
    fuel_rate,
    brake,
    acceleration,
};

// Canonical lowercase name ("fuel_rate").
std::string_view channel_name(Channel c);
// Display label for report tables ("Fuel Rate").
std::string_view channel_label(Channel c);
// Accepts canonical names and loose aliases ("Fuel Rate", "throttle r", ...).
std::optional<Channel> parse_channel(std::string_view raw);

inline constexpr int kChannelCount = 10;

// One CAN bus sample, units native to the channel.
struct CanRecord {
    std::string trip_id;
    double timestamp = 0.0;
    Channel channel = Channel::speed;
    double value = 0.0;
    bool active = false;
};

// A CAN record with a location borrowed from the aligned phone stream.
struct LocatedCanRecord {
    CanRecord record;
    double latitude = 0.0;
    double longitude = 0.0;
    double matched_phone_timestamp = 0.0;
};

struct Trip {
    std::string trip_id;
    std::string driver_id;  // empty when only CAN records were seen
    bool active = false;
    double start = 0.0;
    double end = 0.0;
    std::size_t sample_count = 0;
};

// mi/h -> m/s, applied once where limits stated in mi/h enter SI code.
inline constexpr double kMetersPerSecondPerMph = 0.44704;

}  // namespace drivetel

#endif
