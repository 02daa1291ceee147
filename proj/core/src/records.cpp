#include "drivetel/records.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace drivetel {

namespace {

struct ChannelNames {
    Channel channel;
    std::string_view canonical;
    std::string_view label;
};

constexpr std::array<ChannelNames, kChannelCount> kNames = {{
    {Channel::speed, "speed", "Speed"},
    {Channel::rpm, "rpm", "RPM"},
    {Channel::throttle, "throttle", "Throttle"},
    {Channel::throttle_relative, "throttle_relative", "Throttle R"},
    {Channel::throttle_position, "throttle_position", "Throttle P"},
    {Channel::accel_pedal_d, "accel_pedal_d", "Acc. Pedal D"},
    {Channel::accel_pedal_e, "accel_pedal_e", "Acc. Pedal E"},
    {Channel::fuel_rate, "fuel_rate", "Fuel Rate"},
    {Channel::brake, "brake", "Brake"},
    {Channel::acceleration, "acceleration", "Acceleration"},
}};

// Lowercase, runs of non-alphanumerics collapsed to single underscores.
std::string normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (char ch : raw) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            if (pending_sep && !out.empty()) out.push_back('_');
            pending_sep = false;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else {
            pending_sep = true;
        }
    }
    return out;
}

}  // namespace

std::string_view channel_name(Channel c) {
    return kNames[static_cast<std::size_t>(c)].canonical;
}

std::string_view channel_label(Channel c) {
    return kNames[static_cast<std::size_t>(c)].label;
}

std::optional<Channel> parse_channel(std::string_view raw) {
    const std::string n = normalize(raw);
    for (const auto& entry : kNames) {
        if (n == entry.canonical) return entry.channel;
    }
    // Loose aliases seen in the wild.
    if (n == "fuel" || n == "fuelrate") return Channel::fuel_rate;
    if (n == "throttle_r" || n == "throttle_rel") return Channel::throttle_relative;
    if (n == "throttle_p" || n == "throttle_pos" || n == "throttle_b") {
        return Channel::throttle_position;
    }
    if (n == "acc_pedal_d" || n == "pedal_d" || n == "accel_pedal_position_d") {
        return Channel::accel_pedal_d;
    }
    if (n == "acc_pedal_e" || n == "pedal_e" || n == "accel_pedal_position_e") {
        return Channel::accel_pedal_e;
    }
    if (n == "accel" || n == "acc") return Channel::acceleration;
    return std::nullopt;
}

}  // namespace drivetel
