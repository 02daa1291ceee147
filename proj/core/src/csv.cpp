#include "drivetel/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace drivetel::csv {

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string join(const std::vector<std::string>& fields, char delimiter) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].find(delimiter) != std::string::npos) {
            throw std::invalid_argument("csv field contains the delimiter: " + fields[i]);
        }
        if (i > 0) out.push_back(delimiter);
        out += fields[i];
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

bool parse_double(std::string_view field, double& out) {
    std::string s = trim(field);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool parse_bool(std::string_view field, bool& out) {
    std::string s = trim(field);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "1") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0") {
        out = false;
        return true;
    }
    return false;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool looks_like_iso_timestamp(std::string_view field) {
    // Epoch seconds never contain '-' past position 0 or any ':'.
    std::string s = trim(field);
    return s.find(':') != std::string::npos ||
           (s.size() > 1 && s.find('-', 1) != std::string::npos);
}

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

bool parse_iso_timestamp(std::string_view field, double& epoch_seconds) {
    std::string s = trim(field);
    // YYYY-MM-DD[T ]hh:mm:ss[.fff][Z]
    if (s.size() < 19) return false;
    unsigned year, month, day, hour, minute, second;
    if (!parse_fixed_uint(s, 0, 4, year) || s[4] != '-' ||
        !parse_fixed_uint(s, 5, 2, month) || s[7] != '-' ||
        !parse_fixed_uint(s, 8, 2, day) || (s[10] != 'T' && s[10] != ' ') ||
        !parse_fixed_uint(s, 11, 2, hour) || s[13] != ':' ||
        !parse_fixed_uint(s, 14, 2, minute) || s[16] != ':' ||
        !parse_fixed_uint(s, 17, 2, second)) {
        return false;
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 60) {
        return false;
    }
    double fraction = 0.0;
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
        if (end == pos + 1) return false;
        double scale = 0.1;
        for (std::size_t i = pos + 1; i < end; ++i) {
            fraction += (s[i] - '0') * scale;
            scale *= 0.1;
        }
        pos = end;
    }
    if (pos < s.size()) {
        if (s[pos] != 'Z' || pos + 1 != s.size()) return false;  // only UTC supported
    }
    const std::int64_t days = days_from_civil(year, month, day);
    epoch_seconds =
        static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second + fraction;
    return true;
}

}  // namespace drivetel::csv
