#ifndef DRIVETEL_CSV_HPP
#define DRIVETEL_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace drivetel::csv {

// Plain delimited text, no quoting. Fields containing the delimiter are
// rejected on write, so parse(write(x)) == x holds for everything we emit.
std::vector<std::string_view> split(std::string_view line, char delimiter);

std::string join(const std::vector<std::string>& fields, char delimiter);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double value);

// Strict numeric parse of a whole field; throws nothing, reports via flag.
bool parse_double(std::string_view field, double& out);
bool parse_bool(std::string_view field, bool& out);  // true/false/1/0, case-insensitive

// Epoch seconds, fractional allowed, or ISO-8601 (YYYY-MM-DD[T ]hh:mm:ss[.fff][Z]).
bool looks_like_iso_timestamp(std::string_view field);
bool parse_iso_timestamp(std::string_view field, double& epoch_seconds);

std::string trim(std::string_view s);

}  // namespace drivetel::csv

#endif
