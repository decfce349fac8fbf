#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uavloc {

// Locale-independent fixed-point formatting; decimal separator is always '.'.
std::string format_fixed(double value, int precision = 6);

// Locale-independent parse of a decimal number; nullopt on any trailing
// garbage or malformed input.
std::optional<double> parse_double(std::string_view text);
std::optional<long> parse_long(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace uavloc
