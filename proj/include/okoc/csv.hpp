#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace okoc::csv {

/// Shortest representation that round-trips exactly, '.' decimal separator.
std::string format_double(double v);

/// Splits one record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);

/// Throws ArgumentError mentioning `line_no` on malformed input.
double parse_double(std::string_view cell, int line_no);

}  // namespace okoc::csv
