#pragma once

#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgeal {

// RFC-4180 field: quoted when it contains a comma, quote, CR or LF; embedded
// quotes doubled.
std::string csv_field(std::string_view value);
std::string csv_line(std::span<const std::string> fields);  // with trailing '\n'

// Parses RFC-4180 records, including quoted fields spanning lines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

// Fixed-point formatting independent of the global locale.
std::string format_fixed(double value, int decimals);

}  // namespace edgeal
