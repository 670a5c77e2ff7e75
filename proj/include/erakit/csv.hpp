#pragma once

// Minimal locale-independent CSV helpers shared by the table readers and writers.

#include <string>
#include <string_view>
#include <vector>

namespace erakit::csv {

/// Splits one record; handles double-quoted fields with "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Splits text into lines, dropping '\r' and a trailing empty line.
std::vector<std::string_view> lines(std::string_view text);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest round-trip form at 17 significant digits, '.' decimal separator.
std::string format_double(double value);

/// Fixed-point with the given number of decimals.
std::string format_fixed(double value, int decimals);

/// Strict parse of the whole field; throws InvalidInput on failure.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

}  // namespace erakit::csv
