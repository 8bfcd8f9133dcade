#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gammasort {

/// Shortest decimal form that parses back to the identical double.
/// Independent of the global locale.
std::string format_double(double value);

/// Locale-independent strict parse; throws std::runtime_error on trailing junk.
double parse_double(std::string_view text);
unsigned long long parse_u64(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

}  // namespace gammasort
