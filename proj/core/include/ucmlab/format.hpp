#pragma once

#include <string>
#include <string_view>

namespace ucmlab {

// 17 significant digits, locale independent.
std::string format_double(double v);
// Locale independent; throws std::invalid_argument on garbage or trailing text.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace ucmlab
