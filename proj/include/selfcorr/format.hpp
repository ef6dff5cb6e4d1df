#pragma once

#include <string>
#include <string_view>

namespace selfcorr {

/// Shortest-ambiguity-free decimal form with 17 significant digits; locale
/// independent and round-trips every finite double exactly.
std::string format_double(double value);

/// Strict parse of a whole token ("inf" and "-inf" accepted). Returns false on
/// trailing garbage or an empty token.
bool parse_double(std::string_view token, double& out);

}  // namespace selfcorr
