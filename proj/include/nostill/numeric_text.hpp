#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace nostill {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Strict full-token parse; surrounding whitespace is ignored.
std::optional<double> parse_double(std::string_view text);
std::optional<long> parse_long(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace nostill
