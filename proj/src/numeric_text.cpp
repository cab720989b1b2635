#include "nostill/numeric_text.hpp"

#include <array>
#include <charconv>

namespace nostill {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) { return {}; }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty()) { return std::nullopt; }
    // from_chars rejects a leading '+', which some exporters emit.
    if (text.front() == '+') { text.remove_prefix(1); }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) { return std::nullopt; }
    return value;
}

std::optional<long> parse_long(std::string_view text) {
    text = trim(text);
    if (text.empty()) { return std::nullopt; }
    long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) { return std::nullopt; }
    return value;
}

}  // namespace nostill
