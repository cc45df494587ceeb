#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace taskrec {

// Shortest decimal rendering that parses back to the identical 64-bit value.
std::string format_double(double value);

// Full-string parses; nullopt when the text is not exactly one value.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);
std::optional<std::uint64_t> parse_uint(std::string_view text);

} // namespace taskrec
