#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace som {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Lower-cased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);

/// Shortest round-trip decimal form; integral values print without a point.
std::string format_number(double v);

/// Parses the whole (trimmed) string as a finite real number.
std::optional<double> parse_number(std::string_view s);

/// Round half away from zero.
std::int64_t round_half_away(double v);

/// 64-bit FNV-1a, used for stable digests in logs and tests.
std::uint64_t fnv1a64(std::string_view s);
std::string hex_digest(std::string_view s);

}  // namespace som
