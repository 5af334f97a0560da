#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers and guarded functions.
namespace fbac::text {

/// Length of the well-formed UTF-8 sequence starting at `pos`, or 0 if the
/// bytes there are not valid UTF-8 (overlongs and surrogates are rejected).
std::size_t utf8_sequence_length(std::string_view s, std::size_t pos);

bool is_valid_utf8(std::string_view s);

/// Number of code points; invalid bytes count as one each.
std::size_t code_point_count(std::string_view s);

/// Longest prefix of at most `max_bytes` bytes that does not split a sequence.
std::string_view truncate_bytes(std::string_view s, std::size_t max_bytes);

/// Prefix holding at most `max_chars` code points.
std::string_view truncate_code_points(std::string_view s, std::size_t max_chars);

std::vector<std::string> split(std::string_view s, char sep);

/// Splits on '\n'. A trailing newline does not produce an empty final line.
std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string_view trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

/// 64-bit FNV-1a, used for stable digests in audit records and fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

}  // namespace fbac::text
