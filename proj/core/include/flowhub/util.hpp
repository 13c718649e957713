#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowhub {

using Timestamp = std::chrono::sys_seconds;

namespace text {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool iequals(std::string_view a, std::string_view b);

/// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);

/// Shell-style wildcard match (`*`, `?`, `[...]`). Patterns without a `/`
/// are matched against the basename of `path`.
bool glob_match(std::string_view pattern, std::string_view path);

std::string basename(std::string_view path);
std::string dirname(std::string_view path);
std::size_t path_depth(std::string_view path);

/// Replaces characters outside [A-Za-z0-9_.-] with '_'.
std::string sanitize_identifier(std::string_view s);

bool is_valid_utf8(std::string_view s);

std::string url_encode(std::string_view s);
/// Decodes `%XX` escapes; malformed escapes are kept verbatim.
std::string url_decode(std::string_view s);

}  // namespace text

namespace timefmt {

/// `2024-05-01T12:00:00Z`
std::string to_iso8601(Timestamp t);
/// Accepts `YYYY-MM-DD` and `YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM)`.
std::optional<Timestamp> parse_iso8601(std::string_view s);
int year_of(Timestamp t);
Timestamp from_unix(std::int64_t seconds);
std::int64_t to_unix(Timestamp t);

}  // namespace timefmt

namespace digest {

std::string sha256_hex(std::string_view bytes);

}  // namespace digest

namespace base64 {

std::string encode(std::string_view bytes);
/// Throws Error(invalid_argument) on malformed input.
std::string decode(std::string_view text);

}  // namespace base64

/// Hex string of `n` cryptographically random bytes.
std::string random_hex(std::size_t n);

/// Best-effort IANA media type from a file name.
std::string guess_media_type(std::string_view path);

}  // namespace flowhub
