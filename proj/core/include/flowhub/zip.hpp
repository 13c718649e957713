#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/util.hpp"

namespace flowhub::zip {

struct Entry {
  std::string path;
  std::string data;
};

struct Limits {
  std::uint64_t max_total_uncompressed = 512ull * 1024 * 1024;
  std::size_t max_entries = 100000;
};

/// Serializes entries in the given order. Every entry carries `mtime`, so equal
/// inputs give byte-identical archives. Entries are deflated when that makes
/// them smaller and stored otherwise.
std::string write(const std::vector<Entry>& entries, Timestamp mtime);

/// Reads every file entry (directory entries are skipped). Throws
/// Error(invalid_argument) for malformed or unsupported archives and
/// Error(size_limit) when the declared or actual decompressed size exceeds
/// the limits.
std::vector<Entry> read(std::string_view archive, const Limits& limits = {});

bool looks_like_zip(std::string_view bytes) noexcept;

}  // namespace flowhub::zip
