#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/model.hpp"

namespace flowhub {

/// An execution platform the registry can hand a workflow to. The template
/// may use `{trs_id}` (URL-encoded `#workflow/<id>`), `{version}`,
/// `{trs_url}` (the URL-encoded TRS version URL) and `{base_url}` (verbatim).
struct Launcher {
  std::string id;
  std::string url_template;
  /// Classes the platform runs; empty means any.
  std::set<ClassId> classes;
};

struct Config {
  std::string doi_prefix = "10.77777";
  std::string base_url = "http://localhost:8080";
  std::string publisher = "FlowHub";
  std::uint64_t max_file_mb = 100;
  bool embargo_hides_listing = false;
  /// Empty: keep everything in memory.
  std::string store_dir;
  std::int64_t token_lifetime_s = 24 * 3600;
  int port = 8080;
  std::vector<std::string> maturity_levels{"work_in_progress", "stable"};
  std::map<std::string, Launcher> launchers;

  std::uint64_t max_file_bytes() const { return max_file_mb * 1024 * 1024; }
};

/// `key = value` lines; `[section]` headers prefix the following keys with
/// `section.`; `#` and `;` start comments; values may be double-quoted.
/// Launchers: `launcher.<id> = <template>` and
/// `launcher.<id>.classes = galaxy, cwl`. Throws Error(invalid_argument) for
/// unknown keys and malformed values.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& file);

/// Substitutes the launcher placeholders for one entry version.
std::string expand_launcher(const Launcher& launcher, std::string_view base_url, EntryId entry, int version);

/// Launchers able to run `workflow_class`, ordered by id.
std::vector<const Launcher*> launchers_for(const Config& config, std::string_view workflow_class);

}  // namespace flowhub
