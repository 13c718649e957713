#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowhub/classes.hpp"
#include "flowhub/model.hpp"

namespace flowhub {

struct CommitInfo {
  std::string commit_id;
  std::string message;
  Timestamp timestamp{};

  bool operator==(const CommitInfo&) const = default;
};

struct Release {
  std::string tag;
  std::string commit_id;
  Timestamp timestamp{};

  bool operator==(const Release&) const = default;
};

struct RepositorySnapshot {
  std::string remote;
  /// Branch or tag name the snapshot was taken from.
  std::string ref;
  std::string commit_id;
  FileTree files;
  /// Newest first, starting at commit_id (bounded by the fetch depth).
  std::vector<CommitInfo> commit_log;
  /// Every tag of the remote that points at a commit, in release order.
  std::vector<Release> tags;

  bool operator==(const RepositorySnapshot&) const = default;
};

struct GitImportOptions {
  std::string git = "git";
  /// History depth for remote clones; local paths are cloned in full.
  int depth = 50;
  std::uint64_t max_bytes = 256ull * 1024 * 1024;
  std::size_t max_files = 10000;
};

/// Accepts `https://` URLs, `file://` URLs and local paths; anything else
/// (ssh, git://, scp-style) is rejected with Error(fetch_error).
bool is_supported_remote(std::string_view remote);

/// Clones `remote` into a scratch directory and reads the tree at `ref`
/// (default: the remote's default branch). Throws Error(fetch_error),
/// Error(ref_not_found) or Error(size_limit). Imports of the same remote are
/// serialized.
RepositorySnapshot import_repository(const std::string& remote, const std::optional<std::string>& ref = {},
                                     const GitImportOptions& options = {});

struct CandidateFile {
  std::string path;
  ClassId class_id;

  bool operator==(const CandidateFile&) const = default;
};

/// Files with a recognised workflow class, ranked: known class before
/// Other, shallower before deeper, then by path. Files only matched by the
/// fallback are not candidates.
std::vector<CandidateFile> detect_workflow_files(const FileTree& files, const ClassRegistry& classes);

/// `README.md` or `README` (case-insensitive), root first, then by depth
/// and path.
std::optional<std::string> extract_readme(const FileTree& files);

/// Tags ordered by commit timestamp, ties broken by tag name.
std::vector<Release> enumerate_releases(const RepositorySnapshot& snapshot);

}  // namespace flowhub
