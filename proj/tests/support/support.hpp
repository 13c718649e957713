#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <string_view>

#include "flowhub/crate.hpp"
#include "flowhub/registry.hpp"
#include "flowhub/process.hpp"

namespace flowhub::testing {

std::filesystem::path fixture(std::string_view relative);
std::string read_file(const std::filesystem::path& path);
/// Every regular file below `dir`, keyed by its relative path.
FileTree load_tree(const std::filesystem::path& dir);

Timestamp at(std::string_view iso8601);

/// Settable clock shared by copies.
class ManualClock {
 public:
  explicit ManualClock(Timestamp start = at("2024-03-01T09:00:00Z"));
  Timestamp now() const;
  void advance(std::chrono::seconds by);
  void set(Timestamp t);
  std::function<Timestamp()> fn() const;

 private:
  std::shared_ptr<std::atomic<std::int64_t>> seconds_;
};

/// Entry with one version whose wizard-editable fields are randomized.
WorkflowEntry random_entry(std::mt19937& rng, EntryId id);

/// Names of wizard-editable fields that differ between `entry` and what
/// read_crate recovered from its crate. Empty means a faithful round trip.
std::vector<std::string> crate_mismatches(const WorkflowEntry& entry, const CrateContents& read);

/// One link-value of an RFC 8288 Link header. Parameter names are
/// lower-cased; quoted values are unescaped.
struct ParsedLink {
  std::string target;
  std::map<std::string, std::string> params;
};

/// Character-level Link header parser, written independently of the server.
/// Throws std::invalid_argument on malformed input.
std::vector<ParsedLink> parse_link_header(std::string_view header);

FileTree galaxy_upload(const std::string& name = "Demo workflow", const std::string& path = "workflow.ga");

/// A registry with an operator-bootstrapped admin and two users:
/// alice (admin of team "lab") and bob (no teams).
struct World {
  explicit World(Config config = {});

  std::shared_ptr<MemoryStore> store;
  std::shared_ptr<MockMintClient> mint;
  ManualClock clock;
  std::unique_ptr<Registry> registry;
  Actor op = Actor::local_operator();
  Actor admin = Actor::of("admin");
  Actor alice = Actor::of("alice");
  Actor bob = Actor::of("bob");
  TeamId lab;

  User add_user(const std::string& id, const std::string& name = {});
  /// Registers `files` owned by `lab` as alice; returns the new id.
  EntryId upload(FileTree files, MetadataPatch patch = {}, const std::string& main_path = {});
  EntryId upload_galaxy(const std::string& title, Visibility visibility = Visibility::public_access);
};

/// A throwaway git repository with deterministic commit dates.
class GitRepo {
 public:
  GitRepo();
  const std::filesystem::path& path() const { return repo_; }
  std::string remote() const { return repo_.string(); }

  void write(const std::string& relative, const std::string& content);
  void copy_tree(const std::filesystem::path& source);
  /// Commits everything; the n-th commit is dated 2024-01-<n> 12:00 UTC.
  std::string commit(const std::string& message);
  void tag(const std::string& name, bool annotated = false);
  /// Raw git invocation in the repository; fails the caller on error.
  std::string git(const std::vector<std::string>& args) const;

 private:
  std::map<std::string, std::string> env() const;

  TempDir dir_;
  std::filesystem::path repo_;
  int commits_ = 0;
};

}  // namespace flowhub::testing
