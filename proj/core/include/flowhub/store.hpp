#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace flowhub {

/// Persistence for the registry: JSON documents keyed by (kind, id), a
/// content-addressed blob area and an append-only event log. The registry
/// keeps its working state in memory and writes through to the store.
class Store {
 public:
  virtual ~Store() = default;

  virtual std::vector<nlohmann::json> list(std::string_view kind) const = 0;
  virtual void put(std::string_view kind, const std::string& id, const nlohmann::json& doc) = 0;
  virtual void remove(std::string_view kind, const std::string& id) = 0;

  /// Returns the sha256 of `bytes`. Storing the same bytes twice is a no-op.
  virtual std::string put_blob(std::string_view bytes) = 0;
  /// Throws Error(integrity_error) for unknown digests.
  virtual std::string get_blob(const std::string& sha256) const = 0;

  virtual void append_event(const nlohmann::json& event) = 0;
  virtual std::vector<nlohmann::json> events() const = 0;
};

class MemoryStore final : public Store {
 public:
  std::vector<nlohmann::json> list(std::string_view kind) const override;
  void put(std::string_view kind, const std::string& id, const nlohmann::json& doc) override;
  void remove(std::string_view kind, const std::string& id) override;
  std::string put_blob(std::string_view bytes) override;
  std::string get_blob(const std::string& sha256) const override;
  void append_event(const nlohmann::json& event) override;
  std::vector<nlohmann::json> events() const override;

  std::size_t blob_count() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::map<std::string, nlohmann::json>> docs_;
  std::map<std::string, std::string> blobs_;
  std::vector<nlohmann::json> events_;
};

/// Layout under `root`: `entities/<kind>/<id>.json`, `blobs/<sha256>`,
/// `events.log` (one JSON object per line). Documents are replaced by
/// rename, so a crash leaves either the old or the new version.
class FileStore final : public Store {
 public:
  explicit FileStore(std::filesystem::path root);

  std::vector<nlohmann::json> list(std::string_view kind) const override;
  void put(std::string_view kind, const std::string& id, const nlohmann::json& doc) override;
  void remove(std::string_view kind, const std::string& id) override;
  std::string put_blob(std::string_view bytes) override;
  std::string get_blob(const std::string& sha256) const override;
  void append_event(const nlohmann::json& event) override;
  std::vector<nlohmann::json> events() const override;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path document_path(std::string_view kind, const std::string& id) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

}  // namespace flowhub
