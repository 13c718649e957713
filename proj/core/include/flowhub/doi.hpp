#pragma once

#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/model.hpp"
#include "json.hpp"

namespace flowhub {

/// `<prefix>/wfhub.<entry>.<version>`
std::string format_doi(std::string_view prefix, EntryId entry, int version);

struct DataciteContext {
  std::string doi;
  std::string publisher = "FlowHub";
  /// Landing page of the version.
  std::string url;
  /// Class display name, used as resourceType.
  std::string class_name;
  Timestamp published{};
  /// IRIs (DOI or registry URL) of the entries this one is based on.
  std::vector<std::string> derived_from;
  /// Used as organisational creators when the entry lists none.
  std::vector<std::string> team_names;
};

/// DataCite REST (JSON:API) document for `version` of `entry`.
nlohmann::json datacite_payload(const WorkflowEntry& entry, const WorkflowVersion& version,
                                const DataciteContext& context);

/// Registers a DOI with a DOI agency. Implementations throw
/// Error(mint_failed) when the agency refuses or cannot be reached.
class MintClient {
 public:
  virtual ~MintClient() = default;
  virtual void mint(const std::string& doi, const nlohmann::json& payload) = 0;
};

/// Records every request instead of talking to DataCite.
class MockMintClient final : public MintClient {
 public:
  struct Call {
    std::string doi;
    nlohmann::json payload;
  };

  void mint(const std::string& doi, const nlohmann::json& payload) override;

  /// The next `n` calls throw Error(mint_failed) without recording.
  void fail_next(int n = 1);
  std::vector<Call> calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
  int failures_ = 0;
};

}  // namespace flowhub
