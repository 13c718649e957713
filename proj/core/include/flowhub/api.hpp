#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowhub/registry.hpp"
#include "json.hpp"

namespace flowhub {

inline constexpr std::string_view kTrsPrefix = "/ga4gh/trs/v2";
inline constexpr std::string_view kTrsVersion = "2.0.1";

struct ApiRequest {
  std::string method = "GET";
  /// Percent-encoded path without the query string.
  std::string path = "/";
  std::vector<std::pair<std::string, std::string>> query;
  /// Lower-case names.
  std::map<std::string, std::string> headers;
  std::string body;

  std::optional<std::string> param(std::string_view name) const;
  std::vector<std::string> params(std::string_view name) const;
  std::string header(std::string_view name) const;

  /// Splits `target` ("/a/b?x=1&y=2") into path and decoded query.
  static ApiRequest make(std::string method, std::string_view target, std::string body = {});
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  std::string header(std::string_view name) const;
  std::vector<std::string> header_values(std::string_view name) const;
  nlohmann::json json_body() const;

  static ApiResponse json(int status, const nlohmann::json& body);
  static ApiResponse error(int status, std::string_view code, const std::string& message);
};

/// HTTP status for an error code (422 for validation, 403 for denials...).
int http_status(ErrorCode code);

// -- TRS views -------------------------------------------------------------

/// `#workflow/<id>`
std::string trs_tool_id(EntryId id);
/// Descriptor type tokens of a class: its TRS type, or `PLAIN_<CLASS>`.
std::vector<std::string> descriptor_types(const ClassRegistry& classes, std::string_view class_id);
nlohmann::json trs_tool(const WorkflowEntry& entry, const ClassRegistry& classes, const Config& config,
                        const std::map<TeamId, std::string>& team_names);
nlohmann::json trs_tool_version(const WorkflowEntry& entry, const WorkflowVersion& version,
                                const ClassRegistry& classes, const Config& config);
nlohmann::json trs_service_info(const Config& config);
nlohmann::json trs_tool_classes();

/// TRS file type of one version file: PRIMARY_DESCRIPTOR, SECONDARY_DESCRIPTOR,
/// TEST_FILE or OTHER.
std::string trs_file_type(const WorkflowVersion& version, const std::string& path, const ClassRegistry& classes,
                          std::string_view class_id);

// -- Landing page ----------------------------------------------------------

struct LinkTarget {
  std::string href;
  std::string rel;
  std::string type;
};

/// FAIR Signposting links for one entry version.
std::vector<LinkTarget> signposting_links(const WorkflowEntry& entry, const WorkflowVersion& version,
                                          const Config& config);
std::string format_link_header(const std::vector<LinkTarget>& links);
std::string landing_html(const WorkflowEntry& entry, const WorkflowVersion& version, const nlohmann::json& jsonld);

/// Native JSON API, TRS v2 and landing pages over one Registry. Handlers
/// are stateless; the registry provides the transactions.
class ApiService {
 public:
  explicit ApiService(Registry& registry);

  /// `as` overrides bearer-token authentication (in-process callers).
  ApiResponse handle(const ApiRequest& request, const Actor* as = nullptr);

  Registry& registry() { return registry_; }

  /// Entry JSON as served by `GET /workflows/{id}`.
  nlohmann::json entry_json(const WorkflowEntry& entry) const;

 private:
  struct Context;
  ApiResponse dispatch(Context& ctx);
  ApiResponse route_workflows(Context& ctx);
  ApiResponse route_trs(Context& ctx);
  ApiResponse route_entities(Context& ctx);

  Registry& registry_;
};

}  // namespace flowhub
