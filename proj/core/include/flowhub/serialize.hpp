#pragma once

#include <functional>
#include <optional>

#include "flowhub/access.hpp"
#include "flowhub/model.hpp"
#include "flowhub/validation.hpp"
#include "json.hpp"

// JSON forms of the domain types. Used for persistence and as the body of
// API responses. File trees serialize as metadata only (media type, size,
// sha256); bytes live in the blob store.

namespace nlohmann {

template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& value) {
    if (value) j = *value;
    else j = nullptr;
  }
  static void from_json(const json& j, std::optional<T>& value) {
    if (j.is_null()) value.reset();
    else value = j.get<T>();
  }
};

template <>
struct adl_serializer<flowhub::Timestamp> {
  static void to_json(json& j, const flowhub::Timestamp& t);
  static void from_json(const json& j, flowhub::Timestamp& t);
};

}  // namespace nlohmann

namespace flowhub {

using nlohmann::json;

void to_json(json& j, Right v);
void from_json(const json& j, Right& v);
void to_json(json& j, Visibility v);
void from_json(const json& j, Visibility& v);
void to_json(json& j, SubjectKind v);
void from_json(const json& j, SubjectKind& v);
void to_json(json& j, Role v);
void from_json(const json& j, Role& v);
void to_json(json& j, AssetKind v);
void from_json(const json& j, AssetKind& v);
void to_json(json& j, TestStatus v);
void from_json(const json& j, TestStatus& v);

#define FLOWHUB_JSON_DECL(T)        \
  void to_json(json& j, const T& v); \
  void from_json(const json& j, T& v);

FLOWHUB_JSON_DECL(Grant)
FLOWHUB_JSON_DECL(AccessPolicy)
FLOWHUB_JSON_DECL(Membership)
FLOWHUB_JSON_DECL(User)
FLOWHUB_JSON_DECL(Organisation)
FLOWHUB_JSON_DECL(Space)
FLOWHUB_JSON_DECL(TeamMember)
FLOWHUB_JSON_DECL(Team)
FLOWHUB_JSON_DECL(Creator)
FLOWHUB_JSON_DECL(ToolRef)
FLOWHUB_JSON_DECL(PortDecl)
FLOWHUB_JSON_DECL(StepDecl)
FLOWHUB_JSON_DECL(WorkflowStructure)
FLOWHUB_JSON_DECL(VersionSource)
FLOWHUB_JSON_DECL(WorkflowVersion)
FLOWHUB_JSON_DECL(Metrics)
FLOWHUB_JSON_DECL(DoiRecord)
FLOWHUB_JSON_DECL(WorkflowEntry)
FLOWHUB_JSON_DECL(CollectionItem)
FLOWHUB_JSON_DECL(Collection)
FLOWHUB_JSON_DECL(ExternalReference)
FLOWHUB_JSON_DECL(Asset)
FLOWHUB_JSON_DECL(WorkflowClass)
FLOWHUB_JSON_DECL(DetectionRule)
FLOWHUB_JSON_DECL(ValidationIssue)
FLOWHUB_JSON_DECL(ValidationReport)
FLOWHUB_JSON_DECL(CreditGraph)

#undef FLOWHUB_JSON_DECL

/// `{path: {media_type, size, sha256}}`; bytes are not included.
json file_tree_manifest(const FileTree& files);

/// Reads a manifest back, asking `load_blob(sha256)` for each file's bytes.
FileTree file_tree_from_manifest(const json& manifest,
                                 const std::function<std::string(const std::string&)>& load_blob);

}  // namespace flowhub
