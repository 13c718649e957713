#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "flowhub/util.hpp"
#include "json.hpp"

namespace flowhub {

using EntryId = std::uint64_t;
using UserId = std::string;
using TeamId = std::string;
using SpaceId = std::string;
using OrganisationId = std::string;
using CollectionId = std::string;
using AssetId = std::string;
using ClassId = std::string;

// ---------------------------------------------------------------------------
// Access control vocabulary

/// Rights are totally ordered: holding a right implies every weaker one.
enum class Right { view = 0, download = 1, edit = 2, manage = 3 };

enum class Visibility { public_access, registered, embargoed, private_access };

enum class SubjectKind { user, team, space };

enum class Role { admin, member };

struct Grant {
  SubjectKind subject_kind = SubjectKind::user;
  std::string subject_id;
  Right right = Right::view;

  bool operator==(const Grant&) const = default;
};

struct AccessPolicy {
  Visibility visibility = Visibility::public_access;
  std::optional<Timestamp> embargo_until;
  std::vector<Grant> grants;

  bool operator==(const AccessPolicy&) const = default;
};

// ---------------------------------------------------------------------------
// Collaboration hierarchy

struct Membership {
  TeamId team_id;
  Role role = Role::member;
  /// Affiliations the user claims for this team; a subset of the user's
  /// organisations.
  std::vector<OrganisationId> organisation_ids;

  bool operator==(const Membership&) const = default;
};

struct User {
  UserId id;
  std::string display_name;
  std::optional<std::string> orcid;
  std::set<OrganisationId> organisation_ids;
  std::vector<Membership> memberships;
  std::vector<std::string> expertise_tags;
  bool registry_admin = false;

  const Membership* membership(const TeamId& team) const;
  bool operator==(const User&) const = default;
};

struct Organisation {
  OrganisationId id;
  std::string name;
  std::optional<std::string> country;

  bool operator==(const Organisation&) const = default;
};

inline constexpr std::string_view kDefaultSpaceName = "Independent Teams";

struct Space {
  SpaceId id;
  std::string name;
  std::string description;
  std::set<UserId> admin_user_ids;
  bool is_default = false;

  bool operator==(const Space&) const = default;
};

struct TeamMember {
  UserId user_id;
  Role role = Role::member;

  bool operator==(const TeamMember&) const = default;
};

struct Team {
  TeamId id;
  std::string name;
  SpaceId space_id;
  std::string description;
  std::vector<TeamMember> members;
  AccessPolicy default_policy;
  std::string default_license;

  const TeamMember* member(const UserId& user) const;
  bool operator==(const Team&) const = default;
};

// ---------------------------------------------------------------------------
// Workflow content

struct Creator {
  std::string name;
  std::optional<std::string> orcid;
  std::optional<std::string> affiliation;

  bool operator==(const Creator&) const = default;
};

struct ToolRef {
  std::string raw_id;
  std::optional<std::string> biotools_id;
  std::string display_name;

  bool operator==(const ToolRef&) const = default;
};

struct FileBlob {
  std::string bytes;
  std::string media_type;

  bool operator==(const FileBlob&) const = default;
};

/// Relative path -> content. Ordered, so iteration is lexicographic by path.
using FileTree = std::map<std::string, FileBlob>;

struct PortDecl {
  std::string id;
  std::optional<std::string> label;
  std::optional<std::string> data_type;
  std::optional<std::string> edam_format;
  /// For outputs: the step that produces the value, when declared.
  std::optional<std::string> source_step;

  bool operator==(const PortDecl&) const = default;
};

struct StepDecl {
  std::string id;
  std::string label;
  std::optional<ToolRef> tool_ref;
  std::optional<std::string> subworkflow;

  bool operator==(const StepDecl&) const = default;
};

struct WorkflowStructure {
  std::optional<std::string> name;
  std::optional<std::string> description;
  std::optional<std::string> version;
  std::vector<PortDecl> inputs;
  std::vector<PortDecl> outputs;
  std::vector<StepDecl> steps;
  std::vector<std::string> raw_tool_ids;
  std::optional<std::string> language_version;
  /// EDAM annotations found in the source document (CWL only).
  std::vector<std::string> edam_topics;
  std::vector<std::string> edam_operations;

  bool operator==(const WorkflowStructure&) const = default;
};

struct UploadSource {
  bool operator==(const UploadSource&) const = default;
};

struct CrateImportSource {
  bool operator==(const CrateImportSource&) const = default;
};

struct GitImportSource {
  std::string remote;
  std::string commit_id;
  std::string ref;

  bool operator==(const GitImportSource&) const = default;
};

using VersionSource = std::variant<UploadSource, CrateImportSource, GitImportSource>;

std::string_view source_kind(const VersionSource& source);

struct WorkflowVersion {
  int version = 1;
  FileTree files;
  std::string main_workflow_path;
  std::optional<std::string> diagram_path;
  std::optional<std::string> abstract_cwl_path;
  VersionSource source;
  bool frozen = false;
  Timestamp created_at{};
  std::string revision_comment;
  /// Parse result cached at registration time; absent when the class has no
  /// parser or parsing failed.
  std::optional<WorkflowStructure> structure;
  /// Crate entities the registry does not model, re-emitted verbatim.
  nlohmann::json crate_extras = nlohmann::json::array();

  bool operator==(const WorkflowVersion&) const = default;
};

struct DetectionRule {
  /// Shell glob on the file name (or path, when it contains `/`). Empty = any.
  std::string glob;
  /// ECMAScript regex searched in the first 64 KiB of content. Empty = none.
  std::string probe;

  bool operator==(const DetectionRule&) const = default;
};

struct WorkflowClass {
  ClassId id;
  std::string display_name;
  std::optional<std::string> trs_descriptor_type;
  std::vector<DetectionRule> detection_rules;
  std::string url;

  bool operator==(const WorkflowClass&) const = default;
};

inline constexpr std::string_view kMaturityWorkInProgress = "work_in_progress";
inline constexpr std::string_view kMaturityStable = "stable";

enum class TestStatus { passing, failing, unknown };

struct Metrics {
  std::uint64_t views = 0;
  std::uint64_t downloads = 0;

  bool operator==(const Metrics&) const = default;
};

struct DoiRecord {
  std::string doi;
  EntryId entry_id = 0;
  int version = 0;
  nlohmann::json datacite_payload;
  Timestamp minted_at{};

  bool operator==(const DoiRecord&) const = default;
};

struct WorkflowEntry {
  EntryId id = 0;
  std::string title;
  std::vector<TeamId> team_ids;
  std::vector<Creator> creators;
  std::string other_contributors;
  std::vector<UserId> contributor_user_ids;
  UserId submitter;
  std::string description;
  ClassId workflow_class;
  std::string maturity{kMaturityWorkInProgress};
  std::string license;
  std::vector<std::string> tags;
  std::vector<std::string> edam_topics;
  std::vector<std::string> edam_operations;
  std::vector<ToolRef> tool_refs;
  std::vector<EntryId> attributions;
  std::optional<std::string> custom_citation;
  std::optional<TestStatus> test_status;
  std::vector<WorkflowVersion> versions;
  Metrics metrics;
  AccessPolicy policy;
  std::map<int, DoiRecord> doi_records;
  Timestamp created_at{};
  Timestamp updated_at{};

  const WorkflowVersion* find_version(int number) const;
  WorkflowVersion* find_version(int number);
  const WorkflowVersion& latest() const;
  bool operator==(const WorkflowEntry&) const = default;
};

// ---------------------------------------------------------------------------
// Collections and other assets

enum class AssetKind { workflow, document, sop, publication, presentation, data_file, event };

struct CollectionItem {
  AssetKind kind = AssetKind::workflow;
  /// Entity id for registered items, or an external URL.
  std::string target;

  bool operator==(const CollectionItem&) const = default;
};

struct Collection {
  CollectionId id;
  std::string title;
  std::string description;
  std::vector<TeamId> curator_team_ids;
  std::vector<CollectionItem> items;

  bool operator==(const Collection&) const = default;
};

struct ExternalReference {
  std::string url;
  std::string citation;

  bool operator==(const ExternalReference&) const = default;
};

struct Asset {
  AssetId id;
  AssetKind kind = AssetKind::document;
  std::string title;
  std::optional<FileTree> content;
  std::optional<ExternalReference> external;
  std::vector<TeamId> team_ids;
  UserId submitter;
  AccessPolicy policy;

  bool operator==(const Asset&) const = default;
};

// ---------------------------------------------------------------------------
// Enum <-> string

std::string_view to_string(Right r);
std::string_view to_string(Visibility v);
std::string_view to_string(SubjectKind k);
std::string_view to_string(Role r);
std::string_view to_string(AssetKind k);
std::string_view to_string(TestStatus s);

/// Each parse_* throws Error(invalid_argument) on an unknown token.
Right parse_right(std::string_view s);
Visibility parse_visibility(std::string_view s);
SubjectKind parse_subject_kind(std::string_view s);
Role parse_role(std::string_view s);
AssetKind parse_asset_kind(std::string_view s);
TestStatus parse_test_status(std::string_view s);

// ---------------------------------------------------------------------------
// Identifier checks

/// `NNNN-NNNN-NNNN-NNN[0-9X]` with a valid ISO 7064 mod 11-2 check digit.
bool is_valid_orcid(std::string_view orcid);

/// Strips `https://orcid.org/` (or http, trailing slash) and upper-cases the
/// check character. Does not validate.
std::string normalize_orcid(std::string_view orcid);

/// Check character for the first 15 digits of an ORCID.
char orcid_check_digit(std::string_view fifteen_digits);

bool is_valid_biotools_id(std::string_view id);

}  // namespace flowhub
