#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/classes.hpp"
#include "flowhub/model.hpp"
#include "flowhub/vocab.hpp"
#include "flowhub/zip.hpp"
#include "json.hpp"

namespace flowhub {

inline constexpr std::string_view kRoCrateContext = "https://w3id.org/ro/crate/1.1/context";
inline constexpr std::string_view kRoCrateSpec = "https://w3id.org/ro/crate/1.1";
inline constexpr std::string_view kWorkflowCrateProfile =
    "https://w3id.org/workflowhub/workflow-ro-crate/1.0";
inline constexpr std::string_view kCrateMetadataFile = "ro-crate-metadata.json";

struct CrateOptions {
  /// Canonical registry URL; attributions become `<base_url>/workflows/<id>`.
  std::string base_url = "http://localhost:8080";
  const ClassRegistry* classes = nullptr;
  const EdamVocabulary* vocab = nullptr;
  /// Team id -> display name, for the producer entities.
  std::function<std::string(const TeamId&)> team_name;
  zip::Limits limits;
};

struct WorkflowCrate {
  std::string archive;
  nlohmann::json metadata;
  std::string main_entity_path;
  std::vector<std::string> conforms_to;
};

/// Serialized `ro-crate-metadata.json`: 2-space indentation, sorted keys.
std::string dump_crate_metadata(const nlohmann::json& metadata);

/// The JSON-LD document build_crate writes.
nlohmann::json crate_metadata(const WorkflowEntry& entry, const WorkflowVersion& version,
                              const CrateOptions& options = {});

/// Zip with the metadata file first, then every version file in path order,
/// all stamped with version.created_at. Throws Error(crate_build_error) when
/// the main workflow file is missing.
WorkflowCrate build_crate(const WorkflowEntry& entry, const WorkflowVersion& version,
                          const CrateOptions& options = {});

struct CrateContents {
  std::string title;
  std::string description;
  std::string license;
  std::vector<Creator> creators;
  std::optional<ClassId> workflow_class;
  std::vector<std::string> edam_topics;
  std::vector<std::string> edam_operations;
  std::vector<std::string> tags;
  std::optional<std::string> maturity;
  std::vector<ToolRef> tool_refs;
  std::vector<TeamId> team_ids;
  std::optional<std::string> custom_citation;
  /// Every `isBasedOn` IRI of the root dataset.
  std::vector<std::string> based_on;
  /// The subset of `based_on` that names entries of this registry.
  std::vector<EntryId> attribution_candidates;
  std::vector<std::string> conforms_to;

  FileTree files;
  std::string main_workflow_path;
  std::optional<std::string> diagram_path;
  std::optional<std::string> abstract_cwl_path;
  std::optional<Timestamp> date_published;
  /// Entities this library does not interpret, kept verbatim.
  nlohmann::json extras = nlohmann::json::array();
};

/// Throws Error(not_a_crate) without a root metadata file (a single
/// top-level directory is unwrapped first), Error(invalid_crate) when the
/// metadata is unusable or mainEntity does not resolve to an archive file,
/// Error(size_limit) from the zip reader.
CrateContents read_crate(std::string_view archive, const CrateOptions& options = {});

enum class ConformanceLevel { valid, warnings, invalid };
std::string_view to_string(ConformanceLevel level);

struct CrateFinding {
  bool error = false;
  std::string code;
  std::string message;
};

struct ConformanceReport {
  ConformanceLevel level = ConformanceLevel::valid;
  std::vector<CrateFinding> findings;

  bool has(std::string_view code) const;
};

/// Findings: NotAZip, MetadataMissing, MetadataInvalid, DescriptorMissing,
/// RootMissing, MainEntityMissing, MainEntityType, ProfileMissing,
/// FileMissing (errors); ProgrammingLanguageMissing, LicenseMissing,
/// OrphanFile (warnings). Never throws.
ConformanceReport validate_crate(std::string_view archive, const zip::Limits& limits = {});

// ---------------------------------------------------------------------------
// Bioschemas

inline constexpr std::string_view kBioschemasWorkflowProfile =
    "https://bioschemas.org/profiles/ComputationalWorkflow/1.0-RELEASE";
inline constexpr std::string_view kBioschemasToolProfile =
    "https://bioschemas.org/profiles/ComputationalTool/1.0-RELEASE";
inline constexpr std::string_view kBioschemasParameterProfile =
    "https://bioschemas.org/profiles/FormalParameter/1.0-RELEASE";

/// `<base_url>/workflows/<id>?version=<v>`
std::string canonical_url(std::string_view base_url, EntryId id, std::optional<int> version = {});

/// schema.org graph: one ComputationalWorkflow node, a FormalParameter per
/// parsed input/output and a ComputationalTool per tool reference.
nlohmann::json emit_bioschemas(const WorkflowEntry& entry, const WorkflowVersion& version,
                               const CrateOptions& options = {});

}  // namespace flowhub
