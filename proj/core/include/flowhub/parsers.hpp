#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "flowhub/classes.hpp"
#include "flowhub/model.hpp"
#include "flowhub/vocab.hpp"

namespace flowhub {

// Every parser is pure and reentrant. Malformed input surfaces as
// ParseError / Error(schema_error); no input up to the size limit crashes.

/// Galaxy `.ga` document: a JSON object with a `steps` map keyed by step
/// number. Steps are ordered numerically; data_input and
/// data_collection_input steps become inputs; `workflow_outputs` become
/// outputs; tool ids are collected deduplicated in first-seen order.
WorkflowStructure parse_galaxy(std::string_view content,
                               std::size_t max_bytes = kDefaultMaxParseBytes);

/// CWL `class: Workflow` document in YAML or JSON form (packed `$graph`
/// documents resolve to `#main`). Also surfaces top-level EDAM annotations
/// (`intent`, `s:about`, `edam:has_topic`, `edam:has_operation`,
/// `s:keywords`) resolved against `vocab`. Throws Error(not_a_workflow) for
/// other classes.
WorkflowStructure parse_cwl_abstract(std::string_view content,
                                     const EdamVocabulary& vocab = EdamVocabulary::bundled(),
                                     std::size_t max_bytes = kDefaultMaxParseBytes);

/// Reads name/description/version/nextflowVersion from the `manifest { }`
/// block of a root `nextflow.config` (or `main.nf`). Steps and tools are not
/// extracted. Throws Error(not_found) if neither file exists.
WorkflowStructure parse_nextflow_manifest(const FileTree& files);

/// One step per `rule <name>:` line in `Snakefile` or `workflow/Snakefile`,
/// following `include:` directives. Throws Error(not_found) without a
/// Snakefile.
WorkflowStructure parse_snakemake(const FileTree& files);

/// Throws Error(invalid_structure) for empty/duplicate ids, ids containing
/// `/` or `#`, or outputs naming a missing source step.
void check_structure(const WorkflowStructure& structure);

/// CWL v1.2 `class: Workflow` with each step's `run` replaced by an
/// `Operation` stub. Tool references are kept as SoftwareRequirement hints.
std::string generate_abstract_cwl(const WorkflowStructure& structure);

/// Runs the parser matching `class_id` over a version's files. Returns
/// nullopt for classes without a parser.
std::optional<WorkflowStructure> parse_for_class(std::string_view class_id, const FileTree& files,
                                                 const std::string& main_path,
                                                 const EdamVocabulary& vocab,
                                                 std::size_t max_bytes = kDefaultMaxParseBytes);

}  // namespace flowhub
