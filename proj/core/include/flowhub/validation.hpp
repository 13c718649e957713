#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flowhub/model.hpp"
#include "flowhub/vocab.hpp"

namespace flowhub {

struct ValidationIssue {
  std::string code;
  std::string field;
  std::string message;

  bool operator==(const ValidationIssue&) const = default;
};

/// Errors block persistence; warnings only prompt for more metadata.
struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const noexcept { return errors.empty(); }
  bool has_warning(std::string_view code) const;
  bool has_error(std::string_view code) const;
};

/// Errors: MissingTitle, MissingTeams, SelfAttribution.
/// Warnings: MissingLicense, UnknownLicense, MissingCreators, InvalidOrcid,
/// MissingDescription, MissingEdamTopics, MissingEdamOperations,
/// InvalidEdamTopic, InvalidEdamOperation, MissingTools, InvalidBiotoolsId,
/// UnknownMaturity.
ValidationReport validate_entry(const WorkflowEntry& entry,
                                const EdamVocabulary& vocab = EdamVocabulary::bundled());

// ---------------------------------------------------------------------------
// Credit

enum class CreditNodeKind { entry, creator, contributor, submitter, team, space, organisation };
enum class CreditEdgeKind { created, submitted, owns, administers, affiliates, derives };

std::string_view to_string(CreditNodeKind kind);
std::string_view to_string(CreditEdgeKind kind);

struct CreditNode {
  CreditNodeKind kind = CreditNodeKind::entry;
  /// Unique within the graph, e.g. `team:t1`, `creator:0`, `entry:42`.
  std::string key;
  std::string label;

  bool operator==(const CreditNode&) const = default;
};

struct CreditEdge {
  std::string from;
  std::string to;
  CreditEdgeKind kind = CreditEdgeKind::created;

  bool operator==(const CreditEdge&) const = default;
};

struct CreditGraph {
  EntryId entry_id = 0;
  std::vector<CreditNode> nodes;
  std::vector<CreditEdge> edges;

  const CreditNode* find(std::string_view key) const;
  std::vector<const CreditNode*> nodes_of(CreditNodeKind kind) const;
  bool operator==(const CreditGraph&) const = default;
};

/// Lookups into the store state the graph is resolved against.
struct CreditDirectory {
  std::function<const Team*(const TeamId&)> team;
  std::function<const Space*(const SpaceId&)> space;
  std::function<const User*(const UserId&)> user;
  std::function<const Organisation*(const OrganisationId&)> organisation;
};

/// Organisations are the union of the per-team affiliations of each owning
/// team's members. Nodes and edges come out sorted, so equal store states
/// give equal graphs. Throws Error(integrity_error) for a team or space that
/// does not resolve.
CreditGraph resolve_credit(const WorkflowEntry& entry, const CreditDirectory& directory);

}  // namespace flowhub
