#include "flowhub/validation.hpp"

#include <algorithm>
#include <tuple>

#include "flowhub/error.hpp"

namespace flowhub {

bool ValidationReport::has_warning(std::string_view code) const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

bool ValidationReport::has_error(std::string_view code) const {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

ValidationReport validate_entry(const WorkflowEntry& entry, const EdamVocabulary& vocab) {
  ValidationReport report;
  auto error = [&](std::string code, std::string field, std::string message) {
    report.errors.push_back({std::move(code), std::move(field), std::move(message)});
  };
  auto warn = [&](std::string code, std::string field, std::string message) {
    report.warnings.push_back({std::move(code), std::move(field), std::move(message)});
  };

  if (text::trim(entry.title).empty()) error("MissingTitle", "title", "a title is required");
  if (entry.team_ids.empty()) error("MissingTeams", "team_ids", "at least one owning team is required");
  if (entry.id != 0 &&
      std::find(entry.attributions.begin(), entry.attributions.end(), entry.id) !=
          entry.attributions.end())
    error("SelfAttribution", "attributions", "a workflow cannot be based on itself");

  if (text::trim(entry.license).empty()) {
    warn("MissingLicense", "license", "no license given");
  } else if (!spdx::is_known(entry.license)) {
    warn("UnknownLicense", "license", "`" + entry.license + "` is not a known SPDX identifier");
  }

  if (entry.creators.empty()) warn("MissingCreators", "creators", "no creators listed");
  for (std::size_t i = 0; i < entry.creators.size(); ++i) {
    const auto& orcid = entry.creators[i].orcid;
    if (orcid && !is_valid_orcid(*orcid))
      warn("InvalidOrcid", "creators/" + std::to_string(i), "`" + *orcid + "` is not a valid ORCID");
  }

  if (text::trim(entry.description).empty())
    warn("MissingDescription", "description", "no description given");

  if (entry.edam_topics.empty()) warn("MissingEdamTopics", "edam_topics", "no EDAM topics");
  for (const auto& id : entry.edam_topics) {
    if (!vocab.is_valid(id, EdamBranch::topic))
      warn("InvalidEdamTopic", "edam_topics", "`" + id + "` is not a known EDAM topic");
  }
  if (entry.edam_operations.empty())
    warn("MissingEdamOperations", "edam_operations", "no EDAM operations");
  for (const auto& id : entry.edam_operations) {
    if (!vocab.is_valid(id, EdamBranch::operation))
      warn("InvalidEdamOperation", "edam_operations", "`" + id + "` is not a known EDAM operation");
  }

  if (entry.tool_refs.empty()) warn("MissingTools", "tool_refs", "no tools annotated");
  for (const auto& tool : entry.tool_refs) {
    if (tool.biotools_id && !is_valid_biotools_id(*tool.biotools_id))
      warn("InvalidBiotoolsId", "tool_refs",
           "`" + *tool.biotools_id + "` is not a valid bio.tools identifier");
  }

  if (entry.maturity != kMaturityWorkInProgress && entry.maturity != kMaturityStable)
    warn("UnknownMaturity", "maturity", "`" + entry.maturity + "` is not a known maturity level");
  return report;
}

// ---------------------------------------------------------------------------

std::string_view to_string(CreditNodeKind kind) {
  switch (kind) {
    case CreditNodeKind::entry: return "entry";
    case CreditNodeKind::creator: return "creator";
    case CreditNodeKind::contributor: return "contributor";
    case CreditNodeKind::submitter: return "submitter";
    case CreditNodeKind::team: return "team";
    case CreditNodeKind::space: return "space";
    case CreditNodeKind::organisation: return "organisation";
  }
  return "unknown";
}

std::string_view to_string(CreditEdgeKind kind) {
  switch (kind) {
    case CreditEdgeKind::created: return "created";
    case CreditEdgeKind::submitted: return "submitted";
    case CreditEdgeKind::owns: return "owns";
    case CreditEdgeKind::administers: return "administers";
    case CreditEdgeKind::affiliates: return "affiliates";
    case CreditEdgeKind::derives: return "derives";
  }
  return "unknown";
}

const CreditNode* CreditGraph::find(std::string_view key) const {
  for (const auto& node : nodes) {
    if (node.key == key) return &node;
  }
  return nullptr;
}

std::vector<const CreditNode*> CreditGraph::nodes_of(CreditNodeKind kind) const {
  std::vector<const CreditNode*> out;
  for (const auto& node : nodes) {
    if (node.kind == kind) out.push_back(&node);
  }
  return out;
}

CreditGraph resolve_credit(const WorkflowEntry& entry, const CreditDirectory& directory) {
  CreditGraph graph;
  graph.entry_id = entry.id;
  std::map<std::string, CreditNode> nodes;
  std::set<std::tuple<std::string, std::string, int>> edges;

  auto node = [&](CreditNodeKind kind, std::string key, std::string label) {
    nodes.emplace(key, CreditNode{kind, key, std::move(label)});
    return key;
  };
  auto edge = [&](const std::string& from, const std::string& to, CreditEdgeKind kind) {
    edges.emplace(from, to, static_cast<int>(kind));
  };
  auto user_label = [&](const UserId& id) {
    const User* user = directory.user ? directory.user(id) : nullptr;
    return user && !user->display_name.empty() ? user->display_name : id;
  };

  const std::string self =
      node(CreditNodeKind::entry, "entry:" + std::to_string(entry.id), entry.title);

  for (std::size_t i = 0; i < entry.creators.size(); ++i) {
    const auto& c = entry.creators[i];
    const std::string key =
        c.orcid ? "creator:orcid:" + *c.orcid : "creator:" + std::to_string(i);
    edge(node(CreditNodeKind::creator, key, c.name), self, CreditEdgeKind::created);
  }
  for (const auto& uid : entry.contributor_user_ids)
    edge(node(CreditNodeKind::contributor, "contributor:" + uid, user_label(uid)), self,
         CreditEdgeKind::created);
  if (!text::trim(entry.other_contributors).empty())
    edge(node(CreditNodeKind::contributor, "contributor:text", entry.other_contributors), self,
         CreditEdgeKind::created);
  if (!entry.submitter.empty())
    edge(node(CreditNodeKind::submitter, "submitter:" + entry.submitter, user_label(entry.submitter)),
         self, CreditEdgeKind::submitted);

  for (const auto& team_id : entry.team_ids) {
    const Team* team = directory.team ? directory.team(team_id) : nullptr;
    if (!team) throw Error(ErrorCode::integrity_error, "team `" + team_id + "` does not exist");
    const Space* space = directory.space ? directory.space(team->space_id) : nullptr;
    if (!space)
      throw Error(ErrorCode::integrity_error,
                  "space `" + team->space_id + "` of team `" + team_id + "` does not exist");
    const std::string team_key = node(CreditNodeKind::team, "team:" + team->id, team->name);
    edge(team_key, self, CreditEdgeKind::owns);
    edge(node(CreditNodeKind::space, "space:" + space->id, space->name), team_key,
         CreditEdgeKind::administers);

    for (const auto& member : team->members) {
      const User* user = directory.user ? directory.user(member.user_id) : nullptr;
      if (!user) continue;
      const Membership* membership = user->membership(team->id);
      if (!membership) continue;
      for (const auto& org_id : membership->organisation_ids) {
        const Organisation* org = directory.organisation ? directory.organisation(org_id) : nullptr;
        edge(node(CreditNodeKind::organisation, "organisation:" + org_id, org ? org->name : org_id),
             team_key, CreditEdgeKind::affiliates);
      }
    }
  }

  for (EntryId base : entry.attributions)
    edge(self, node(CreditNodeKind::entry, "entry:" + std::to_string(base), ""),
         CreditEdgeKind::derives);

  for (auto& [key, n] : nodes) graph.nodes.push_back(std::move(n));
  for (const auto& [from, to, kind] : edges)
    graph.edges.push_back({from, to, static_cast<CreditEdgeKind>(kind)});
  return graph;
}

}  // namespace flowhub
