#include "flowhub/doi.hpp"

#include "flowhub/error.hpp"
#include "flowhub/vocab.hpp"

namespace flowhub {

using nlohmann::json;

std::string format_doi(std::string_view prefix, EntryId entry, int version) {
  return std::string(prefix) + "/wfhub." + std::to_string(entry) + "." + std::to_string(version);
}

json datacite_payload(const WorkflowEntry& entry, const WorkflowVersion& version,
                      const DataciteContext& context) {
  json creators = json::array();
  for (const auto& c : entry.creators) {
    json person{{"name", c.name}, {"nameType", "Personal"}};
    if (c.orcid) {
      person["nameIdentifiers"] = json::array({{{"nameIdentifier", "https://orcid.org/" + *c.orcid},
                                                {"nameIdentifierScheme", "ORCID"},
                                                {"schemeUri", "https://orcid.org"}}});
    }
    if (c.affiliation) person["affiliation"] = json::array({{{"name", *c.affiliation}}});
    creators.push_back(std::move(person));
  }
  if (creators.empty()) {
    for (const auto& team : context.team_names)
      creators.push_back({{"name", team}, {"nameType", "Organizational"}});
  }

  json attributes{
      {"doi", context.doi},
      {"event", "publish"},
      {"creators", std::move(creators)},
      {"titles", json::array({{{"title", entry.title}}})},
      {"publisher", context.publisher},
      {"publicationYear", timefmt::year_of(context.published)},
      {"types", {{"resourceTypeGeneral", "Workflow"}, {"resourceType", context.class_name}}},
      {"url", context.url},
      {"version", std::to_string(version.version)},
      {"dates", json::array({{{"date", timefmt::to_iso8601(version.created_at)}, {"dateType", "Created"}},
                             {{"date", timefmt::to_iso8601(context.published)}, {"dateType", "Issued"}}})},
  };
  if (auto slash = context.doi.find('/'); slash != std::string::npos) {
    attributes["prefix"] = context.doi.substr(0, slash);
    attributes["suffix"] = context.doi.substr(slash + 1);
  }
  if (!entry.description.empty())
    attributes["descriptions"] =
        json::array({{{"description", entry.description}, {"descriptionType", "Abstract"}}});
  if (!entry.license.empty()) {
    json rights{{"rights", entry.license}};
    if (spdx::is_known(entry.license)) {
      rights["rightsIdentifier"] = entry.license;
      rights["rightsIdentifierScheme"] = "SPDX";
      rights["rightsUri"] = spdx::iri(entry.license);
    }
    attributes["rightsList"] = json::array({rights});
  }
  json subjects = json::array();
  for (const auto& tag : entry.tags) subjects.push_back({{"subject", tag}});
  for (const auto& id : entry.edam_topics)
    subjects.push_back({{"subject", id}, {"subjectScheme", "EDAM"}, {"valueUri", EdamVocabulary::iri(id)}});
  for (const auto& id : entry.edam_operations)
    subjects.push_back({{"subject", id}, {"subjectScheme", "EDAM"}, {"valueUri", EdamVocabulary::iri(id)}});
  if (!subjects.empty()) attributes["subjects"] = std::move(subjects);

  json related = json::array();
  for (const auto& iri : context.derived_from) {
    const bool is_doi = iri.rfind("https://doi.org/", 0) == 0;
    related.push_back({{"relatedIdentifier", is_doi ? iri.substr(16) : iri},
                       {"relatedIdentifierType", is_doi ? "DOI" : "URL"},
                       {"relationType", "IsDerivedFrom"}});
  }
  if (!related.empty()) attributes["relatedIdentifiers"] = std::move(related);

  return json{{"data", {{"type", "dois"}, {"attributes", std::move(attributes)}}}};
}

void MockMintClient::mint(const std::string& doi, const json& payload) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (failures_ > 0) {
    --failures_;
    throw Error(ErrorCode::mint_failed, "mock DOI agency refused " + doi);
  }
  calls_.push_back({doi, payload});
}

void MockMintClient::fail_next(int n) {
  std::lock_guard<std::mutex> lock(mutex_);
  failures_ = n;
}

std::vector<MockMintClient::Call> MockMintClient::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

}  // namespace flowhub
