#include "flowhub/serialize.hpp"

#include "flowhub/error.hpp"

namespace nlohmann {

void adl_serializer<flowhub::Timestamp>::to_json(json& j, const flowhub::Timestamp& t) {
  j = flowhub::timefmt::to_iso8601(t);
}

void adl_serializer<flowhub::Timestamp>::from_json(const json& j, flowhub::Timestamp& t) {
  if (j.is_number_integer()) {
    t = flowhub::timefmt::from_unix(j.get<std::int64_t>());
    return;
  }
  auto parsed = flowhub::timefmt::parse_iso8601(j.get<std::string>());
  if (!parsed)
    throw flowhub::Error(flowhub::ErrorCode::invalid_argument,
                         "bad timestamp: " + j.get<std::string>());
  t = *parsed;
}

}  // namespace nlohmann

namespace flowhub {
namespace {

template <typename T>
void get_opt(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it != j.end() && !it->is_null()) out = it->template get<T>();
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) out.reset();
  else out = it->template get<T>();
}

}  // namespace

#define FLOWHUB_ENUM_JSON(T, parse)                                                   \
  void to_json(json& j, T v) { j = std::string(to_string(v)); }                       \
  void from_json(const json& j, T& v) {                                               \
    if (!j.is_string()) throw Error(ErrorCode::invalid_argument, "expected a string"); \
    v = parse(j.get<std::string>());                                                  \
  }

FLOWHUB_ENUM_JSON(Right, parse_right)
FLOWHUB_ENUM_JSON(Visibility, parse_visibility)
FLOWHUB_ENUM_JSON(SubjectKind, parse_subject_kind)
FLOWHUB_ENUM_JSON(Role, parse_role)
FLOWHUB_ENUM_JSON(AssetKind, parse_asset_kind)
FLOWHUB_ENUM_JSON(TestStatus, parse_test_status)

#undef FLOWHUB_ENUM_JSON

void to_json(json& j, const Grant& v) {
  j = {{"subject_kind", v.subject_kind}, {"subject_id", v.subject_id}, {"right", v.right}};
}
void from_json(const json& j, Grant& v) {
  get_opt(j, "subject_kind", v.subject_kind);
  get_opt(j, "subject_id", v.subject_id);
  get_opt(j, "right", v.right);
}

void to_json(json& j, const AccessPolicy& v) {
  j = {{"visibility", v.visibility}, {"embargo_until", v.embargo_until}, {"grants", v.grants}};
}
void from_json(const json& j, AccessPolicy& v) {
  get_opt(j, "visibility", v.visibility);
  get_opt(j, "embargo_until", v.embargo_until);
  get_opt(j, "grants", v.grants);
  if (v.visibility == Visibility::embargoed && !v.embargo_until)
    throw Error(ErrorCode::invalid_argument, "embargoed visibility requires `embargo_until`");
}

void to_json(json& j, const Membership& v) {
  j = {{"team_id", v.team_id}, {"role", v.role}, {"organisation_ids", v.organisation_ids}};
}
void from_json(const json& j, Membership& v) {
  get_opt(j, "team_id", v.team_id);
  get_opt(j, "role", v.role);
  get_opt(j, "organisation_ids", v.organisation_ids);
}

void to_json(json& j, const User& v) {
  j = {{"id", v.id},
       {"display_name", v.display_name},
       {"orcid", v.orcid},
       {"organisation_ids", v.organisation_ids},
       {"memberships", v.memberships},
       {"expertise_tags", v.expertise_tags},
       {"registry_admin", v.registry_admin}};
}
void from_json(const json& j, User& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "display_name", v.display_name);
  get_opt(j, "orcid", v.orcid);
  get_opt(j, "organisation_ids", v.organisation_ids);
  get_opt(j, "memberships", v.memberships);
  get_opt(j, "expertise_tags", v.expertise_tags);
  get_opt(j, "registry_admin", v.registry_admin);
}

void to_json(json& j, const Organisation& v) {
  j = {{"id", v.id}, {"name", v.name}, {"country", v.country}};
}
void from_json(const json& j, Organisation& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "name", v.name);
  get_opt(j, "country", v.country);
}

void to_json(json& j, const Space& v) {
  j = {{"id", v.id},
       {"name", v.name},
       {"description", v.description},
       {"admin_user_ids", v.admin_user_ids},
       {"is_default", v.is_default}};
}
void from_json(const json& j, Space& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "name", v.name);
  get_opt(j, "description", v.description);
  get_opt(j, "admin_user_ids", v.admin_user_ids);
  get_opt(j, "is_default", v.is_default);
}

void to_json(json& j, const TeamMember& v) { j = {{"user_id", v.user_id}, {"role", v.role}}; }
void from_json(const json& j, TeamMember& v) {
  get_opt(j, "user_id", v.user_id);
  get_opt(j, "role", v.role);
}

void to_json(json& j, const Team& v) {
  j = {{"id", v.id},
       {"name", v.name},
       {"space_id", v.space_id},
       {"description", v.description},
       {"members", v.members},
       {"default_policy", v.default_policy},
       {"default_license", v.default_license}};
}
void from_json(const json& j, Team& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "name", v.name);
  get_opt(j, "space_id", v.space_id);
  get_opt(j, "description", v.description);
  get_opt(j, "members", v.members);
  get_opt(j, "default_policy", v.default_policy);
  get_opt(j, "default_license", v.default_license);
}

void to_json(json& j, const Creator& v) {
  j = {{"name", v.name}, {"orcid", v.orcid}, {"affiliation", v.affiliation}};
}
void from_json(const json& j, Creator& v) {
  get_opt(j, "name", v.name);
  get_opt(j, "orcid", v.orcid);
  get_opt(j, "affiliation", v.affiliation);
}

void to_json(json& j, const ToolRef& v) {
  j = {{"raw_id", v.raw_id}, {"biotools_id", v.biotools_id}, {"display_name", v.display_name}};
}
void from_json(const json& j, ToolRef& v) {
  get_opt(j, "raw_id", v.raw_id);
  get_opt(j, "biotools_id", v.biotools_id);
  get_opt(j, "display_name", v.display_name);
  if (v.display_name.empty()) v.display_name = v.raw_id;
}

void to_json(json& j, const PortDecl& v) {
  j = {{"id", v.id},
       {"label", v.label},
       {"data_type", v.data_type},
       {"edam_format", v.edam_format},
       {"source_step", v.source_step}};
}
void from_json(const json& j, PortDecl& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "label", v.label);
  get_opt(j, "data_type", v.data_type);
  get_opt(j, "edam_format", v.edam_format);
  get_opt(j, "source_step", v.source_step);
}

void to_json(json& j, const StepDecl& v) {
  j = {{"id", v.id}, {"label", v.label}, {"tool_ref", v.tool_ref}, {"subworkflow", v.subworkflow}};
}
void from_json(const json& j, StepDecl& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "label", v.label);
  get_opt(j, "tool_ref", v.tool_ref);
  get_opt(j, "subworkflow", v.subworkflow);
}

void to_json(json& j, const WorkflowStructure& v) {
  j = {{"name", v.name},
       {"description", v.description},
       {"version", v.version},
       {"inputs", v.inputs},
       {"outputs", v.outputs},
       {"steps", v.steps},
       {"raw_tool_ids", v.raw_tool_ids},
       {"language_version", v.language_version},
       {"edam_topics", v.edam_topics},
       {"edam_operations", v.edam_operations}};
}
void from_json(const json& j, WorkflowStructure& v) {
  get_opt(j, "name", v.name);
  get_opt(j, "description", v.description);
  get_opt(j, "version", v.version);
  get_opt(j, "inputs", v.inputs);
  get_opt(j, "outputs", v.outputs);
  get_opt(j, "steps", v.steps);
  get_opt(j, "raw_tool_ids", v.raw_tool_ids);
  get_opt(j, "language_version", v.language_version);
  get_opt(j, "edam_topics", v.edam_topics);
  get_opt(j, "edam_operations", v.edam_operations);
}

void to_json(json& j, const VersionSource& v) {
  j = {{"kind", std::string(source_kind(v))}};
  if (const auto* git = std::get_if<GitImportSource>(&v)) {
    j["remote"] = git->remote;
    j["commit_id"] = git->commit_id;
    j["ref"] = git->ref;
  }
}
void from_json(const json& j, VersionSource& v) {
  const std::string kind = j.value("kind", "upload");
  if (kind == "upload") v = UploadSource{};
  else if (kind == "crate") v = CrateImportSource{};
  else if (kind == "git")
    v = GitImportSource{j.value("remote", ""), j.value("commit_id", ""), j.value("ref", "")};
  else throw Error(ErrorCode::invalid_argument, "unknown version source: " + kind);
}

json file_tree_manifest(const FileTree& files) {
  json out = json::object();
  for (const auto& [path, blob] : files) {
    out[path] = {{"media_type", blob.media_type},
                 {"size", blob.bytes.size()},
                 {"sha256", digest::sha256_hex(blob.bytes)}};
  }
  return out;
}

FileTree file_tree_from_manifest(const json& manifest,
                                 const std::function<std::string(const std::string&)>& load_blob) {
  FileTree files;
  for (auto it = manifest.begin(); it != manifest.end(); ++it) {
    FileBlob blob;
    blob.media_type = it->value("media_type", "");
    if (load_blob) blob.bytes = load_blob(it->value("sha256", ""));
    files.emplace(it.key(), std::move(blob));
  }
  return files;
}

void to_json(json& j, const WorkflowVersion& v) {
  j = {{"version", v.version},
       {"files", file_tree_manifest(v.files)},
       {"main_workflow_path", v.main_workflow_path},
       {"diagram_path", v.diagram_path},
       {"abstract_cwl_path", v.abstract_cwl_path},
       {"source", v.source},
       {"frozen", v.frozen},
       {"created_at", v.created_at},
       {"revision_comment", v.revision_comment},
       {"structure", v.structure},
       {"crate_extras", v.crate_extras}};
}
void from_json(const json& j, WorkflowVersion& v) {
  get_opt(j, "version", v.version);
  if (auto it = j.find("files"); it != j.end() && it->is_object())
    v.files = file_tree_from_manifest(*it, nullptr);
  get_opt(j, "main_workflow_path", v.main_workflow_path);
  get_opt(j, "diagram_path", v.diagram_path);
  get_opt(j, "abstract_cwl_path", v.abstract_cwl_path);
  get_opt(j, "source", v.source);
  get_opt(j, "frozen", v.frozen);
  get_opt(j, "created_at", v.created_at);
  get_opt(j, "revision_comment", v.revision_comment);
  get_opt(j, "structure", v.structure);
  if (auto it = j.find("crate_extras"); it != j.end() && it->is_array()) v.crate_extras = *it;
}

void to_json(json& j, const Metrics& v) { j = {{"views", v.views}, {"downloads", v.downloads}}; }
void from_json(const json& j, Metrics& v) {
  get_opt(j, "views", v.views);
  get_opt(j, "downloads", v.downloads);
}

void to_json(json& j, const DoiRecord& v) {
  j = {{"doi", v.doi},
       {"entry_id", v.entry_id},
       {"version", v.version},
       {"datacite_payload", v.datacite_payload},
       {"minted_at", v.minted_at}};
}
void from_json(const json& j, DoiRecord& v) {
  get_opt(j, "doi", v.doi);
  get_opt(j, "entry_id", v.entry_id);
  get_opt(j, "version", v.version);
  if (auto it = j.find("datacite_payload"); it != j.end()) v.datacite_payload = *it;
  get_opt(j, "minted_at", v.minted_at);
}

void to_json(json& j, const WorkflowEntry& v) {
  json dois = json::object();
  for (const auto& [version, record] : v.doi_records) dois[std::to_string(version)] = record;
  j = {{"id", v.id},
       {"title", v.title},
       {"team_ids", v.team_ids},
       {"creators", v.creators},
       {"other_contributors", v.other_contributors},
       {"contributor_user_ids", v.contributor_user_ids},
       {"submitter", v.submitter},
       {"description", v.description},
       {"workflow_class", v.workflow_class},
       {"maturity", v.maturity},
       {"license", v.license},
       {"tags", v.tags},
       {"edam_topics", v.edam_topics},
       {"edam_operations", v.edam_operations},
       {"tool_refs", v.tool_refs},
       {"attributions", v.attributions},
       {"custom_citation", v.custom_citation},
       {"test_status", v.test_status},
       {"versions", v.versions},
       {"metrics", v.metrics},
       {"policy", v.policy},
       {"doi_records", dois},
       {"created_at", v.created_at},
       {"updated_at", v.updated_at}};
}
void from_json(const json& j, WorkflowEntry& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "title", v.title);
  get_opt(j, "team_ids", v.team_ids);
  get_opt(j, "creators", v.creators);
  get_opt(j, "other_contributors", v.other_contributors);
  get_opt(j, "contributor_user_ids", v.contributor_user_ids);
  get_opt(j, "submitter", v.submitter);
  get_opt(j, "description", v.description);
  get_opt(j, "workflow_class", v.workflow_class);
  get_opt(j, "maturity", v.maturity);
  get_opt(j, "license", v.license);
  get_opt(j, "tags", v.tags);
  get_opt(j, "edam_topics", v.edam_topics);
  get_opt(j, "edam_operations", v.edam_operations);
  get_opt(j, "tool_refs", v.tool_refs);
  get_opt(j, "attributions", v.attributions);
  get_opt(j, "custom_citation", v.custom_citation);
  get_opt(j, "test_status", v.test_status);
  get_opt(j, "versions", v.versions);
  get_opt(j, "metrics", v.metrics);
  get_opt(j, "policy", v.policy);
  v.doi_records.clear();
  if (auto it = j.find("doi_records"); it != j.end() && it->is_object()) {
    for (auto d = it->begin(); d != it->end(); ++d)
      v.doi_records.emplace(std::stoi(d.key()), d->get<DoiRecord>());
  }
  get_opt(j, "created_at", v.created_at);
  get_opt(j, "updated_at", v.updated_at);
}

void to_json(json& j, const CollectionItem& v) { j = {{"kind", v.kind}, {"target", v.target}}; }
void from_json(const json& j, CollectionItem& v) {
  get_opt(j, "kind", v.kind);
  get_opt(j, "target", v.target);
}

void to_json(json& j, const Collection& v) {
  j = {{"id", v.id},
       {"title", v.title},
       {"description", v.description},
       {"curator_team_ids", v.curator_team_ids},
       {"items", v.items}};
}
void from_json(const json& j, Collection& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "title", v.title);
  get_opt(j, "description", v.description);
  get_opt(j, "curator_team_ids", v.curator_team_ids);
  get_opt(j, "items", v.items);
}

void to_json(json& j, const ExternalReference& v) {
  j = {{"url", v.url}, {"citation", v.citation}};
}
void from_json(const json& j, ExternalReference& v) {
  get_opt(j, "url", v.url);
  get_opt(j, "citation", v.citation);
}

void to_json(json& j, const Asset& v) {
  j = {{"id", v.id},
       {"kind", v.kind},
       {"title", v.title},
       {"content", v.content ? file_tree_manifest(*v.content) : json(nullptr)},
       {"external", v.external},
       {"team_ids", v.team_ids},
       {"submitter", v.submitter},
       {"policy", v.policy}};
}
void from_json(const json& j, Asset& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "kind", v.kind);
  get_opt(j, "title", v.title);
  if (auto it = j.find("content"); it != j.end() && it->is_object())
    v.content = file_tree_from_manifest(*it, nullptr);
  get_opt(j, "external", v.external);
  get_opt(j, "team_ids", v.team_ids);
  get_opt(j, "submitter", v.submitter);
  get_opt(j, "policy", v.policy);
}

void to_json(json& j, const DetectionRule& v) { j = {{"glob", v.glob}, {"probe", v.probe}}; }
void from_json(const json& j, DetectionRule& v) {
  get_opt(j, "glob", v.glob);
  get_opt(j, "probe", v.probe);
}

void to_json(json& j, const WorkflowClass& v) {
  j = {{"id", v.id},
       {"display_name", v.display_name},
       {"trs_descriptor_type", v.trs_descriptor_type},
       {"detection_rules", v.detection_rules},
       {"url", v.url}};
}
void from_json(const json& j, WorkflowClass& v) {
  get_opt(j, "id", v.id);
  get_opt(j, "display_name", v.display_name);
  get_opt(j, "trs_descriptor_type", v.trs_descriptor_type);
  get_opt(j, "detection_rules", v.detection_rules);
  get_opt(j, "url", v.url);
}

void to_json(json& j, const ValidationIssue& v) {
  j = {{"code", v.code}, {"field", v.field}, {"message", v.message}};
}
void from_json(const json& j, ValidationIssue& v) {
  get_opt(j, "code", v.code);
  get_opt(j, "field", v.field);
  get_opt(j, "message", v.message);
}

void to_json(json& j, const ValidationReport& v) {
  j = {{"errors", v.errors}, {"warnings", v.warnings}};
}
void from_json(const json& j, ValidationReport& v) {
  get_opt(j, "errors", v.errors);
  get_opt(j, "warnings", v.warnings);
}

void to_json(json& j, const CreditGraph& v) {
  json nodes = json::array();
  for (const auto& n : v.nodes)
    nodes.push_back({{"kind", std::string(to_string(n.kind))}, {"key", n.key}, {"label", n.label}});
  json edges = json::array();
  for (const auto& e : v.edges)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", std::string(to_string(e.kind))}});
  j = {{"entry_id", v.entry_id}, {"nodes", nodes}, {"edges", edges}};
}
void from_json(const json& j, CreditGraph& v) {
  static const std::pair<std::string_view, CreditNodeKind> node_kinds[] = {
      {"entry", CreditNodeKind::entry},     {"creator", CreditNodeKind::creator},
      {"contributor", CreditNodeKind::contributor}, {"submitter", CreditNodeKind::submitter},
      {"team", CreditNodeKind::team},       {"space", CreditNodeKind::space},
      {"organisation", CreditNodeKind::organisation}};
  static const std::pair<std::string_view, CreditEdgeKind> edge_kinds[] = {
      {"created", CreditEdgeKind::created},         {"submitted", CreditEdgeKind::submitted},
      {"owns", CreditEdgeKind::owns},               {"administers", CreditEdgeKind::administers},
      {"affiliates", CreditEdgeKind::affiliates},   {"derives", CreditEdgeKind::derives}};
  get_opt(j, "entry_id", v.entry_id);
  v.nodes.clear();
  v.edges.clear();
  for (const auto& n : j.value("nodes", json::array())) {
    CreditNode node{CreditNodeKind::entry, n.value("key", ""), n.value("label", "")};
    for (const auto& [name, kind] : node_kinds)
      if (n.value("kind", "") == name) node.kind = kind;
    v.nodes.push_back(std::move(node));
  }
  for (const auto& e : j.value("edges", json::array())) {
    CreditEdge edge{e.value("from", ""), e.value("to", ""), CreditEdgeKind::created};
    for (const auto& [name, kind] : edge_kinds)
      if (e.value("kind", "") == name) edge.kind = kind;
    v.edges.push_back(std::move(edge));
  }
}

}  // namespace flowhub
