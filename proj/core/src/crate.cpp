#include "flowhub/crate.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "flowhub/error.hpp"

namespace flowhub {
namespace {

using nlohmann::json;

const ClassRegistry& classes_of(const CrateOptions& options) {
  static const ClassRegistry fallback = ClassRegistry::seeded();
  return options.classes ? *options.classes : fallback;
}

const EdamVocabulary& vocab_of(const CrateOptions& options) {
  return options.vocab ? *options.vocab : EdamVocabulary::bundled();
}

std::string trim_base(std::string_view base) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out;
}

// Relative file @ids are URI references: escape each path segment.
std::string path_to_id(std::string_view path) {
  std::string out;
  for (const auto& segment : text::split(path, '/')) {
    if (!out.empty()) out += '/';
    out += text::url_encode(segment);
  }
  return out;
}

std::string id_to_path(std::string_view id) {
  std::string path = text::url_decode(id);
  while (path.rfind("./", 0) == 0) path.erase(0, 2);
  return path;
}

json id_ref(std::string_view id) { return json{{"@id", id}}; }

std::string language_id(std::string_view class_id) { return "#" + text::sanitize_identifier(class_id); }

json language_entity(const WorkflowClass& cls) {
  json e = {{"@id", language_id(cls.id)}, {"@type", "ComputerLanguage"}, {"name", cls.display_name},
            {"alternateName", cls.id}};
  if (!cls.url.empty()) {
    e["url"] = id_ref(cls.url);
    e["identifier"] = id_ref(cls.url);
  }
  return e;
}

std::string orcid_iri(std::string_view orcid) { return "https://orcid.org/" + std::string(orcid); }

// A property value as a list of nodes, whether it was given singly or as an array.
std::vector<json> as_list(const json& value) {
  if (value.is_null()) return {};
  if (value.is_array()) return std::vector<json>(value.begin(), value.end());
  return {value};
}

std::string id_of(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_object()) {
    auto it = value.find("@id");
    if (it != value.end() && it->is_string()) return it->get<std::string>();
  }
  return {};
}

std::string string_of(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  if (it->is_object()) return id_of(*it);
  return {};
}

std::set<std::string> types_of(const json& entity) {
  std::set<std::string> out;
  for (const auto& t : as_list(entity.value("@type", json()))) {
    if (t.is_string()) out.insert(t.get<std::string>());
  }
  return out;
}

struct Graph {
  std::map<std::string, json> by_id;

  static Graph from(const json& metadata) {
    Graph g;
    auto it = metadata.find("@graph");
    if (it == metadata.end() || !it->is_array())
      throw Error(ErrorCode::invalid_crate, "metadata has no @graph array");
    for (const auto& entity : *it) {
      if (!entity.is_object()) continue;
      std::string id = id_of(entity);
      if (!id.empty()) g.by_id.emplace(id, entity);
    }
    return g;
  }

  const json* find(const std::string& id) const {
    auto it = by_id.find(id);
    if (it != by_id.end()) return &it->second;
    // File ids are compared modulo `./` prefixes and escaping.
    if (id.empty() || id.front() == '#' || id.find("://") != std::string::npos) return nullptr;
    const std::string path = id_to_path(id);
    for (const auto& [key, entity] : by_id) {
      if (key.front() != '#' && key.find("://") == std::string::npos && key != "./" &&
          id_to_path(key) == path)
        return &entity;
    }
    return nullptr;
  }
};

const json* find_root(const Graph& graph, std::string* root_id = nullptr) {
  const json* descriptor = graph.find(std::string(kCrateMetadataFile));
  if (!descriptor) return nullptr;
  std::string id = id_of(descriptor->value("about", json()));
  if (id.empty()) id = "./";
  if (root_id) *root_id = id;
  auto it = graph.by_id.find(id);
  return it == graph.by_id.end() ? nullptr : &it->second;
}

std::vector<zip::Entry> unwrap_single_directory(std::vector<zip::Entry> entries) {
  for (const auto& e : entries) {
    if (e.path == kCrateMetadataFile) return entries;
  }
  std::string prefix;
  for (const auto& e : entries) {
    auto slash = e.path.find('/');
    if (slash == std::string::npos) return entries;
    std::string top = e.path.substr(0, slash + 1);
    if (prefix.empty()) prefix = top;
    else if (top != prefix) return entries;
  }
  if (prefix.empty()) return entries;
  for (auto& e : entries) e.path.erase(0, prefix.size());
  return entries;
}

void add_unique(std::vector<std::string>& list, std::string value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(std::move(value));
}

}  // namespace

std::string dump_crate_metadata(const json& metadata) { return metadata.dump(2) + "\n"; }

std::string canonical_url(std::string_view base_url, EntryId id, std::optional<int> version) {
  std::string url = trim_base(base_url) + "/workflows/" + std::to_string(id);
  if (version) url += "?version=" + std::to_string(*version);
  return url;
}

json crate_metadata(const WorkflowEntry& entry, const WorkflowVersion& version,
                    const CrateOptions& options) {
  const ClassRegistry& classes = classes_of(options);
  const EdamVocabulary& vocab = vocab_of(options);
  const std::string& main = version.main_workflow_path;
  if (main.empty() || !version.files.count(main))
    throw Error(ErrorCode::crate_build_error, "main workflow file `" + main + "` is not in the version");

  std::map<std::string, json> entities;
  auto put = [&](json entity) {
    const std::string id = entity["@id"].get<std::string>();
    entities[id] = std::move(entity);
  };

  json root = {{"@id", "./"},
               {"@type", "Dataset"},
               {"name", entry.title},
               {"datePublished", timefmt::to_iso8601(version.created_at)},
               {"mainEntity", id_ref(path_to_id(main))},
               {"identifier", canonical_url(options.base_url, entry.id, version.version)}};
  if (!entry.description.empty()) root["description"] = entry.description;

  json license;
  if (!entry.license.empty()) {
    if (spdx::is_known(entry.license)) {
      const std::string iri = spdx::iri(entry.license);
      put({{"@id", iri}, {"@type", "CreativeWork"}, {"name", entry.license}, {"identifier", entry.license}});
      license = id_ref(iri);
    } else {
      license = entry.license;
    }
    root["license"] = license;
  }

  json creators = json::array();
  std::set<std::string> person_ids;
  for (std::size_t i = 0; i < entry.creators.size(); ++i) {
    const Creator& c = entry.creators[i];
    std::string id = c.orcid ? orcid_iri(*c.orcid) : "";
    if (id.empty() || person_ids.count(id)) id = "#person-" + std::to_string(i + 1);
    person_ids.insert(id);
    json person = {{"@id", id}, {"@type", "Person"}, {"name", c.name}};
    if (c.orcid) person["identifier"] = orcid_iri(*c.orcid);
    if (c.affiliation) person["affiliation"] = *c.affiliation;
    put(std::move(person));
    creators.push_back(id_ref(id));
  }
  if (!creators.empty()) root["creator"] = creators;

  if (!entry.tags.empty()) root["keywords"] = entry.tags;
  if (!entry.maturity.empty()) root["creativeWorkStatus"] = entry.maturity;
  if (entry.custom_citation) root["creditText"] = *entry.custom_citation;

  if (!entry.attributions.empty()) {
    json based = json::array();
    for (EntryId id : entry.attributions) based.push_back(id_ref(canonical_url(options.base_url, id)));
    root["isBasedOn"] = based;
  }

  if (!entry.team_ids.empty()) {
    json producers = json::array();
    for (const auto& team : entry.team_ids) {
      const std::string id = "#team-" + text::url_encode(team);
      std::string name = options.team_name ? options.team_name(team) : std::string();
      put({{"@id", id}, {"@type", "Organization"}, {"identifier", team}, {"name", name.empty() ? team : name}});
      producers.push_back(id_ref(id));
    }
    root["producer"] = producers;
  }

  // Main workflow entity.
  json wf = {{"@id", path_to_id(main)},
             {"@type", json::array({"File", "SoftwareSourceCode", "ComputationalWorkflow"})},
             {"name", entry.title},
             {"version", std::to_string(version.version)},
             {"encodingFormat", version.files.at(main).media_type}};
  if (!creators.empty()) wf["creator"] = creators;
  if (!license.is_null()) wf["license"] = license;

  const WorkflowClass* cls = classes.find(entry.workflow_class);
  WorkflowClass fallback{entry.workflow_class.empty() ? std::string(kOtherClass) : entry.workflow_class,
                         entry.workflow_class.empty() ? "Other" : entry.workflow_class,
                         std::nullopt,
                         {},
                         ""};
  put(language_entity(cls ? *cls : fallback));
  wf["programmingLanguage"] = id_ref(language_id(cls ? cls->id : fallback.id));

  auto edam_terms = [&](const std::vector<std::string>& ids) {
    json list = json::array();
    for (const auto& id : ids) {
      const std::string iri = EdamVocabulary::iri(id);
      put({{"@id", iri}, {"@type", "DefinedTerm"}, {"termCode", id}, {"name", vocab.label(id).value_or(id)}});
      list.push_back(id_ref(iri));
    }
    return list;
  };
  if (!entry.edam_topics.empty()) wf["about"] = edam_terms(entry.edam_topics);
  if (!entry.edam_operations.empty()) wf["featureList"] = edam_terms(entry.edam_operations);

  if (!entry.tool_refs.empty()) {
    json tools = json::array();
    for (std::size_t i = 0; i < entry.tool_refs.size(); ++i) {
      const ToolRef& t = entry.tool_refs[i];
      const std::string id = "#tool-" + std::to_string(i + 1);
      json tool = {{"@id", id}, {"@type", "SoftwareApplication"}, {"name", t.display_name},
                   {"identifier", t.raw_id}};
      if (t.biotools_id) tool["url"] = id_ref(std::string(kBiotoolsBase) + *t.biotools_id);
      put(std::move(tool));
      tools.push_back(id_ref(id));
    }
    wf["softwareRequirements"] = tools;
  }

  // Files, with the diagram and abstract CWL typed specially.
  json parts = json::array();
  for (const auto& [path, blob] : version.files) {
    if (path == kCrateMetadataFile) continue;
    const std::string id = path_to_id(path);
    parts.push_back(id_ref(id));
    if (path == main) continue;
    json file = {{"@id", id}, {"@type", "File"}, {"contentSize", std::to_string(blob.bytes.size())}};
    if (!blob.media_type.empty()) file["encodingFormat"] = blob.media_type;
    if (version.diagram_path && path == *version.diagram_path) {
      file["@type"] = json::array({"File", "ImageObject"});
      wf["image"] = id_ref(id);
    } else if (version.abstract_cwl_path && path == *version.abstract_cwl_path) {
      file["@type"] = json::array({"File", "SoftwareSourceCode", "HowTo"});
      if (const WorkflowClass* cwl = classes.find("cwl")) {
        put(language_entity(*cwl));
        file["programmingLanguage"] = id_ref(language_id(cwl->id));
      }
      wf["subjectOf"] = id_ref(id);
    }
    put(std::move(file));
  }
  root["hasPart"] = parts;
  put(std::move(wf));

  std::vector<json> graph;
  graph.push_back({{"@id", std::string(kCrateMetadataFile)},
                   {"@type", "CreativeWork"},
                   {"about", id_ref("./")},
                   {"conformsTo", json::array({id_ref(kRoCrateSpec), id_ref(kWorkflowCrateProfile)})}});
  graph.push_back(std::move(root));
  if (version.crate_extras.is_array()) {
    for (const auto& extra : version.crate_extras) {
      const std::string id = id_of(extra);
      if (!id.empty() && id != "./" && id != kCrateMetadataFile && !entities.count(id))
        entities.emplace(id, extra);
    }
  }
  for (auto& [id, entity] : entities) graph.push_back(std::move(entity));

  return {{"@context", kRoCrateContext}, {"@graph", graph}};
}

WorkflowCrate build_crate(const WorkflowEntry& entry, const WorkflowVersion& version,
                          const CrateOptions& options) {
  WorkflowCrate crate;
  crate.metadata = crate_metadata(entry, version, options);
  crate.main_entity_path = version.main_workflow_path;
  crate.conforms_to = {std::string(kRoCrateSpec), std::string(kWorkflowCrateProfile)};

  std::vector<zip::Entry> entries;
  entries.push_back({std::string(kCrateMetadataFile), dump_crate_metadata(crate.metadata)});
  for (const auto& [path, blob] : version.files) {
    if (path != kCrateMetadataFile) entries.push_back({path, blob.bytes});
  }
  crate.archive = zip::write(entries, version.created_at);
  return crate;
}

CrateContents read_crate(std::string_view archive, const CrateOptions& options) {
  std::vector<zip::Entry> entries;
  try {
    entries = unwrap_single_directory(zip::read(archive, options.limits));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::size_limit) throw;
    throw Error(ErrorCode::not_a_crate, std::string("not a readable zip archive: ") + e.what());
  }

  CrateContents out;
  const std::string* metadata_text = nullptr;
  for (const auto& e : entries) {
    if (e.path == kCrateMetadataFile) metadata_text = &e.data;
  }
  if (!metadata_text) throw Error(ErrorCode::not_a_crate, "archive has no ro-crate-metadata.json");

  json metadata;
  try {
    metadata = json::parse(*metadata_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_crate, std::string("metadata is not JSON: ") + e.what());
  }
  if (!metadata.is_object()) throw Error(ErrorCode::invalid_crate, "metadata is not a JSON object");
  const Graph graph = Graph::from(metadata);

  std::string root_id;
  const json* root = find_root(graph, &root_id);
  if (!root) throw Error(ErrorCode::invalid_crate, "metadata has no descriptor or root dataset");
  std::set<std::string> known{std::string(kCrateMetadataFile), root_id};

  for (const auto& e : entries) {
    if (e.path == kCrateMetadataFile) continue;
    const json* entity = graph.find(e.path);
    std::string media = entity ? string_of(*entity, "encodingFormat") : std::string();
    if (media.empty() || media.find("://") != std::string::npos) media = guess_media_type(e.path);
    out.files.emplace(e.path, FileBlob{e.data, media});
    if (entity) {
      known.insert(id_of(*entity));
      if (auto lang = id_of(entity->value("programmingLanguage", json())); !lang.empty()) known.insert(lang);
    }
  }

  if (const json* descriptor = graph.find(std::string(kCrateMetadataFile))) {
    for (const auto& c : as_list(descriptor->value("conformsTo", json()))) add_unique(out.conforms_to, id_of(c));
  }
  for (const auto& c : as_list(root->value("conformsTo", json()))) add_unique(out.conforms_to, id_of(c));

  const std::string main_id = id_of(root->value("mainEntity", json()));
  const std::string main_path = id_to_path(main_id);
  if (main_id.empty() || !out.files.count(main_path))
    throw Error(ErrorCode::invalid_crate, "mainEntity `" + main_id + "` does not resolve to an archive file");
  out.main_workflow_path = main_path;
  const json* wf = graph.find(main_id);
  static const json empty_object = json::object();
  if (!wf) wf = &empty_object;

  out.title = string_of(*root, "name");
  if (out.title.empty()) out.title = string_of(*wf, "name");
  out.description = string_of(*root, "description");
  if (auto published = timefmt::parse_iso8601(string_of(*root, "datePublished"))) out.date_published = published;

  // License: SPDX IRI, a license entity, or free text.
  json license = root->value("license", wf->value("license", json()));
  if (license.is_string()) {
    const std::string s = license.get<std::string>();
    out.license = spdx::id_from_iri(s).value_or(s);
  } else if (!license.is_null()) {
    const std::string iri = id_of(license);
    known.insert(iri);
    if (auto id = spdx::id_from_iri(iri)) out.license = *id;
    else if (const json* e = graph.find(iri); e && !string_of(*e, "identifier").empty())
      out.license = string_of(*e, "identifier");
    else out.license = iri;
  }

  json creator_refs = root->value("creator", wf->value("creator", json()));
  for (const auto& c : as_list(creator_refs)) {
    const std::string id = id_of(c);
    const json* person = id.empty() ? nullptr : graph.find(id);
    if (!id.empty()) known.insert(id);
    Creator creator;
    const json& p = person ? *person : c;
    creator.name = string_of(p, "name");
    std::string orcid = string_of(p, "identifier");
    if (orcid.find("orcid.org/") == std::string::npos && id.find("orcid.org/") != std::string::npos) orcid = id;
    if (orcid.find("orcid.org/") != std::string::npos) creator.orcid = normalize_orcid(orcid);
    if (auto aff = p.find("affiliation"); aff != p.end()) {
      if (aff->is_string()) {
        creator.affiliation = aff->get<std::string>();
      } else if (const std::string aff_id = id_of(*aff); !aff_id.empty()) {
        const json* org = graph.find(aff_id);
        known.insert(aff_id);
        creator.affiliation = org ? string_of(*org, "name") : aff_id;
      }
    }
    if (creator.name.empty() && !creator.orcid) creator.name = id;
    out.creators.push_back(std::move(creator));
  }

  // Workflow class from programmingLanguage, else by detection.
  const ClassRegistry& classes = classes_of(options);
  if (const std::string lang_id = id_of(wf->value("programmingLanguage", json())); !lang_id.empty()) {
    known.insert(lang_id);
    const json* lang = graph.find(lang_id);
    std::vector<std::string> candidates;
    if (lang) candidates = {string_of(*lang, "alternateName"), string_of(*lang, "name")};
    if (lang_id.front() == '#') candidates.insert(candidates.begin(), lang_id.substr(1));
    for (const auto& c : candidates) {
      if (c.empty()) continue;
      if (const WorkflowClass* cls = classes.lookup(c)) {
        out.workflow_class = cls->id;
        break;
      }
    }
  }
  if (!out.workflow_class) {
    const std::string& content = out.files.at(main_path).bytes;
    out.workflow_class = content.size() <= kDefaultMaxParseBytes
                             ? detect_class(classes, main_path, content)
                             : classes.match_name(main_path).value_or(std::string(kOtherClass));
  }

  for (const char* key : {"about", "featureList"}) {
    for (const auto& term : as_list(wf->value(key, json()))) {
      const std::string iri = id_of(term);
      auto id = EdamVocabulary::id_from_reference(iri);
      if (!id) continue;
      known.insert(iri);
      if (EdamVocabulary::has_syntax(*id, EdamBranch::topic)) add_unique(out.edam_topics, *id);
      else if (EdamVocabulary::has_syntax(*id, EdamBranch::operation)) add_unique(out.edam_operations, *id);
    }
  }

  if (auto kw = root->find("keywords"); kw != root->end()) {
    if (kw->is_string()) {
      for (const auto& t : text::split(kw->get<std::string>(), ',')) {
        std::string tag(text::trim(t));
        if (!tag.empty()) out.tags.push_back(tag);
      }
    } else if (kw->is_array()) {
      for (const auto& t : *kw)
        if (t.is_string()) out.tags.push_back(t.get<std::string>());
    }
  }

  if (auto status = string_of(*root, "creativeWorkStatus"); !status.empty()) out.maturity = status;
  if (auto credit = root->find("creditText"); credit != root->end() && credit->is_string())
    out.custom_citation = credit->get<std::string>();

  for (const auto& t : as_list(wf->value("softwareRequirements", json()))) {
    const std::string id = id_of(t);
    const json* tool = id.empty() ? nullptr : graph.find(id);
    if (!tool) continue;
    known.insert(id);
    ToolRef ref;
    ref.raw_id = string_of(*tool, "identifier");
    ref.display_name = string_of(*tool, "name");
    if (ref.raw_id.empty()) ref.raw_id = ref.display_name;
    if (ref.display_name.empty()) ref.display_name = ref.raw_id;
    std::string url = string_of(*tool, "url");
    if (url.empty() && id.rfind(kBiotoolsBase, 0) == 0) url = id;
    if (url.rfind(kBiotoolsBase, 0) == 0) ref.biotools_id = url.substr(kBiotoolsBase.size());
    out.tool_refs.push_back(std::move(ref));
  }

  for (const auto& p : as_list(root->value("producer", json()))) {
    const std::string id = id_of(p);
    const json* org = id.empty() ? nullptr : graph.find(id);
    if (!org) continue;
    known.insert(id);
    if (auto team = string_of(*org, "identifier"); !team.empty()) out.team_ids.push_back(team);
  }

  const std::regex own_entry("^" + std::regex_replace(trim_base(options.base_url),
                                                      std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)") +
                             R"(/workflows/(\d+)(\?.*)?$)");
  for (const auto& b : as_list(root->value("isBasedOn", json()))) {
    const std::string iri = id_of(b);
    if (iri.empty()) continue;
    out.based_on.push_back(iri);
    std::smatch m;
    if (std::regex_match(iri, m, own_entry)) {
      EntryId id = std::stoull(m[1].str());
      if (std::find(out.attribution_candidates.begin(), out.attribution_candidates.end(), id) ==
          out.attribution_candidates.end())
        out.attribution_candidates.push_back(id);
    }
  }

  if (const std::string image = id_of(wf->value("image", json())); !image.empty() &&
                                                                   out.files.count(id_to_path(image)))
    out.diagram_path = id_to_path(image);
  if (const std::string cwl = id_of(wf->value("subjectOf", json())); !cwl.empty() &&
                                                                    out.files.count(id_to_path(cwl)))
    out.abstract_cwl_path = id_to_path(cwl);
  known.insert(main_id);

  for (const auto& [id, entity] : graph.by_id) {
    if (!known.count(id)) out.extras.push_back(entity);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ConformanceLevel level) {
  switch (level) {
    case ConformanceLevel::valid: return "valid";
    case ConformanceLevel::warnings: return "warnings";
    case ConformanceLevel::invalid: return "invalid";
  }
  return "invalid";
}

bool ConformanceReport::has(std::string_view code) const {
  return std::any_of(findings.begin(), findings.end(), [&](const CrateFinding& f) { return f.code == code; });
}

ConformanceReport validate_crate(std::string_view archive, const zip::Limits& limits) {
  ConformanceReport report;
  auto error = [&](std::string code, std::string message) {
    report.findings.push_back({true, std::move(code), std::move(message)});
  };
  auto warn = [&](std::string code, std::string message) {
    report.findings.push_back({false, std::move(code), std::move(message)});
  };
  auto finish = [&]() {
    bool any_error = false, any_warning = false;
    for (const auto& f : report.findings) (f.error ? any_error : any_warning) = true;
    report.level = any_error ? ConformanceLevel::invalid
                             : any_warning ? ConformanceLevel::warnings : ConformanceLevel::valid;
    return report;
  };

  std::vector<zip::Entry> entries;
  try {
    entries = unwrap_single_directory(zip::read(archive, limits));
  } catch (const std::exception& e) {
    error("NotAZip", e.what());
    return finish();
  }
  const zip::Entry* metadata_entry = nullptr;
  std::set<std::string> archive_paths;
  for (const auto& e : entries) {
    if (e.path == kCrateMetadataFile) metadata_entry = &e;
    else archive_paths.insert(e.path);
  }
  if (!metadata_entry) {
    error("MetadataMissing", "no ro-crate-metadata.json at the archive root");
    return finish();
  }

  Graph graph;
  try {
    json metadata = json::parse(metadata_entry->data);
    graph = Graph::from(metadata);
  } catch (const std::exception& e) {
    error("MetadataInvalid", e.what());
    return finish();
  }

  const json* descriptor = graph.find(std::string(kCrateMetadataFile));
  if (!descriptor) {
    error("DescriptorMissing", "no metadata descriptor entity");
    return finish();
  }
  std::string root_id;
  const json* root = find_root(graph, &root_id);
  if (!root) {
    error("RootMissing", "descriptor `about` does not resolve to a root dataset");
    return finish();
  }

  bool profile = false;
  for (const json* e : {descriptor, root}) {
    for (const auto& c : as_list(e->value("conformsTo", json())))
      if (id_of(c) == kWorkflowCrateProfile) profile = true;
  }
  if (!profile) warn("ProfileMissing", "crate does not declare the Workflow RO-Crate profile");

  const std::string main_id = id_of(root->value("mainEntity", json()));
  const json* wf = main_id.empty() ? nullptr : graph.find(main_id);
  if (!wf) {
    error("MainEntityMissing", "root dataset has no resolvable mainEntity");
  } else {
    auto types = types_of(*wf);
    for (const char* t : {"File", "SoftwareSourceCode", "ComputationalWorkflow"}) {
      if (!types.count(t)) error("MainEntityType", "mainEntity is not typed " + std::string(t));
    }
    if (wf->value("programmingLanguage", json()).is_null())
      warn("ProgrammingLanguageMissing", "mainEntity has no programmingLanguage");
  }
  if (root->value("license", json()).is_null() &&
      (!wf || wf->value("license", json()).is_null()))
    warn("LicenseMissing", "no license declared");

  std::set<std::string> described;
  for (const auto& [id, entity] : graph.by_id) {
    if (id.front() == '#' || id.find("://") != std::string::npos || id == root_id ||
        id == kCrateMetadataFile)
      continue;
    const std::string path = id_to_path(id);
    if (!types_of(entity).count("File")) {
      described.insert(path);
      continue;
    }
    described.insert(path);
    if (!archive_paths.count(path)) error("FileMissing", "`" + id + "` is described but not in the archive");
  }
  for (const auto& path : archive_paths) {
    if (path == "ro-crate-preview.html" || described.count(path)) continue;
    bool inside_dataset = false;
    for (const auto& d : described) {
      if (!d.empty() && d.back() == '/' && path.rfind(d, 0) == 0) inside_dataset = true;
    }
    if (!inside_dataset) warn("OrphanFile", "`" + path + "` is in the archive but not described");
  }
  return finish();
}

// ---------------------------------------------------------------------------

json emit_bioschemas(const WorkflowEntry& entry, const WorkflowVersion& version,
                     const CrateOptions& options) {
  const ClassRegistry& classes = classes_of(options);
  const std::string id = canonical_url(options.base_url, entry.id, version.version);

  json wf = {{"@id", id},
             {"@type", json::array({"SoftwareSourceCode", "ComputationalWorkflow"})},
             {"dct:conformsTo", id_ref(kBioschemasWorkflowProfile)},
             {"name", entry.title},
             {"identifier", id},
             {"url", canonical_url(options.base_url, entry.id)},
             {"version", std::to_string(version.version)},
             {"dateCreated", timefmt::to_iso8601(entry.created_at)},
             {"dateModified", timefmt::to_iso8601(entry.updated_at)}};
  if (!entry.description.empty()) wf["description"] = entry.description;
  if (!entry.license.empty())
    wf["license"] = spdx::is_known(entry.license) ? spdx::iri(entry.license) : entry.license;
  if (!entry.tags.empty()) {
    std::string keywords;
    for (const auto& t : entry.tags) keywords += (keywords.empty() ? "" : ", ") + t;
    wf["keywords"] = keywords;
  }
  if (!entry.maturity.empty()) wf["creativeWorkStatus"] = entry.maturity;

  json creators = json::array();
  for (const auto& c : entry.creators) {
    json person = {{"@type", "Person"}, {"name", c.name}};
    if (c.orcid) person["@id"] = orcid_iri(*c.orcid);
    creators.push_back(std::move(person));
  }
  if (!creators.empty()) wf["creator"] = creators;

  if (const WorkflowClass* cls = classes.find(entry.workflow_class)) {
    json lang = {{"@type", "ComputerLanguage"}, {"name", cls->display_name}, {"identifier", cls->id}};
    if (!cls->url.empty()) lang["url"] = cls->url;
    wf["programmingLanguage"] = lang;
  }

  auto iris = [](const std::vector<std::string>& ids) {
    json list = json::array();
    for (const auto& i : ids) list.push_back(id_ref(EdamVocabulary::iri(i)));
    return list;
  };
  if (!entry.edam_topics.empty()) wf["about"] = iris(entry.edam_topics);
  if (!entry.edam_operations.empty()) wf["featureList"] = iris(entry.edam_operations);

  if (!entry.attributions.empty()) {
    json based = json::array();
    for (EntryId a : entry.attributions) based.push_back(id_ref(canonical_url(options.base_url, a)));
    wf["isBasedOn"] = based;
  }
  if (auto doi = entry.doi_records.find(version.version); doi != entry.doi_records.end())
    wf["sameAs"] = "https://doi.org/" + doi->second.doi;

  std::vector<json> graph;
  auto parameters = [&](const std::vector<PortDecl>& ports, const char* kind) {
    json refs = json::array();
    for (const auto& port : ports) {
      json p = {{"@id", id + "#" + kind + "-" + text::url_encode(port.id)},
                {"@type", "FormalParameter"},
                {"dct:conformsTo", id_ref(kBioschemasParameterProfile)},
                {"name", port.id}};
      if (port.label) p["description"] = *port.label;
      if (port.data_type) p["additionalType"] = *port.data_type;
      if (port.edam_format) p["encodingFormat"] = EdamVocabulary::iri(*port.edam_format);
      refs.push_back(id_ref(p["@id"].get<std::string>()));
      graph.push_back(std::move(p));
    }
    return refs;
  };
  if (version.structure) {
    if (auto in = parameters(version.structure->inputs, "input"); !in.empty()) wf["input"] = in;
    if (auto out = parameters(version.structure->outputs, "output"); !out.empty()) wf["output"] = out;
  }

  json tools = json::array();
  std::set<std::string> tool_ids;
  for (std::size_t i = 0; i < entry.tool_refs.size(); ++i) {
    const ToolRef& t = entry.tool_refs[i];
    const std::string tool_id = t.biotools_id ? std::string(kBiotoolsBase) + *t.biotools_id
                                              : id + "#tool-" + std::to_string(i + 1);
    if (!tool_ids.insert(tool_id).second) continue;
    json tool = {{"@id", tool_id},
                 {"@type", "SoftwareApplication"},
                 {"dct:conformsTo", id_ref(kBioschemasToolProfile)},
                 {"name", t.display_name}};
    if (t.biotools_id) tool["url"] = tool_id;
    tools.push_back(id_ref(tool_id));
    graph.push_back(std::move(tool));
  }
  if (!tools.empty()) wf["hasPart"] = tools;

  graph.insert(graph.begin(), std::move(wf));
  return {{"@context", {{"@vocab", "https://schema.org/"}, {"dct", "http://purl.org/dc/terms/"}}},
          {"@graph", graph}};
}

}  // namespace flowhub
