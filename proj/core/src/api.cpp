#include "flowhub/api.hpp"

#include <algorithm>
#include <functional>

#include "flowhub/parsers.hpp"
#include "flowhub/serialize.hpp"

namespace flowhub {

using nlohmann::json;

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  for (const auto& part : text::split(path, '/')) {
    if (!part.empty()) out.push_back(text::url_decode(part));
  }
  return out;
}

json parse_body(const ApiRequest& req) {
  if (text::trim(req.body).empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed JSON body: ") + e.what());
  }
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

EntryId parse_entry_id(const std::string& s) {
  if (s.empty() || s.size() > 19 || s.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorCode::not_found, "no workflow `" + s + "`");
  return std::stoull(s);
}

int parse_version(const std::string& s) {
  if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorCode::unknown_version, "no version `" + s + "`");
  return std::stoi(s);
}

std::size_t parse_count(const std::optional<std::string>& s, std::size_t fallback, std::string_view name) {
  if (!s) return fallback;
  if (s->empty() || s->size() > 9 || s->find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorCode::bad_query, std::string(name) + " must be a non-negative integer");
  return std::stoul(*s);
}

FileTree files_from_json(const json& files) {
  if (!files.is_object()) fail(ErrorCode::invalid_argument, "`files` must map paths to contents");
  FileTree tree;
  for (auto it = files.begin(); it != files.end(); ++it) {
    FileBlob blob;
    if (it->is_string()) {
      blob.bytes = it->get<std::string>();
    } else if (it->is_object()) {
      if (auto b64 = it->find("content_base64"); b64 != it->end()) blob.bytes = base64::decode(b64->get<std::string>());
      else blob.bytes = it->value("content", "");
      blob.media_type = it->value("media_type", "");
    } else {
      fail(ErrorCode::invalid_argument, "bad file entry `" + it.key() + "`");
    }
    tree.emplace(it.key(), std::move(blob));
  }
  return tree;
}

RegistrationSource source_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::invalid_argument, "`source` must be an object");
  const std::string kind = j.value("kind", "upload");
  try {
    if (kind == "upload") {
      UploadRequest r;
      r.files = files_from_json(j.value("files", json::object()));
      r.main_path = j.value("main_path", "");
      if (auto d = j.find("diagram_path"); d != j.end() && d->is_string()) r.diagram_path = d->get<std::string>();
      return r;
    }
    if (kind == "git") {
      GitRequest r;
      r.remote = j.at("remote").get<std::string>();
      if (auto ref = j.find("ref"); ref != j.end() && ref->is_string()) r.ref = ref->get<std::string>();
      if (auto m = j.find("main_path"); m != j.end() && m->is_string()) r.main_path = m->get<std::string>();
      return r;
    }
    if (kind == "crate") return CrateRequest{base64::decode(j.at("archive_base64").get<std::string>())};
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("bad source: ") + e.what());
  }
  fail(ErrorCode::invalid_argument, "unknown source kind `" + kind + "`");
}

json report_json(const ValidationReport& report) { return report; }

json version_json(const WorkflowVersion& v) {
  json j = v;
  j["source_kind"] = source_kind(v.source);
  return j;
}

json draft_json(const Draft& d, const ApiService& api) {
  json j{{"entry", api.entry_json(d.entry)}, {"report", report_json(d.report)}, {"notes", d.notes}};
  json candidates = json::array();
  for (const auto& c : d.candidates) candidates.push_back({{"path", c.path}, {"class", c.class_id}});
  j["candidates"] = std::move(candidates);
  j["readme"] = d.readme;
  return j;
}

bool accepts(const ApiRequest& req, std::string_view type) {
  return req.header("accept").find(type) != std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// Request / response

std::optional<std::string> ApiRequest::param(std::string_view name) const {
  for (const auto& [k, v] : query) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::vector<std::string> ApiRequest::params(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : query) {
    if (k == name) out.push_back(v);
  }
  return out;
}

std::string ApiRequest::header(std::string_view name) const {
  auto it = headers.find(text::to_lower(name));
  return it == headers.end() ? std::string() : it->second;
}

ApiRequest ApiRequest::make(std::string method, std::string_view target, std::string body) {
  ApiRequest r;
  r.method = std::move(method);
  r.body = std::move(body);
  auto q = target.find('?');
  r.path = std::string(target.substr(0, q));
  if (q != std::string_view::npos) {
    for (const auto& pair : text::split(target.substr(q + 1), '&')) {
      if (pair.empty()) continue;
      auto eq = pair.find('=');
      std::string k = pair.substr(0, eq), v = eq == std::string::npos ? "" : pair.substr(eq + 1);
      std::replace(k.begin(), k.end(), '+', ' ');
      std::replace(v.begin(), v.end(), '+', ' ');
      r.query.emplace_back(text::url_decode(k), text::url_decode(v));
    }
  }
  return r;
}

std::string ApiResponse::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (text::iequals(k, name)) return v;
  }
  return {};
}

std::vector<std::string> ApiResponse::header_values(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : headers) {
    if (text::iequals(k, name)) out.push_back(v);
  }
  return out;
}

json ApiResponse::json_body() const { return json::parse(body); }

ApiResponse ApiResponse::json(int status, const nlohmann::json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

ApiResponse ApiResponse::error(int status, std::string_view code, const std::string& message) {
  return json(status, {{"code", code}, {"message", message}});
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::bad_query:
      return 400;
    case ErrorCode::unauthenticated:
      return 401;
    case ErrorCode::access_denied:
    case ErrorCode::forbidden:
      return 403;
    case ErrorCode::not_found:
    case ErrorCode::unknown_version:
      return 404;
    case ErrorCode::frozen_version:
    case ErrorCode::conflict:
    case ErrorCode::duplicate_item:
    case ErrorCode::attribution_cycle:
    case ErrorCode::visibility_required:
      return 409;
    case ErrorCode::size_limit:
      return 413;
    case ErrorCode::parse_error:
    case ErrorCode::schema_error:
    case ErrorCode::not_a_workflow:
    case ErrorCode::invalid_structure:
    case ErrorCode::crate_build_error:
    case ErrorCode::not_a_crate:
    case ErrorCode::invalid_crate:
    case ErrorCode::fetch_error:
    case ErrorCode::ref_not_found:
    case ErrorCode::registration_rejected:
    case ErrorCode::validation_failed:
      return 422;
    case ErrorCode::mint_failed:
      return 502;
    case ErrorCode::integrity_error:
    case ErrorCode::io_error:
      return 500;
  }
  return 500;
}

// ---------------------------------------------------------------------------
// TRS views

std::string trs_tool_id(EntryId id) { return "#workflow/" + std::to_string(id); }

std::vector<std::string> descriptor_types(const ClassRegistry& classes, std::string_view class_id) {
  const WorkflowClass* cls = classes.find(class_id);
  if (cls && cls->trs_descriptor_type) return {*cls->trs_descriptor_type};
  return {"PLAIN_" + text::to_upper(class_id)};
}

namespace {

std::string tool_url(const Config& config, EntryId id) {
  return config.base_url + std::string(kTrsPrefix) + "/tools/" + text::url_encode(trs_tool_id(id));
}

json tool_class() {
  return {{"id", "Workflow"}, {"name", "Workflow"}, {"description", "A computational workflow"}};
}

}  // namespace

json trs_tool_version(const WorkflowEntry& entry, const WorkflowVersion& version, const ClassRegistry& classes,
                      const Config& config) {
  json authors = json::array();
  for (const auto& c : entry.creators) authors.push_back(c.name);
  json j{{"id", std::to_string(version.version)},
         {"url", tool_url(config, entry.id) + "/versions/" + std::to_string(version.version)},
         {"name", version.revision_comment.empty() ? "v" + std::to_string(version.version) : version.revision_comment},
         {"author", std::move(authors)},
         {"descriptor_type", descriptor_types(classes, entry.workflow_class)},
         {"is_production", version.frozen},
         {"verified", false},
         {"verified_source", json::array()},
         {"signed", false},
         {"containerfile", false},
         {"included_apps", json::array()},
         {"images", json::array()},
         {"meta_version", timefmt::to_iso8601(version.created_at)}};
  return j;
}

json trs_tool(const WorkflowEntry& entry, const ClassRegistry& classes, const Config& config,
              const std::map<TeamId, std::string>& team_names) {
  std::string organization;
  for (const auto& t : entry.team_ids) {
    auto it = team_names.find(t);
    organization += (organization.empty() ? "" : ", ") + (it == team_names.end() ? t : it->second);
  }
  json aliases = json::array();
  for (const auto& [v, record] : entry.doi_records) aliases.push_back("https://doi.org/" + record.doi);
  json versions = json::array();
  for (const auto& v : entry.versions) versions.push_back(trs_tool_version(entry, v, classes, config));
  return {{"id", trs_tool_id(entry.id)},
          {"url", tool_url(config, entry.id)},
          {"name", entry.title},
          {"description", entry.description},
          {"organization", organization},
          {"aliases", std::move(aliases)},
          {"toolclass", tool_class()},
          {"has_checker", false},
          {"meta_version", timefmt::to_iso8601(entry.updated_at)},
          {"versions", std::move(versions)}};
}

json trs_service_info(const Config& config) {
  return {{"id", "org.flowhub.trs"},
          {"name", "FlowHub workflow registry"},
          {"type", {{"group", "org.ga4gh"}, {"artifact", "trs"}, {"version", std::string(kTrsVersion)}}},
          {"description", "GA4GH Tool Registry Service for registered computational workflows"},
          {"organization", {{"name", config.publisher}, {"url", config.base_url}}},
          {"documentationUrl", config.base_url + "/api"},
          {"environment", "production"},
          {"version", "0.3.0"}};
}

json trs_tool_classes() { return json::array({tool_class()}); }

std::string trs_file_type(const WorkflowVersion& version, const std::string& path, const ClassRegistry& classes,
                          std::string_view class_id) {
  if (path == version.main_workflow_path) return "PRIMARY_DESCRIPTOR";
  const std::string lower = text::to_lower(path);
  const std::string name = text::basename(lower);
  if (lower.rfind("test/", 0) == 0 || lower.rfind("tests/", 0) == 0 || lower.find("/test/") != std::string::npos ||
      lower.find("/tests/") != std::string::npos || name.find("-test") != std::string::npos ||
      name.find("_test") != std::string::npos || name.rfind("test", 0) == 0)
    return "TEST_FILE";
  if (class_id != kOtherClass && classes.match_name(path) == std::optional<ClassId>(std::string(class_id)))
    return "SECONDARY_DESCRIPTOR";
  return "OTHER";
}

// ---------------------------------------------------------------------------
// Landing page

std::vector<LinkTarget> signposting_links(const WorkflowEntry& entry, const WorkflowVersion& version,
                                          const Config& config) {
  std::vector<LinkTarget> links;
  const std::string v = std::to_string(version.version);
  const std::string base = config.base_url + "/workflows/" + std::to_string(entry.id);
  auto doi = entry.doi_records.find(version.version);
  links.push_back({doi != entry.doi_records.end() ? "https://doi.org/" + doi->second.doi
                                                  : canonical_url(config.base_url, entry.id, version.version),
                   "cite-as", ""});
  links.push_back({base + "?version=" + v + "&format=json", "describedby", "application/json"});
  links.push_back({base + "?version=" + v + "&format=jsonld", "describedby", "application/ld+json"});
  links.push_back({base + "/ro_crate?version=" + v, "item", "application/zip"});
  for (const auto& c : entry.creators) {
    if (c.orcid) links.push_back({"https://orcid.org/" + *c.orcid, "author", ""});
  }
  links.push_back({"https://schema.org/AboutPage", "type", ""});
  if (!entry.license.empty() && spdx::is_known(entry.license)) links.push_back({spdx::iri(entry.license), "license", ""});
  return links;
}

std::string format_link_header(const std::vector<LinkTarget>& links) {
  std::string out;
  for (const auto& l : links) {
    if (!out.empty()) out += ", ";
    out += "<" + l.href + ">; rel=\"" + l.rel + "\"";
    if (!l.type.empty()) out += "; type=\"" + l.type + "\"";
  }
  return out;
}

std::string landing_html(const WorkflowEntry& entry, const WorkflowVersion& version, const json& jsonld) {
  std::string ld = jsonld.dump(2);
  for (std::size_t pos = ld.find("</"); pos != std::string::npos; pos = ld.find("</", pos + 3)) ld.replace(pos, 2, "<\\/");
  std::string html = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" +
                     html_escape(entry.title) + "</title>\n<script type=\"application/ld+json\">\n" + ld +
                     "\n</script>\n</head>\n<body>\n<h1>" + html_escape(entry.title) + "</h1>\n";
  html += "<p>Version " + std::to_string(version.version) + " &middot; " + html_escape(entry.workflow_class) + "</p>\n";
  if (!entry.description.empty()) html += "<pre>" + html_escape(entry.description) + "</pre>\n";
  if (!entry.creators.empty()) {
    html += "<ul>\n";
    for (const auto& c : entry.creators) html += "<li>" + html_escape(c.name) + "</li>\n";
    html += "</ul>\n";
  }
  html += "</body>\n</html>\n";
  return html;
}

// ---------------------------------------------------------------------------
// Service

struct ApiService::Context {
  const ApiRequest& req;
  Actor actor;
  std::vector<std::string> seg;
  const std::string& method;

  bool is(std::string_view m) const { return method == m; }
  std::size_t size() const { return seg.size(); }
  const std::string& operator[](std::size_t i) const { return seg[i]; }
};

ApiService::ApiService(Registry& registry) : registry_(registry) {}

json ApiService::entry_json(const WorkflowEntry& entry) const {
  json j = entry;
  const Config& config = registry_.config();
  j["url"] = canonical_url(config.base_url, entry.id);
  j["trs_id"] = trs_tool_id(entry.id);
  if (!entry.versions.empty()) {
    json launch = json::array();
    for (const Launcher* l : launchers_for(config, entry.workflow_class))
      launch.push_back({{"id", l->id}, {"url", config.base_url + "/workflows/" + std::to_string(entry.id) + "/launch/" + l->id}});
    if (!launch.empty()) j["launch"] = std::move(launch);
  }
  if (entry.id != 0) j["collections"] = registry_.collections_containing(entry.id);
  if (!entry.doi_records.empty()) j["citation"] = "https://doi.org/" + entry.doi_records.rbegin()->second.doi;
  else if (entry.custom_citation) j["citation"] = *entry.custom_citation;
  else j["citation"] = canonical_url(config.base_url, entry.id);
  return j;
}

ApiResponse ApiService::handle(const ApiRequest& request, const Actor* as) {
  Actor actor;
  try {
    if (as) {
      actor = *as;
    } else {
      const std::string auth = request.header("authorization");
      if (!auth.empty()) {
        if (auth.rfind("Bearer ", 0) != 0) return ApiResponse::error(401, "unauthenticated", "expected a Bearer token");
        auto user = registry_.authenticate(std::string(text::trim(auth.substr(7))));
        if (!user) return ApiResponse::error(401, "unauthenticated", "invalid or expired token");
        actor = Actor::of(*user);
      }
    }
    Context ctx{request, actor, split_path(request.path), request.method};
    return dispatch(ctx);
  } catch (const RejectedError& e) {
    ApiResponse r = ApiResponse::json(http_status(e.code()),
                                      {{"code", to_string(e.code())}, {"message", e.what()}, {"report", e.report()}});
    return r;
  } catch (const Error& e) {
    // Anonymous callers cannot tell hidden entries from missing ones.
    if (e.code() == ErrorCode::access_denied && !actor.authenticated())
      return ApiResponse::error(404, "not_found", "not found");
    return ApiResponse::error(http_status(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    return ApiResponse::error(400, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return ApiResponse::error(500, "internal_error", e.what());
  }
}

ApiResponse ApiService::dispatch(Context& c) {
  if (c.size() == 0) {
    return ApiResponse::json(200, {{"name", "flowhub"}, {"trs", registry_.config().base_url + std::string(kTrsPrefix)}});
  }
  if (c.size() >= 3 && c[0] == "ga4gh" && c[1] == "trs" && c[2] == "v2") return route_trs(c);
  if (c[0] == "workflows") return route_workflows(c);
  if (c[0] == "search" && c.size() == 1 && c.is("GET")) {
    SearchQuery q;
    q.text = c.req.param("q");
    for (const auto& [k, v] : c.req.query) {
      if (k.rfind("filter[", 0) == 0 && k.back() == ']') {
        q.facet_filters[k.substr(7, k.size() - 8)].insert(v);
      } else if (k == "facet") {
        auto sep = v.find_first_of("=:");
        if (sep == std::string::npos) fail(ErrorCode::bad_query, "facet must look like name=value");
        q.facet_filters[v.substr(0, sep)].insert(v.substr(sep + 1));
      }
    }
    if (auto sort = c.req.param("sort")) {
      std::string key = *sort;
      if (!key.empty() && key.front() == '-') {
        q.order = SortOrder::desc;
        key.erase(0, 1);
      } else {
        q.order = SortOrder::asc;
      }
      q.sort = parse_sort_key(key);
    }
    if (auto order = c.req.param("order")) q.order = parse_sort_order(*order);
    q.page = parse_count(c.req.param("page"), 1, "page");
    q.page_size = parse_count(c.req.param("page_size"), 20, "page_size");
    SearchPage page = registry_.search(c.actor, q);
    json hits = json::array();
    for (const auto& e : page.hits) {
      hits.push_back({{"id", e.id},
                      {"title", e.title},
                      {"workflow_class", e.workflow_class},
                      {"team_ids", e.team_ids},
                      {"maturity", e.maturity},
                      {"created_at", e.created_at},
                      {"updated_at", e.updated_at},
                      {"metrics", e.metrics},
                      {"url", canonical_url(registry_.config().base_url, e.id)}});
    }
    return ApiResponse::json(200, {{"hits", std::move(hits)},
                                   {"facet_counts", page.facet_counts},
                                   {"total", page.total},
                                   {"page", q.page},
                                   {"page_size", q.page_size},
                                   {"sort", to_string(q.sort)},
                                   {"order", to_string(q.order)}});
  }
  if (c[0] == "auth" && c.size() == 2 && c[1] == "token" && c.is("POST")) {
    json body = parse_body(c.req);
    const std::string user = body.value("user_id", body.value("username", ""));
    const std::string password = body.value("password", "");
    if (user.empty() || password.empty()) fail(ErrorCode::invalid_argument, "user_id and password are required");
    const std::string token = registry_.issue_token(user, password);
    return ApiResponse::json(200, {{"token", token},
                                   {"token_type", "Bearer"},
                                   {"user_id", user},
                                   {"expires_in", registry_.config().token_lifetime_s}});
  }
  if (c[0] == "notifications" && c.size() == 1 && c.is("GET")) {
    if (!c.actor.user) fail(ErrorCode::unauthenticated, "authentication required");
    json events = json::array();
    for (const auto& e : registry_.notifications(c.actor)) events.push_back(to_json(e));
    return ApiResponse::json(200, {{"events", std::move(events)}});
  }
  return route_entities(c);
}

namespace {

std::optional<int> version_param(const ApiRequest& req) {
  auto v = req.param("version");
  if (!v) return std::nullopt;
  return parse_version(*v);
}

const WorkflowVersion& version_of(const WorkflowEntry& entry, std::optional<int> number) {
  if (entry.versions.empty()) fail(ErrorCode::unknown_version, "entry has no versions");
  if (!number) return entry.latest();
  const WorkflowVersion* v = entry.find_version(*number);
  if (!v) fail(ErrorCode::unknown_version, "no version " + std::to_string(*number));
  return *v;
}

json entry_summary(const WorkflowEntry& e, const Config& config) {
  return {{"id", e.id},
          {"title", e.title},
          {"workflow_class", e.workflow_class},
          {"team_ids", e.team_ids},
          {"maturity", e.maturity},
          {"visibility", to_string(e.policy.visibility)},
          {"latest_version", e.versions.empty() ? 0 : e.latest().version},
          {"created_at", e.created_at},
          {"updated_at", e.updated_at},
          {"metrics", e.metrics},
          {"url", canonical_url(config.base_url, e.id)}};
}

ApiResponse raw(int status, std::string content_type, std::string body) {
  ApiResponse r;
  r.status = status;
  r.content_type = std::move(content_type);
  r.body = std::move(body);
  return r;
}

ApiResponse no_content() { return raw(204, "", ""); }

json registration_json(const RegistrationResult& result, const ApiService& api) {
  return {{"entry", api.entry_json(result.entry)},
          {"warnings", result.report.warnings},
          {"notes", result.notes}};
}

}  // namespace

ApiResponse ApiService::route_workflows(Context& c) {
  const Config& config = registry_.config();

  if (c.size() == 1) {
    if (c.is("GET")) {
      json items = json::array();
      for (const auto& e : registry_.visible_workflows(c.actor)) items.push_back(entry_summary(e, config));
      json stubs = json::array();
      for (const auto& s : registry_.embargoed_stubs(c.actor)) {
        stubs.push_back({{"id", s.id},
                         {"title", s.title},
                         {"workflow_class", s.workflow_class},
                         {"team_ids", s.team_ids},
                         {"embargo_until", s.embargo_until}});
      }
      return ApiResponse::json(200, {{"items", std::move(items)}, {"embargoed", std::move(stubs)}});
    }
    if (c.is("POST")) {
      json body = parse_body(c.req);
      RegistrationSource source = source_from_json(body.value("source", json::object()));
      MetadataPatch patch = metadata_patch_from_json(body.value("metadata", json::object()));
      if (body.value("dry_run", false)) return ApiResponse::json(200, draft_json(registry_.prepare_registration(c.actor, source, patch), *this));
      return ApiResponse::json(201, registration_json(registry_.register_workflow(c.actor, source, patch), *this));
    }
    fail(ErrorCode::not_found, "no route");
  }

  if (c.size() == 2 && c[1] == "preview" && c.is("POST")) {
    json body = parse_body(c.req);
    RegistrationSource source = source_from_json(body.value("source", json::object()));
    MetadataPatch patch = metadata_patch_from_json(body.value("metadata", json::object()));
    return ApiResponse::json(200, draft_json(registry_.prepare_registration(c.actor, source, patch), *this));
  }

  if (c.size() == 2 && c[1] == "submit_crate" && c.is("POST")) {
    MetadataPatch patch;
    auto teams = c.req.params("team");
    if (!teams.empty()) patch.team_ids = teams;
    if (auto title = c.req.param("title")) patch.title = *title;
    return ApiResponse::json(201, registration_json(registry_.register_workflow(c.actor, CrateRequest{c.req.body}, patch), *this));
  }

  const EntryId id = parse_entry_id(c[1]);

  if (c.size() == 2) {
    if (c.is("GET")) {
      const std::string format = c.req.param("format").value_or("");
      const std::optional<int> vparam = version_param(c.req);
      const bool want_html = format == "html" || (format.empty() && accepts(c.req, "text/html"));
      const bool want_ld = format == "jsonld" || (format.empty() && !want_html && accepts(c.req, "application/ld+json"));
      if (want_html) {
        WorkflowEntry entry = registry_.get_workflow(c.actor, id);
        const WorkflowVersion& v = version_of(entry, vparam);
        json ld = registry_.bioschemas(c.actor, id, v.version);
        registry_.record_activity(id, ActivityKind::view);
        ApiResponse r = raw(200, "text/html; charset=utf-8", landing_html(entry, v, ld));
        r.headers.emplace_back("Link", format_link_header(signposting_links(entry, v, config)));
        r.headers.emplace_back("Vary", "Accept");
        return r;
      }
      if (want_ld) {
        ApiResponse r = raw(200, "application/ld+json", registry_.bioschemas(c.actor, id, vparam).dump());
        r.headers.emplace_back("Vary", "Accept");
        return r;
      }
      WorkflowEntry entry = registry_.get_workflow(c.actor, id);
      json j = entry_json(entry);
      if (vparam) j["version"] = version_json(version_of(entry, vparam));
      ApiResponse r = ApiResponse::json(200, j);
      if (!entry.versions.empty())
        r.headers.emplace_back("Link", format_link_header(signposting_links(entry, version_of(entry, vparam), config)));
      r.headers.emplace_back("Vary", "Accept");
      return r;
    }
    if (c.is("PATCH")) {
      MetadataPatch patch = metadata_patch_from_json(parse_body(c.req));
      return ApiResponse::json(200, entry_json(registry_.update_metadata(c.actor, id, patch)));
    }
    if (c.is("DELETE")) {
      registry_.delete_workflow(c.actor, id);
      return no_content();
    }
    fail(ErrorCode::not_found, "no route");
  }

  const std::string& sub = c[2];

  if (sub == "versions") {
    if (c.size() == 3) {
      if (c.is("GET")) {
        WorkflowEntry entry = registry_.get_workflow(c.actor, id);
        json items = json::array();
        for (const auto& v : entry.versions) items.push_back(version_json(v));
        return ApiResponse::json(200, {{"items", std::move(items)}});
      }
      if (c.is("POST")) {
        json body = parse_body(c.req);
        RegistrationSource source = source_from_json(body.value("source", json::object()));
        WorkflowVersion v = registry_.add_version(c.actor, id, source, body.value("revision_comment", ""));
        return ApiResponse::json(201, version_json(v));
      }
      fail(ErrorCode::not_found, "no route");
    }
    const int number = parse_version(c[3]);
    if (c.size() == 4 && c.is("GET")) {
      WorkflowEntry entry = registry_.get_workflow(c.actor, id);
      return ApiResponse::json(200, version_json(version_of(entry, number)));
    }
    if (c.size() == 5 && c[4] == "files") {
      const std::optional<std::string> path = c.req.param("path");
      if (c.is("GET")) {
        WorkflowEntry entry = registry_.get_workflow(c.actor, id, Right::download);
        const WorkflowVersion& v = version_of(entry, number);
        if (!path) {
          json items = json::array();
          for (const auto& [p, blob] : v.files)
            items.push_back({{"path", p}, {"media_type", blob.media_type}, {"size", blob.bytes.size()}});
          return ApiResponse::json(200, {{"items", std::move(items)}});
        }
        auto it = v.files.find(*path);
        if (it == v.files.end()) fail(ErrorCode::not_found, "no file `" + *path + "`");
        return raw(200, it->second.media_type.empty() ? "application/octet-stream" : it->second.media_type, it->second.bytes);
      }
      if (!path || path->empty()) fail(ErrorCode::invalid_argument, "`path` query parameter is required");
      if (c.is("PUT")) {
        std::string media = c.req.header("content-type");
        if (media.empty() || media == "application/octet-stream") media = guess_media_type(*path);
        return ApiResponse::json(200, version_json(registry_.put_file(c.actor, id, number, *path, FileBlob{c.req.body, media})));
      }
      if (c.is("DELETE")) return ApiResponse::json(200, version_json(registry_.remove_file(c.actor, id, number, *path)));
      fail(ErrorCode::not_found, "no route");
    }
    if (c.size() == 5 && c[4] == "freeze" && c.is("POST")) {
      registry_.freeze_version(c.actor, id, number);
      WorkflowEntry entry = registry_.get_workflow(c.actor, id);
      return ApiResponse::json(200, version_json(version_of(entry, number)));
    }
    if (c.size() == 5 && c[4] == "doi" && c.is("POST")) {
      DoiRecord record = registry_.mint_doi(c.actor, id, number);
      return ApiResponse::json(200, record);
    }
    fail(ErrorCode::not_found, "no route");
  }

  if (c.size() != 3 && sub != "launch") fail(ErrorCode::not_found, "no route");

  if (sub == "ro_crate" && c.is("GET")) {
    WorkflowCrate crate = registry_.export_crate(c.actor, id, version_param(c.req));
    registry_.record_activity(id, ActivityKind::download);
    ApiResponse r = raw(200, "application/zip", std::move(crate.archive));
    r.headers.emplace_back("Content-Disposition", "attachment; filename=\"workflow-" + std::to_string(id) + ".crate.zip\"");
    return r;
  }
  if (sub == "sync" && c.is("POST")) {
    json items = json::array();
    for (const auto& v : registry_.sync_git(c.actor, id)) items.push_back(version_json(v));
    return ApiResponse::json(200, {{"new_versions", std::move(items)}});
  }
  if (sub == "credit" && c.is("GET")) return ApiResponse::json(200, registry_.credit(c.actor, id));
  if (sub == "bioschemas" && c.is("GET"))
    return raw(200, "application/ld+json", registry_.bioschemas(c.actor, id, version_param(c.req)).dump());
  if (sub == "abstract_cwl" && c.is("GET")) {
    WorkflowEntry entry = registry_.get_workflow(c.actor, id, Right::download);
    const WorkflowVersion& v = version_of(entry, version_param(c.req));
    if (v.abstract_cwl_path) {
      auto it = v.files.find(*v.abstract_cwl_path);
      if (it != v.files.end()) return raw(200, "text/x-yaml", it->second.bytes);
    }
    if (!v.structure) fail(ErrorCode::not_found, "no parsed structure for this version");
    return raw(200, "text/x-yaml", generate_abstract_cwl(*v.structure));
  }
  if (sub == "subscribe") {
    if (c.is("POST")) {
      registry_.subscribe(c.actor, id);
      return no_content();
    }
    if (c.is("DELETE")) {
      registry_.unsubscribe(c.actor, id);
      return no_content();
    }
  }
  if (sub == "launch" && c.size() == 4 && c.is("GET")) {
    WorkflowEntry entry = registry_.get_workflow(c.actor, id);
    const WorkflowVersion& v = version_of(entry, version_param(c.req));
    for (const Launcher* l : launchers_for(config, entry.workflow_class)) {
      if (l->id != c[3]) continue;
      ApiResponse r = raw(302, "", "");
      r.headers.emplace_back("Location", expand_launcher(*l, config.base_url, id, v.version));
      return r;
    }
    fail(ErrorCode::not_found, "no launcher `" + c[3] + "` for this workflow");
  }
  fail(ErrorCode::not_found, "no route");
}

namespace {

struct TrsType {
  std::string token;
  bool plain = false;
};

// A `{type}` path segment the entry's class answers to, else not_found.
TrsType match_trs_type(const std::string& requested, const ClassRegistry& classes, const std::string& class_id) {
  const std::vector<std::string> types = descriptor_types(classes, class_id);
  for (const auto& t : types) {
    if (requested == t) return {t, t.rfind("PLAIN_", 0) == 0};
    if (requested == "PLAIN_" + t) return {t, true};
  }
  fail(ErrorCode::not_found, "descriptor type `" + requested + "` does not apply to this tool");
}

json trs_descriptor(const WorkflowVersion& v, const std::string& path, const std::string& url) {
  auto it = v.files.find(path);
  if (it == v.files.end()) fail(ErrorCode::not_found, "no file `" + path + "`");
  return {{"content", it->second.bytes},
          {"url", url},
          {"checksum", json::array({{{"checksum", digest::sha256_hex(it->second.bytes)}, {"type", "sha-256"}}})}};
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return text::to_lower(haystack).find(text::to_lower(needle)) != std::string::npos;
}

}  // namespace

ApiResponse ApiService::route_trs(Context& c) {
  const Config& config = registry_.config();
  const ClassRegistry& classes = registry_.classes();
  std::vector<std::string> seg(c.seg.begin() + 3, c.seg.end());
  // `#workflow/5` sent with an unencoded slash arrives as two segments.
  if (seg.size() >= 3 && seg[0] == "tools" && seg[1] == "#workflow") {
    seg[1] += "/" + seg[2];
    seg.erase(seg.begin() + 2);
  }
  try {
    if (!c.is("GET")) fail(ErrorCode::not_found, "TRS is read-only");
    if (seg.size() == 1 && seg[0] == "service-info") return ApiResponse::json(200, trs_service_info(config));
    if (seg.size() == 1 && seg[0] == "toolClasses") return ApiResponse::json(200, trs_tool_classes());
    if (seg.empty() || seg[0] != "tools") fail(ErrorCode::not_found, "no route");

    std::map<TeamId, std::string> team_names;
    for (const auto& t : registry_.teams()) team_names[t.id] = t.name;

    if (seg.size() == 1) {
      const std::size_t offset = parse_count(c.req.param("offset"), 0, "offset");
      const std::size_t limit = std::max<std::size_t>(1, parse_count(c.req.param("limit"), 1000, "limit"));
      std::vector<json> tools;
      for (const auto& e : registry_.visible_workflows(c.actor)) {
        if (e.versions.empty()) continue;
        json tool = trs_tool(e, classes, config, team_names);
        if (auto v = c.req.param("id"); v && *v != tool["id"].get<std::string>()) continue;
        if (auto v = c.req.param("toolClass"); v && *v != "Workflow") continue;
        if (auto v = c.req.param("descriptorType")) {
          auto types = descriptor_types(classes, e.workflow_class);
          if (std::find(types.begin(), types.end(), *v) == types.end()) continue;
        }
        if (auto v = c.req.param("organization"); v && !contains_ci(tool["organization"].get<std::string>(), *v)) continue;
        if (auto v = c.req.param("name"); v && !contains_ci(e.title, *v)) continue;
        if (auto v = c.req.param("toolname"); v && !contains_ci(e.title, *v)) continue;
        if (auto v = c.req.param("description"); v && !contains_ci(e.description, *v)) continue;
        if (auto v = c.req.param("author")) {
          bool hit = false;
          for (const auto& cr : e.creators) hit = hit || contains_ci(cr.name, *v);
          if (!hit) continue;
        }
        if (auto v = c.req.param("checker"); v && *v == "true") continue;
        tools.push_back(std::move(tool));
      }
      json page = json::array();
      for (std::size_t i = offset; i < tools.size() && i < offset + limit; ++i) page.push_back(tools[i]);
      ApiResponse r = ApiResponse::json(200, page);
      const std::string self = config.base_url + std::string(kTrsPrefix) + "/tools";
      auto link = [&](std::size_t off) { return self + "?offset=" + std::to_string(off) + "&limit=" + std::to_string(limit); };
      r.headers.emplace_back("self_link", link(offset));
      r.headers.emplace_back("current_offset", std::to_string(offset));
      r.headers.emplace_back("current_limit", std::to_string(limit));
      if (offset + limit < tools.size()) r.headers.emplace_back("next_page", link(offset + limit));
      const std::size_t last = tools.empty() ? 0 : (tools.size() - 1) / limit * limit;
      r.headers.emplace_back("last_page", link(last));
      return r;
    }

    std::string id_text = seg[1];
    if (id_text.rfind("#workflow/", 0) == 0) id_text = id_text.substr(10);
    const EntryId id = parse_entry_id(id_text);
    WorkflowEntry entry = registry_.get_workflow(c.actor, id);
    if (entry.versions.empty()) fail(ErrorCode::not_found, "tool has no versions");

    if (seg.size() == 2) return ApiResponse::json(200, trs_tool(entry, classes, config, team_names));
    if (seg[2] != "versions") fail(ErrorCode::not_found, "no route");
    if (seg.size() == 3) {
      json items = json::array();
      for (const auto& v : entry.versions) items.push_back(trs_tool_version(entry, v, classes, config));
      return ApiResponse::json(200, items);
    }
    const WorkflowVersion* v = entry.find_version(parse_version(seg[3]));
    if (!v) fail(ErrorCode::not_found, "no version `" + seg[3] + "`");
    if (seg.size() == 4) return ApiResponse::json(200, trs_tool_version(entry, *v, classes, config));
    if (seg.size() == 5 && seg[4] == "containerfile") fail(ErrorCode::not_found, "no container files");
    if (seg.size() < 6) fail(ErrorCode::not_found, "no route");

    const TrsType type = match_trs_type(seg[4], classes, entry.workflow_class);
    const std::string files_url = config.base_url + "/workflows/" + std::to_string(id) + "/versions/" +
                                  std::to_string(v->version) + "/files?path=";
    if (seg[5] == "descriptor") {
      registry_.get_workflow(c.actor, id, Right::download);
      std::string path = v->main_workflow_path;
      if (seg.size() > 6) {
        path.clear();
        for (std::size_t i = 6; i < seg.size(); ++i) path += (path.empty() ? "" : "/") + seg[i];
        // Relative to the primary descriptor's directory, falling back to the root.
        const std::string dir = text::dirname(v->main_workflow_path);
        if (!dir.empty() && v->files.count(dir + "/" + path)) path = dir + "/" + path;
      }
      json d = trs_descriptor(*v, path, files_url + text::url_encode(path));
      if (type.plain) return raw(200, "text/plain; charset=utf-8", d["content"].get<std::string>());
      return ApiResponse::json(200, d);
    }
    if (seg[5] == "files" && seg.size() == 6) {
      registry_.get_workflow(c.actor, id, Right::download);
      if (c.req.param("format") == std::optional<std::string>("zip")) {
        std::vector<zip::Entry> entries;
        for (const auto& [p, blob] : v->files) entries.push_back({p, blob.bytes});
        return raw(200, "application/zip", zip::write(entries, v->created_at));
      }
      json items = json::array();
      for (const auto& [p, blob] : v->files)
        items.push_back({{"path", p}, {"file_type", trs_file_type(*v, p, classes, entry.workflow_class)}});
      return ApiResponse::json(200, items);
    }
    if (seg[5] == "tests" && seg.size() == 6) {
      registry_.get_workflow(c.actor, id, Right::download);
      json items = json::array();
      for (const auto& [p, blob] : v->files) {
        if (trs_file_type(*v, p, classes, entry.workflow_class) == "TEST_FILE")
          items.push_back({{"content", blob.bytes}, {"url", files_url + text::url_encode(p)}});
      }
      return ApiResponse::json(200, items);
    }
    fail(ErrorCode::not_found, "no route");
  } catch (const Error& e) {
    const bool masked = e.code() == ErrorCode::access_denied && !c.actor.authenticated();
    const int status = masked ? 404 : http_status(e.code());
    return ApiResponse::json(status, {{"code", status}, {"message", masked ? std::string("not found") : e.what()}});
  }
}

namespace {

json person_json(const User& u) {
  json j = u;
  j.erase("registry_admin");
  return j;
}

json asset_json(const Asset& a) {
  json j{{"id", a.id}, {"kind", a.kind}, {"title", a.title}, {"team_ids", a.team_ids},
         {"submitter", a.submitter}, {"policy", a.policy}};
  if (a.external) j["external"] = *a.external;
  if (a.content) {
    json files = json::object();
    for (const auto& [p, blob] : *a.content)
      files[p] = {{"media_type", blob.media_type}, {"content_base64", base64::encode(blob.bytes)}};
    j["content"] = std::move(files);
  }
  return j;
}

}  // namespace

ApiResponse ApiService::route_entities(Context& c) {
  const std::string& kind = c[0];
  auto not_found = [&]() -> ApiResponse { fail(ErrorCode::not_found, "no route"); };

  if (kind == "teams") {
    if (c.size() == 1 && c.is("GET")) {
      json items = json::array();
      for (const auto& t : registry_.teams()) items.push_back(t);
      return ApiResponse::json(200, {{"items", std::move(items)}});
    }
    if (c.size() == 1 && c.is("POST")) {
      Team team = parse_body(c.req).get<Team>();
      if (team.space_id.empty()) team.space_id = registry_.default_space_id();
      return ApiResponse::json(201, registry_.create_team(c.actor, std::move(team)));
    }
    if (c.size() < 2) return not_found();
    const TeamId& id = c[1];
    if (c.size() == 2 && c.is("GET")) {
      auto t = registry_.find_team(id);
      if (!t) fail(ErrorCode::not_found, "no team `" + id + "`");
      return ApiResponse::json(200, *t);
    }
    if (c.size() == 2 && c.is("PATCH")) {
      json body = parse_body(c.req);
      std::optional<AccessPolicy> policy;
      std::optional<std::string> license;
      if (body.contains("default_policy")) policy = body["default_policy"].get<AccessPolicy>();
      if (body.contains("default_license")) license = body["default_license"].get<std::string>();
      return ApiResponse::json(200, registry_.set_team_defaults(c.actor, id, policy, license));
    }
    if (c.size() == 2 && c.is("DELETE")) {
      registry_.delete_team(c.actor, id);
      return no_content();
    }
    if (c.size() == 3 && c[2] == "members" && c.is("POST")) {
      json body = parse_body(c.req);
      const Role role = body.contains("role") ? body["role"].get<Role>() : Role::member;
      return ApiResponse::json(200, registry_.add_member(c.actor, id, body.at("user_id").get<std::string>(), role));
    }
    if (c.size() == 4 && c[2] == "members" && c.is("DELETE"))
      return ApiResponse::json(200, registry_.remove_member(c.actor, id, c[3]));
    return not_found();
  }

  if (kind == "spaces") {
    if (c.size() == 1 && c.is("GET")) {
      json items = json::array();
      for (const auto& s : registry_.spaces()) items.push_back(s);
      return ApiResponse::json(200, {{"items", std::move(items)}});
    }
    if (c.size() == 1 && c.is("POST")) return ApiResponse::json(201, registry_.create_space(c.actor, parse_body(c.req).get<Space>()));
    if (c.size() == 2 && c.is("GET")) {
      auto s = registry_.find_space(c[1]);
      if (!s) fail(ErrorCode::not_found, "no space `" + c[1] + "`");
      return ApiResponse::json(200, *s);
    }
    if (c.size() == 2 && c.is("DELETE")) {
      registry_.delete_space(c.actor, c[1]);
      return no_content();
    }
    return not_found();
  }

  if (kind == "people") {
    if (c.size() == 1 && c.is("GET")) {
      json items = json::array();
      for (const auto& u : registry_.users()) items.push_back(person_json(u));
      return ApiResponse::json(200, {{"items", std::move(items)}});
    }
    if (c.size() == 1 && c.is("POST")) {
      json body = parse_body(c.req);
      std::optional<std::string> password;
      if (body.contains("password")) password = body["password"].get<std::string>();
      User u = body.get<User>();
      u.memberships.clear();
      return ApiResponse::json(201, person_json(registry_.create_user(c.actor, std::move(u), password)));
    }
    if (c.size() < 2) return not_found();
    const UserId& id = c[1];
    if (c.size() == 2 && c.is("GET")) {
      auto u = registry_.find_user(id);
      if (!u) fail(ErrorCode::not_found, "no person `" + id + "`");
      return ApiResponse::json(200, person_json(*u));
    }
    if (c.size() == 3 && c[2] == "organisations" && c.is("PUT")) {
      auto orgs = parse_body(c.req).at("organisation_ids").get<std::set<OrganisationId>>();
      return ApiResponse::json(200, person_json(registry_.set_user_organisations(c.actor, id, std::move(orgs))));
    }
    if (c.size() == 4 && c[2] == "affiliations" && c.is("PUT")) {
      auto orgs = parse_body(c.req).at("organisation_ids").get<std::vector<OrganisationId>>();
      return ApiResponse::json(200, person_json(registry_.set_team_affiliations(c.actor, id, c[3], std::move(orgs))));
    }
    if (c.size() == 3 && c[2] == "password" && c.is("PUT")) {
      registry_.set_password(c.actor, id, parse_body(c.req).at("password").get<std::string>());
      return no_content();
    }
    if (c.size() == 3 && c[2] == "tokens" && c.is("POST")) {
      return ApiResponse::json(201, {{"token", registry_.issue_token_for(c.actor, id)},
                                     {"token_type", "Bearer"},
                                     {"expires_in", registry_.config().token_lifetime_s}});
    }
    return not_found();
  }

  if (kind == "organisations") {
    if (c.size() == 1 && c.is("GET")) {
      json items = json::array();
      for (const auto& o : registry_.organisations()) items.push_back(o);
      return ApiResponse::json(200, {{"items", std::move(items)}});
    }
    if (c.size() == 1 && c.is("POST"))
      return ApiResponse::json(201, registry_.create_organisation(c.actor, parse_body(c.req).get<Organisation>()));
    return not_found();
  }

  if (kind == "collections") {
    if (c.size() == 1 && c.is("GET")) {
      json items = json::array();
      for (const auto& col : registry_.collections()) items.push_back(col);
      return ApiResponse::json(200, {{"items", std::move(items)}});
    }
    if (c.size() == 1 && c.is("POST"))
      return ApiResponse::json(201, registry_.create_collection(c.actor, parse_body(c.req).get<Collection>()));
    if (c.size() < 2) return not_found();
    const CollectionId& id = c[1];
    if (c.size() == 2 && c.is("GET")) {
      auto col = registry_.find_collection(id);
      if (!col) fail(ErrorCode::not_found, "no collection `" + id + "`");
      return ApiResponse::json(200, *col);
    }
    if (c.size() == 2 && c.is("DELETE")) {
      registry_.delete_collection(c.actor, id);
      return no_content();
    }
    if (c.size() == 3 && c[2] == "items" && c.is("POST"))
      return ApiResponse::json(200, registry_.add_collection_item(c.actor, id, parse_body(c.req).get<CollectionItem>()));
    if (c.size() == 3 && c[2] == "items" && c.is("DELETE")) {
      CollectionItem item;
      item.kind = parse_asset_kind(c.req.param("kind").value_or("workflow"));
      item.target = c.req.param("target").value_or("");
      return ApiResponse::json(200, registry_.remove_collection_item(c.actor, id, item));
    }
    return not_found();
  }

  if (kind == "assets") {
    if (c.size() == 1 && c.is("POST")) {
      json body = parse_body(c.req);
      Asset asset;
      asset.kind = body.contains("kind") ? body["kind"].get<AssetKind>() : AssetKind::document;
      asset.title = body.value("title", "");
      asset.team_ids = body.value("team_ids", std::vector<TeamId>{});
      if (body.contains("policy")) asset.policy = body["policy"].get<AccessPolicy>();
      if (body.contains("files")) asset.content = files_from_json(body["files"]);
      if (body.contains("external")) asset.external = body["external"].get<ExternalReference>();
      return ApiResponse::json(201, asset_json(registry_.create_asset(c.actor, std::move(asset))));
    }
    if (c.size() == 2 && c.is("GET")) return ApiResponse::json(200, asset_json(registry_.get_asset(c.actor, c[1])));
    if (c.size() == 2 && c.is("DELETE")) {
      registry_.delete_asset(c.actor, c[1]);
      return no_content();
    }
    return not_found();
  }

  return not_found();
}

}  // namespace flowhub
