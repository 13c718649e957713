#include "flowhub/registry.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>

#include "flowhub/citation.hpp"
#include "flowhub/parsers.hpp"
#include "flowhub/serialize.hpp"

namespace flowhub {

using nlohmann::json;

namespace {

constexpr std::string_view kWorkflows = "workflows";
constexpr std::string_view kMetrics = "metrics";
constexpr std::string_view kUsers = "users";
constexpr std::string_view kCredentials = "credentials";
constexpr std::string_view kTokens = "tokens";
constexpr std::string_view kTeams = "teams";
constexpr std::string_view kSpaces = "spaces";
constexpr std::string_view kOrganisations = "organisations";
constexpr std::string_view kCollections = "collections";
constexpr std::string_view kAssets = "assets";
constexpr std::string_view kSubscriptions = "subscriptions";
constexpr std::string_view kMeta = "meta";

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::string slugify(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
    else if (!out.empty() && out.back() != '-') out += '-';
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

std::string subscription_key(const Subscription& s) { return s.user_id + "|" + std::to_string(s.entry_id); }

const WorkflowVersion& version_of(const WorkflowEntry& entry, int version) {
  const WorkflowVersion* v = entry.find_version(version);
  if (!v) fail(ErrorCode::unknown_version, "entry " + std::to_string(entry.id) + " has no version " + std::to_string(version));
  return *v;
}

template <typename T>
void append_unique(std::vector<T>& out, const T& value) {
  if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(value);
}

}  // namespace

// ---------------------------------------------------------------------------
// MetadataPatch

bool MetadataPatch::empty() const { return fields().empty(); }

std::vector<std::string> MetadataPatch::fields() const {
  std::vector<std::string> out;
  if (title) out.push_back("title");
  if (description) out.push_back("description");
  if (creators) out.push_back("creators");
  if (other_contributors) out.push_back("other_contributors");
  if (contributor_user_ids) out.push_back("contributor_user_ids");
  if (maturity) out.push_back("maturity");
  if (license) out.push_back("license");
  if (tags) out.push_back("tags");
  if (edam_topics) out.push_back("edam_topics");
  if (edam_operations) out.push_back("edam_operations");
  if (tool_refs) out.push_back("tool_refs");
  if (attributions) out.push_back("attributions");
  if (custom_citation) out.push_back("custom_citation");
  if (team_ids) out.push_back("team_ids");
  if (policy) out.push_back("policy");
  if (test_status) out.push_back("test_status");
  if (workflow_class) out.push_back("workflow_class");
  return out;
}

MetadataPatch metadata_patch_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::invalid_argument, "metadata must be a JSON object");
  MetadataPatch p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = *it;
    try {
      if (key == "title") p.title = v.get<std::string>();
      else if (key == "description") p.description = v.get<std::string>();
      else if (key == "creators") p.creators = v.get<std::vector<Creator>>();
      else if (key == "other_contributors") p.other_contributors = v.get<std::string>();
      else if (key == "contributor_user_ids") p.contributor_user_ids = v.get<std::vector<UserId>>();
      else if (key == "maturity") p.maturity = v.get<std::string>();
      else if (key == "license") p.license = v.get<std::string>();
      else if (key == "tags") p.tags = v.get<std::vector<std::string>>();
      else if (key == "edam_topics") p.edam_topics = v.get<std::vector<std::string>>();
      else if (key == "edam_operations") p.edam_operations = v.get<std::vector<std::string>>();
      else if (key == "tool_refs" || key == "tools") {
        std::vector<ToolRef> tools;
        for (const auto& t : v) {
          if (t.is_string()) tools.push_back(ToolMapper::bundled().map_one(t.get<std::string>()));
          else tools.push_back(t.get<ToolRef>());
        }
        p.tool_refs = std::move(tools);
      } else if (key == "attributions") p.attributions = v.get<std::vector<EntryId>>();
      else if (key == "custom_citation") p.custom_citation = v.is_null() ? std::string() : v.get<std::string>();
      else if (key == "team_ids" || key == "teams") p.team_ids = v.get<std::vector<TeamId>>();
      else if (key == "policy") p.policy = v.get<AccessPolicy>();
      else if (key == "test_status") p.test_status = v.get<TestStatus>();
      else if (key == "workflow_class" || key == "class") p.workflow_class = v.get<std::string>();
      else fail(ErrorCode::invalid_argument, "`" + key + "` is not an editable field");
    } catch (const json::exception& e) {
      fail(ErrorCode::invalid_argument, "bad value for `" + key + "`: " + e.what());
    }
  }
  return p;
}

json to_json(const MetadataPatch& p) {
  json j = json::object();
  if (p.title) j["title"] = *p.title;
  if (p.description) j["description"] = *p.description;
  if (p.creators) j["creators"] = *p.creators;
  if (p.other_contributors) j["other_contributors"] = *p.other_contributors;
  if (p.contributor_user_ids) j["contributor_user_ids"] = *p.contributor_user_ids;
  if (p.maturity) j["maturity"] = *p.maturity;
  if (p.license) j["license"] = *p.license;
  if (p.tags) j["tags"] = *p.tags;
  if (p.edam_topics) j["edam_topics"] = *p.edam_topics;
  if (p.edam_operations) j["edam_operations"] = *p.edam_operations;
  if (p.tool_refs) j["tool_refs"] = *p.tool_refs;
  if (p.attributions) j["attributions"] = *p.attributions;
  if (p.custom_citation) j["custom_citation"] = *p.custom_citation;
  if (p.team_ids) j["team_ids"] = *p.team_ids;
  if (p.policy) j["policy"] = *p.policy;
  if (p.test_status) j["test_status"] = *p.test_status;
  if (p.workflow_class) j["workflow_class"] = *p.workflow_class;
  return j;
}

// ---------------------------------------------------------------------------
// Events

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::new_version: return "new_version";
    case EventKind::metadata_changed: return "metadata_changed";
    case EventKind::doi_minted: return "doi_minted";
  }
  return "new_version";
}

EventKind parse_event_kind(std::string_view s) {
  for (EventKind k : {EventKind::new_version, EventKind::metadata_changed, EventKind::doi_minted}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::invalid_argument, "unknown event kind `" + std::string(s) + "`");
}

json to_json(const NotificationEvent& e) {
  return {{"seq", e.seq},
          {"entry_id", e.entry_id},
          {"kind", to_string(e.kind)},
          {"timestamp", timefmt::to_iso8601(e.timestamp)},
          {"payload", e.payload}};
}

NotificationEvent event_from_json(const json& j) {
  NotificationEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.entry_id = j.at("entry_id").get<EntryId>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.timestamp = j.at("timestamp").get<Timestamp>();
  if (auto it = j.find("payload"); it != j.end()) e.payload = *it;
  return e;
}

// ---------------------------------------------------------------------------
// Construction and persistence

Registry::Registry(RegistryOptions options) : options_(std::move(options)) {
  if (!options_.store) {
    if (options_.config.store_dir.empty()) options_.store = std::make_shared<MemoryStore>();
    else options_.store = std::make_shared<FileStore>(std::filesystem::path(options_.config.store_dir));
  }
  if (!options_.mint_client) options_.mint_client = std::make_shared<MockMintClient>();
  if (!options_.classes) options_.classes = std::make_shared<ClassRegistry>(ClassRegistry::seeded());
  if (!options_.vocab) options_.vocab = &EdamVocabulary::bundled();
  if (!options_.tools) options_.tools = &ToolMapper::bundled();
  load();
  ensure_default_space();
}

Registry::~Registry() = default;

Timestamp Registry::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

void Registry::load() {
  Store& store = *options_.store;
  auto load_blob = [&](const std::string& sha) { return store.get_blob(sha); };

  for (const auto& doc : store.list(kWorkflows)) {
    WorkflowEntry entry = doc.get<WorkflowEntry>();
    const json& versions = doc.at("versions");
    for (std::size_t i = 0; i < entry.versions.size() && i < versions.size(); ++i)
      entry.versions[i].files = file_tree_from_manifest(versions[i].at("files"), load_blob);
    entries_[entry.id] = std::move(entry);
  }
  for (const auto& doc : store.list(kMetrics)) {
    auto it = entries_.find(doc.at("id").get<EntryId>());
    if (it != entries_.end()) it->second.metrics = doc.at("metrics").get<Metrics>();
  }
  for (const auto& doc : store.list(kUsers)) {
    User u = doc.get<User>();
    users_[u.id] = std::move(u);
  }
  for (const auto& doc : store.list(kCredentials))
    credentials_[doc.at("user_id").get<std::string>()] = {doc.at("salt").get<std::string>(),
                                                           doc.at("hash").get<std::string>()};
  for (const auto& doc : store.list(kTokens))
    tokens_[doc.at("hash").get<std::string>()] = {doc.at("user_id").get<std::string>(),
                                                   doc.at("expires_at").get<Timestamp>()};
  for (const auto& doc : store.list(kTeams)) {
    Team t = doc.get<Team>();
    teams_[t.id] = std::move(t);
  }
  for (const auto& doc : store.list(kSpaces)) {
    Space s = doc.get<Space>();
    if (s.is_default) default_space_id_ = s.id;
    spaces_[s.id] = std::move(s);
  }
  for (const auto& doc : store.list(kOrganisations)) {
    Organisation o = doc.get<Organisation>();
    organisations_[o.id] = std::move(o);
  }
  for (const auto& doc : store.list(kCollections)) {
    Collection c = doc.get<Collection>();
    collections_[c.id] = std::move(c);
  }
  for (const auto& doc : store.list(kAssets)) {
    Asset a = doc.get<Asset>();
    if (a.content) {
      if (auto it = doc.find("content"); it != doc.end() && it->is_object())
        a.content = file_tree_from_manifest(*it, load_blob);
    }
    assets_[a.id] = std::move(a);
  }
  for (const auto& doc : store.list(kSubscriptions)) {
    subscriptions_.push_back({doc.at("user_id").get<std::string>(), doc.at("entry_id").get<EntryId>(),
                              doc.at("since_seq").get<std::uint64_t>()});
  }
  for (const auto& doc : store.events()) {
    events_.push_back(event_from_json(doc));
    next_seq_ = std::max(next_seq_, events_.back().seq + 1);
  }
  for (const auto& doc : store.list(kMeta)) {
    if (doc.value("id", "") != "counters") continue;
    next_entry_id_ = std::max<EntryId>(next_entry_id_, doc.value("next_entry_id", EntryId{1}));
    next_local_id_ = std::max<std::uint64_t>(next_local_id_, doc.value("next_local_id", std::uint64_t{1}));
  }
  if (!entries_.empty()) next_entry_id_ = std::max(next_entry_id_, entries_.rbegin()->first + 1);
}

void Registry::ensure_default_space() {
  std::unique_lock lock(state_mutex_);
  if (!default_space_id_.empty()) return;
  Space space;
  space.id = slugify(kDefaultSpaceName);
  space.name = std::string(kDefaultSpaceName);
  space.description = "Home of teams that do not belong to a larger project.";
  space.is_default = true;
  default_space_id_ = space.id;
  options_.store->put(kSpaces, space.id, space);
  spaces_[space.id] = std::move(space);
}

std::mutex& Registry::entry_mutex(EntryId id) {
  std::lock_guard<std::mutex> guard(entry_locks_mutex_);
  auto& slot = entry_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void Registry::persist_entry(const WorkflowEntry& entry) {
  for (const auto& version : entry.versions) {
    for (const auto& [path, blob] : version.files) options_.store->put_blob(blob.bytes);
  }
  options_.store->put(kWorkflows, std::to_string(entry.id), entry);
  persist_metrics(entry);
}

void Registry::persist_metrics(const WorkflowEntry& entry) {
  options_.store->put(kMetrics, std::to_string(entry.id), json{{"id", entry.id}, {"metrics", entry.metrics}});
}

void Registry::persist_user(const User& user) { options_.store->put(kUsers, user.id, user); }

void Registry::persist_team(const Team& team) { options_.store->put(kTeams, team.id, team); }

void Registry::persist_counters() {
  options_.store->put(kMeta, "counters",
                      json{{"id", "counters"}, {"next_entry_id", next_entry_id_}, {"next_local_id", next_local_id_}});
}

void Registry::emit(EntryId id, EventKind kind, json payload) {
  NotificationEvent event;
  event.seq = next_seq_++;
  event.entry_id = id;
  event.kind = kind;
  event.timestamp = now();
  event.payload = std::move(payload);
  options_.store->append_event(to_json(event));
  events_.push_back(std::move(event));
}

std::string Registry::unique_id(std::string_view wanted, std::string_view name, std::string_view prefix,
                                const std::function<bool(const std::string&)>& taken) const {
  if (!wanted.empty()) {
    const std::string id(wanted);
    if (id.find_first_of("/#?| ") != std::string::npos)
      fail(ErrorCode::invalid_argument, "identifier `" + id + "` contains reserved characters");
    if (taken(id)) fail(ErrorCode::duplicate_item, "`" + id + "` already exists");
    return id;
  }
  std::string base = slugify(name);
  if (base.empty()) base = std::string(prefix);
  std::string id = base;
  for (int n = 2; taken(id); ++n) id = base + "-" + std::to_string(n);
  return id;
}

// ---------------------------------------------------------------------------
// Access helpers

ActorContext Registry::context_locked(const Actor& actor) const {
  ActorContext ctx;
  if (actor.operator_access) {
    ctx.registry_admin = true;
    return ctx;
  }
  if (!actor.user) return ctx;
  ctx.user_id = *actor.user;
  auto uit = users_.find(*actor.user);
  if (uit == users_.end()) return ctx;
  const User& user = uit->second;
  ctx.registry_admin = user.registry_admin;
  for (const auto& m : user.memberships) {
    ctx.team_ids.insert(m.team_id);
    if (m.role == Role::admin) ctx.admin_team_ids.insert(m.team_id);
    auto tit = teams_.find(m.team_id);
    if (tit != teams_.end()) ctx.space_ids.insert(tit->second.space_id);
  }
  for (const auto& [id, space] : spaces_) {
    if (space.admin_user_ids.count(user.id)) ctx.admin_space_ids.insert(id);
  }
  return ctx;
}

ActorContext Registry::actor_context(const Actor& actor) const {
  std::shared_lock lock(state_mutex_);
  return context_locked(actor);
}

ProtectedResource Registry::resource_locked(const AccessPolicy& policy, const std::vector<TeamId>& teams,
                                            const UserId& submitter) const {
  ProtectedResource r;
  r.policy = policy;
  r.owner_team_ids = teams;
  r.submitter = submitter;
  for (const auto& t : teams) {
    auto it = teams_.find(t);
    if (it != teams_.end()) r.owner_space_ids.insert(it->second.space_id);
  }
  return r;
}

AccessDecision Registry::decide_locked(const Actor& actor, const WorkflowEntry& entry, Right right) const {
  ActorContext ctx = context_locked(actor);
  return check_access(actor.authenticated() ? &ctx : nullptr,
                      resource_locked(entry.policy, entry.team_ids, entry.submitter), right, now());
}

void Registry::require_locked(const Actor& actor, const WorkflowEntry& entry, Right right) const {
  AccessDecision d = decide_locked(actor, entry, right);
  if (d) return;
  if (!actor.authenticated() && right >= Right::edit)
    fail(ErrorCode::unauthenticated, "authentication required");
  fail(ErrorCode::access_denied,
       std::string(to_string(right)) + " denied on workflow " + std::to_string(entry.id) + ": " + d.reason);
}

const WorkflowEntry& Registry::entry_ref(EntryId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) fail(ErrorCode::not_found, "no workflow " + std::to_string(id));
  return it->second;
}

CreditDirectory Registry::directory_locked() const {
  CreditDirectory d;
  d.team = [this](const TeamId& id) -> const Team* {
    auto it = teams_.find(id);
    return it == teams_.end() ? nullptr : &it->second;
  };
  d.space = [this](const SpaceId& id) -> const Space* {
    auto it = spaces_.find(id);
    return it == spaces_.end() ? nullptr : &it->second;
  };
  d.user = [this](const UserId& id) -> const User* {
    auto it = users_.find(id);
    return it == users_.end() ? nullptr : &it->second;
  };
  d.organisation = [this](const OrganisationId& id) -> const Organisation* {
    auto it = organisations_.find(id);
    return it == organisations_.end() ? nullptr : &it->second;
  };
  return d;
}

// ---------------------------------------------------------------------------
// Identities

std::string Registry::hash_password(const std::string& password, const std::string& salt) const {
  unsigned char out[32];
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        reinterpret_cast<const unsigned char*>(salt.data()), static_cast<int>(salt.size()),
                        options_.pbkdf2_iterations, EVP_sha256(), sizeof out, out) != 1)
    fail(ErrorCode::io_error, "password hashing failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned char c : out) {
    s += hex[c >> 4];
    s += hex[c & 0xF];
  }
  return s;
}

User Registry::create_user(const Actor& actor, User user, const std::optional<std::string>& password) {
  std::unique_lock lock(state_mutex_);
  const bool bootstrap = users_.empty();
  if (!bootstrap && !context_locked(actor).registry_admin)
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated,
         "only registry admins create users");
  if (user.id.empty()) user.id = slugify(user.display_name);
  if (user.id.empty()) fail(ErrorCode::invalid_argument, "user needs an id or display name");
  user.id = unique_id(user.id, {}, "user", [&](const std::string& id) { return users_.count(id) > 0; });
  if (user.display_name.empty()) user.display_name = user.id;
  if (user.orcid) {
    user.orcid = normalize_orcid(*user.orcid);
    if (!is_valid_orcid(*user.orcid)) fail(ErrorCode::invalid_argument, "invalid ORCID `" + *user.orcid + "`");
  }
  for (const auto& org : user.organisation_ids) {
    if (!organisations_.count(org)) fail(ErrorCode::not_found, "no organisation `" + org + "`");
  }
  user.memberships.clear();
  if (bootstrap) user.registry_admin = true;
  if (password) {
    if (password->empty()) fail(ErrorCode::invalid_argument, "empty password");
    Credential cred{random_hex(16), {}};
    cred.hash = hash_password(*password, cred.salt);
    options_.store->put(kCredentials, user.id, json{{"user_id", user.id}, {"salt", cred.salt}, {"hash", cred.hash}});
    credentials_[user.id] = cred;
  }
  persist_user(user);
  users_[user.id] = user;
  return user;
}

void Registry::set_password(const Actor& actor, const UserId& user, const std::string& password) {
  std::unique_lock lock(state_mutex_);
  if (!users_.count(user)) fail(ErrorCode::not_found, "no user `" + user + "`");
  if (actor.user != user && !context_locked(actor).registry_admin)
    fail(ErrorCode::access_denied, "cannot change another user's password");
  if (password.empty()) fail(ErrorCode::invalid_argument, "empty password");
  Credential cred{random_hex(16), {}};
  cred.hash = hash_password(password, cred.salt);
  options_.store->put(kCredentials, user, json{{"user_id", user}, {"salt", cred.salt}, {"hash", cred.hash}});
  credentials_[user] = cred;
}

std::string Registry::issue_token(const UserId& user, const std::string& password) {
  Credential cred;
  {
    std::shared_lock lock(state_mutex_);
    auto it = credentials_.find(user);
    if (it == credentials_.end()) fail(ErrorCode::unauthenticated, "invalid credentials");
    cred = it->second;
  }
  if (hash_password(password, cred.salt) != cred.hash) fail(ErrorCode::unauthenticated, "invalid credentials");
  std::unique_lock lock(state_mutex_);
  const std::string token = random_hex(32);
  const std::string hash = digest::sha256_hex(token);
  TokenRecord record{user, now() + std::chrono::seconds(options_.config.token_lifetime_s)};
  options_.store->put(kTokens, hash, json{{"hash", hash}, {"user_id", user}, {"expires_at", record.expires_at}});
  tokens_[hash] = record;
  return token;
}

std::string Registry::issue_token_for(const Actor& actor, const UserId& user) {
  std::unique_lock lock(state_mutex_);
  if (!context_locked(actor).registry_admin) fail(ErrorCode::access_denied, "only registry admins issue tokens");
  if (!users_.count(user)) fail(ErrorCode::not_found, "no user `" + user + "`");
  const std::string token = random_hex(32);
  const std::string hash = digest::sha256_hex(token);
  TokenRecord record{user, now() + std::chrono::seconds(options_.config.token_lifetime_s)};
  options_.store->put(kTokens, hash, json{{"hash", hash}, {"user_id", user}, {"expires_at", record.expires_at}});
  tokens_[hash] = record;
  return token;
}

std::optional<UserId> Registry::authenticate(const std::string& token) const {
  std::shared_lock lock(state_mutex_);
  auto it = tokens_.find(digest::sha256_hex(token));
  if (it == tokens_.end() || now() >= it->second.expires_at) return std::nullopt;
  if (!users_.count(it->second.user_id)) return std::nullopt;
  return it->second.user_id;
}

std::optional<User> Registry::find_user(const UserId& id) const {
  std::shared_lock lock(state_mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

std::vector<User> Registry::users() const {
  std::shared_lock lock(state_mutex_);
  std::vector<User> out;
  for (const auto& [id, u] : users_) out.push_back(u);
  return out;
}

Organisation Registry::create_organisation(const Actor& actor, Organisation org) {
  std::unique_lock lock(state_mutex_);
  if (!actor.authenticated()) fail(ErrorCode::unauthenticated, "authentication required");
  org.name = std::string(text::trim(org.name));
  if (org.name.empty()) fail(ErrorCode::invalid_argument, "organisation name is required");
  for (const auto& [id, existing] : organisations_) {
    if (text::iequals(existing.name, org.name)) fail(ErrorCode::duplicate_item, "organisation `" + org.name + "` exists");
  }
  if (org.country) {
    std::string c = text::to_upper(*org.country);
    if (c.size() != 2 || !std::isalpha(static_cast<unsigned char>(c[0])) || !std::isalpha(static_cast<unsigned char>(c[1])))
      fail(ErrorCode::invalid_argument, "country must be an ISO 3166 alpha-2 code");
    org.country = c;
  }
  org.id = unique_id(org.id, org.name, "org", [&](const std::string& id) { return organisations_.count(id) > 0; });
  options_.store->put(kOrganisations, org.id, org);
  organisations_[org.id] = org;
  return org;
}

std::vector<Organisation> Registry::organisations() const {
  std::shared_lock lock(state_mutex_);
  std::vector<Organisation> out;
  for (const auto& [id, o] : organisations_) out.push_back(o);
  return out;
}

User Registry::set_user_organisations(const Actor& actor, const UserId& user_id, std::set<OrganisationId> orgs) {
  std::unique_lock lock(state_mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) fail(ErrorCode::not_found, "no user `" + user_id + "`");
  if (actor.user != user_id && !context_locked(actor).registry_admin)
    fail(ErrorCode::access_denied, "cannot edit another user's affiliations");
  for (const auto& org : orgs) {
    if (!organisations_.count(org)) fail(ErrorCode::not_found, "no organisation `" + org + "`");
  }
  User user = it->second;
  user.organisation_ids = std::move(orgs);
  for (auto& m : user.memberships) {
    m.organisation_ids.erase(std::remove_if(m.organisation_ids.begin(), m.organisation_ids.end(),
                                            [&](const OrganisationId& o) { return !user.organisation_ids.count(o); }),
                             m.organisation_ids.end());
  }
  persist_user(user);
  it->second = user;
  return user;
}

User Registry::set_team_affiliations(const Actor& actor, const UserId& user_id, const TeamId& team,
                                     std::vector<OrganisationId> orgs) {
  std::unique_lock lock(state_mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) fail(ErrorCode::not_found, "no user `" + user_id + "`");
  if (actor.user != user_id && !context_locked(actor).registry_admin)
    fail(ErrorCode::access_denied, "cannot edit another user's affiliations");
  User user = it->second;
  auto m = std::find_if(user.memberships.begin(), user.memberships.end(),
                        [&](const Membership& x) { return x.team_id == team; });
  if (m == user.memberships.end()) fail(ErrorCode::not_found, user_id + " is not a member of `" + team + "`");
  for (const auto& org : orgs) {
    if (!user.organisation_ids.count(org))
      fail(ErrorCode::invalid_argument, "`" + org + "` is not one of " + user_id + "'s organisations");
  }
  std::sort(orgs.begin(), orgs.end());
  orgs.erase(std::unique(orgs.begin(), orgs.end()), orgs.end());
  m->organisation_ids = std::move(orgs);
  persist_user(user);
  it->second = user;
  return user;
}

// ---------------------------------------------------------------------------
// Spaces and teams

Space Registry::create_space(const Actor& actor, Space space) {
  std::unique_lock lock(state_mutex_);
  if (!actor.authenticated()) fail(ErrorCode::unauthenticated, "authentication required");
  if (!context_locked(actor).registry_admin)
    fail(ErrorCode::access_denied, "spaces are created by registry admins on request");
  space.name = std::string(text::trim(space.name));
  if (space.name.empty()) fail(ErrorCode::invalid_argument, "space name is required");
  space.is_default = false;
  if (space.admin_user_ids.empty() && actor.user) space.admin_user_ids.insert(*actor.user);
  if (space.admin_user_ids.empty()) fail(ErrorCode::invalid_argument, "a space needs at least one admin");
  for (const auto& u : space.admin_user_ids) {
    if (!users_.count(u)) fail(ErrorCode::not_found, "no user `" + u + "`");
  }
  space.id = unique_id(space.id, space.name, "space", [&](const std::string& id) { return spaces_.count(id) > 0; });
  options_.store->put(kSpaces, space.id, space);
  spaces_[space.id] = space;
  return space;
}

void Registry::delete_space(const Actor& actor, const SpaceId& id) {
  std::unique_lock lock(state_mutex_);
  auto it = spaces_.find(id);
  if (it == spaces_.end()) fail(ErrorCode::not_found, "no space `" + id + "`");
  if (it->second.is_default) fail(ErrorCode::forbidden, "the default space cannot be deleted");
  ActorContext ctx = context_locked(actor);
  if (!ctx.registry_admin && !ctx.admin_space_ids.count(id))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated, "not an admin of `" + id + "`");
  for (const auto& [tid, team] : teams_) {
    if (team.space_id == id) fail(ErrorCode::conflict, "space `" + id + "` still houses team `" + tid + "`");
  }
  options_.store->remove(kSpaces, id);
  spaces_.erase(it);
}

std::optional<Space> Registry::find_space(const SpaceId& id) const {
  std::shared_lock lock(state_mutex_);
  auto it = spaces_.find(id);
  if (it == spaces_.end()) return std::nullopt;
  return it->second;
}

std::vector<Space> Registry::spaces() const {
  std::shared_lock lock(state_mutex_);
  std::vector<Space> out;
  for (const auto& [id, s] : spaces_) out.push_back(s);
  return out;
}

Team Registry::create_team(const Actor& actor, Team team) {
  std::unique_lock lock(state_mutex_);
  if (!actor.authenticated()) fail(ErrorCode::unauthenticated, "authentication required");
  team.name = std::string(text::trim(team.name));
  if (team.name.empty()) fail(ErrorCode::invalid_argument, "team name is required");
  if (team.space_id.empty()) fail(ErrorCode::invalid_argument, "a team must belong to a space");
  auto space = spaces_.find(team.space_id);
  if (space == spaces_.end()) fail(ErrorCode::not_found, "no space `" + team.space_id + "`");
  ActorContext ctx = context_locked(actor);
  if (!space->second.is_default && !ctx.registry_admin && !ctx.admin_space_ids.count(team.space_id))
    fail(ErrorCode::access_denied, "only admins of `" + team.space_id + "` add teams to it");
  if (actor.user) {
    auto self = std::find_if(team.members.begin(), team.members.end(),
                             [&](const TeamMember& m) { return m.user_id == *actor.user; });
    if (self == team.members.end()) team.members.push_back({*actor.user, Role::admin});
    else self->role = Role::admin;
  }
  if (std::none_of(team.members.begin(), team.members.end(), [](const TeamMember& m) { return m.role == Role::admin; }))
    fail(ErrorCode::invalid_argument, "a team needs at least one admin");
  std::set<UserId> seen;
  for (const auto& m : team.members) {
    if (!users_.count(m.user_id)) fail(ErrorCode::not_found, "no user `" + m.user_id + "`");
    if (!seen.insert(m.user_id).second) fail(ErrorCode::duplicate_item, "user `" + m.user_id + "` listed twice");
  }
  if (!team.default_policy.grants.empty() || team.default_policy.visibility == Visibility::embargoed) {
    if (team.default_policy.visibility == Visibility::embargoed && !team.default_policy.embargo_until)
      fail(ErrorCode::invalid_argument, "embargoed policy needs an embargo date");
  }
  team.id = unique_id(team.id, team.name, "team", [&](const std::string& id) { return teams_.count(id) > 0; });
  persist_team(team);
  teams_[team.id] = team;
  for (const auto& m : team.members) {
    User& user = users_.at(m.user_id);
    user.memberships.push_back({team.id, m.role, {}});
    persist_user(user);
  }
  return team;
}

namespace {

bool can_administer_team(const ActorContext& ctx, const Team& team) {
  return ctx.registry_admin || ctx.admin_team_ids.count(team.id) || ctx.admin_space_ids.count(team.space_id);
}

}  // namespace

Team Registry::add_member(const Actor& actor, const TeamId& team_id, const UserId& user_id, Role role) {
  std::unique_lock lock(state_mutex_);
  auto tit = teams_.find(team_id);
  if (tit == teams_.end()) fail(ErrorCode::not_found, "no team `" + team_id + "`");
  if (!can_administer_team(context_locked(actor), tit->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated,
         "not an admin of team `" + team_id + "`");
  auto uit = users_.find(user_id);
  if (uit == users_.end()) fail(ErrorCode::not_found, "no user `" + user_id + "`");
  Team team = tit->second;
  User user = uit->second;
  auto m = std::find_if(team.members.begin(), team.members.end(), [&](const TeamMember& x) { return x.user_id == user_id; });
  if (m == team.members.end()) team.members.push_back({user_id, role});
  else m->role = role;
  if (std::none_of(team.members.begin(), team.members.end(), [](const TeamMember& x) { return x.role == Role::admin; }))
    fail(ErrorCode::conflict, "team `" + team_id + "` would have no admin");
  auto um = std::find_if(user.memberships.begin(), user.memberships.end(),
                         [&](const Membership& x) { return x.team_id == team_id; });
  if (um == user.memberships.end()) user.memberships.push_back({team_id, role, {}});
  else um->role = role;
  persist_team(team);
  persist_user(user);
  tit->second = team;
  uit->second = user;
  return team;
}

Team Registry::remove_member(const Actor& actor, const TeamId& team_id, const UserId& user_id) {
  std::unique_lock lock(state_mutex_);
  auto tit = teams_.find(team_id);
  if (tit == teams_.end()) fail(ErrorCode::not_found, "no team `" + team_id + "`");
  if (actor.user != user_id && !can_administer_team(context_locked(actor), tit->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated,
         "not an admin of team `" + team_id + "`");
  Team team = tit->second;
  auto m = std::find_if(team.members.begin(), team.members.end(), [&](const TeamMember& x) { return x.user_id == user_id; });
  if (m == team.members.end()) fail(ErrorCode::not_found, user_id + " is not a member of `" + team_id + "`");
  team.members.erase(m);
  if (std::none_of(team.members.begin(), team.members.end(), [](const TeamMember& x) { return x.role == Role::admin; }))
    fail(ErrorCode::conflict, "team `" + team_id + "` would have no admin");
  persist_team(team);
  tit->second = team;
  auto uit = users_.find(user_id);
  if (uit != users_.end()) {
    auto& ms = uit->second.memberships;
    ms.erase(std::remove_if(ms.begin(), ms.end(), [&](const Membership& x) { return x.team_id == team_id; }), ms.end());
    persist_user(uit->second);
  }
  return team;
}

Team Registry::set_team_defaults(const Actor& actor, const TeamId& team_id, std::optional<AccessPolicy> policy,
                                 std::optional<std::string> license) {
  std::unique_lock lock(state_mutex_);
  auto tit = teams_.find(team_id);
  if (tit == teams_.end()) fail(ErrorCode::not_found, "no team `" + team_id + "`");
  if (!can_administer_team(context_locked(actor), tit->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated,
         "not an admin of team `" + team_id + "`");
  Team team = tit->second;
  if (policy) {
    if (policy->visibility == Visibility::embargoed && !policy->embargo_until)
      fail(ErrorCode::invalid_argument, "embargoed policy needs an embargo date");
    team.default_policy = *policy;
  }
  if (license) team.default_license = *license;
  persist_team(team);
  tit->second = team;
  return team;
}

void Registry::delete_team(const Actor& actor, const TeamId& id) {
  std::unique_lock lock(state_mutex_);
  auto tit = teams_.find(id);
  if (tit == teams_.end()) fail(ErrorCode::not_found, "no team `" + id + "`");
  if (!can_administer_team(context_locked(actor), tit->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated, "not an admin of team `" + id + "`");
  for (const auto& [eid, entry] : entries_) {
    if (std::find(entry.team_ids.begin(), entry.team_ids.end(), id) != entry.team_ids.end())
      fail(ErrorCode::conflict, "team `" + id + "` still owns workflow " + std::to_string(eid));
  }
  for (const auto& [aid, asset] : assets_) {
    if (std::find(asset.team_ids.begin(), asset.team_ids.end(), id) != asset.team_ids.end())
      fail(ErrorCode::conflict, "team `" + id + "` still owns asset " + aid);
  }
  for (auto& [cid, collection] : collections_) {
    auto& curators = collection.curator_team_ids;
    if (std::find(curators.begin(), curators.end(), id) == curators.end()) continue;
    if (curators.size() == 1) fail(ErrorCode::conflict, "team `" + id + "` is the only curator of " + cid);
  }
  for (const auto& m : tit->second.members) {
    auto uit = users_.find(m.user_id);
    if (uit == users_.end()) continue;
    auto& ms = uit->second.memberships;
    ms.erase(std::remove_if(ms.begin(), ms.end(), [&](const Membership& x) { return x.team_id == id; }), ms.end());
    persist_user(uit->second);
  }
  for (auto& [cid, collection] : collections_) {
    auto& curators = collection.curator_team_ids;
    auto it = std::find(curators.begin(), curators.end(), id);
    if (it == curators.end()) continue;
    curators.erase(it);
    options_.store->put(kCollections, cid, collection);
  }
  options_.store->remove(kTeams, id);
  teams_.erase(tit);
}

std::optional<Team> Registry::find_team(const TeamId& id) const {
  std::shared_lock lock(state_mutex_);
  auto it = teams_.find(id);
  if (it == teams_.end()) return std::nullopt;
  return it->second;
}

std::vector<Team> Registry::teams() const {
  std::shared_lock lock(state_mutex_);
  std::vector<Team> out;
  for (const auto& [id, t] : teams_) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// Registration pipeline

struct Registry::Acquired {
  FileTree files;
  std::string main_path;
  std::optional<std::string> diagram_path;
  std::optional<std::string> abstract_cwl_path;
  VersionSource source;
  std::string revision_comment;
  ClassId detected_class{kOtherClass};
  std::optional<CrateContents> crate;
  std::optional<std::string> readme;
  std::optional<CitationMetadata> citation;
  std::vector<CandidateFile> candidates;
  std::vector<std::string> notes;
};

namespace {

void check_sizes(const FileTree& files, std::uint64_t max_bytes) {
  if (files.empty()) fail(ErrorCode::invalid_argument, "no files");
  for (const auto& [path, blob] : files) {
    if (path.empty() || path.front() == '/' || path.find("..") != std::string::npos)
      fail(ErrorCode::invalid_argument, "bad file path `" + path + "`");
    if (blob.bytes.size() > max_bytes)
      fail(ErrorCode::size_limit, "`" + path + "` exceeds " + std::to_string(max_bytes) + " bytes");
  }
}

std::string first_line(std::string_view s) {
  s = text::trim(s);
  return std::string(s.substr(0, s.find('\n')));
}

std::string stem(std::string_view path) {
  std::string name = text::basename(path);
  auto dot = name.find('.');
  return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

}  // namespace

Registry::Acquired Registry::acquire(const RegistrationSource& source) const {
  Acquired a;
  const std::uint64_t max_bytes = options_.config.max_file_bytes();
  const ClassRegistry& classes = *options_.classes;

  if (const auto* upload = std::get_if<UploadRequest>(&source)) {
    check_sizes(upload->files, max_bytes);
    a.files = upload->files;
    for (auto& [path, blob] : a.files) {
      if (blob.media_type.empty()) blob.media_type = guess_media_type(path);
    }
    a.source = UploadSource{};
    a.main_path = upload->main_path;
    a.diagram_path = upload->diagram_path;
  } else if (const auto* crate = std::get_if<CrateRequest>(&source)) {
    CrateOptions opts;
    opts.base_url = options_.config.base_url;
    opts.classes = options_.classes.get();
    opts.vocab = options_.vocab;
    CrateContents contents = read_crate(crate->archive, opts);
    check_sizes(contents.files, max_bytes);
    a.files = contents.files;
    a.main_path = contents.main_workflow_path;
    a.diagram_path = contents.diagram_path;
    a.abstract_cwl_path = contents.abstract_cwl_path;
    a.source = CrateImportSource{};
    if (contents.workflow_class) a.detected_class = *contents.workflow_class;
    a.crate = std::move(contents);
  } else {
    const auto& git = std::get<GitRequest>(source);
    RepositorySnapshot snap = import_repository(git.remote, git.ref, options_.git);
    check_sizes(snap.files, max_bytes);
    a.files = std::move(snap.files);
    a.source = GitImportSource{snap.remote, snap.commit_id, snap.ref};
    if (!snap.commit_log.empty()) a.revision_comment = first_line(snap.commit_log.front().message);
    if (git.main_path) a.main_path = *git.main_path;
  }

  if (!a.crate) {
    a.candidates = detect_workflow_files(a.files, classes);
    if (a.main_path.empty()) {
      if (!a.candidates.empty()) a.main_path = a.candidates.front().path;
      else if (a.files.size() == 1) a.main_path = a.files.begin()->first;
      else fail(ErrorCode::invalid_argument, "no workflow file recognised; name the main workflow path");
    }
    a.readme = extract_readme(a.files);
  }
  auto main = a.files.find(a.main_path);
  if (main == a.files.end()) fail(ErrorCode::not_found, "main workflow file `" + a.main_path + "` is not among the files");
  if (a.diagram_path && !a.files.count(*a.diagram_path))
    fail(ErrorCode::not_found, "diagram `" + *a.diagram_path + "` is not among the files");
  if (!a.crate) a.detected_class = detect_class(classes, a.main_path, main->second.bytes, options_.config.max_file_bytes());

  for (const auto& [path, blob] : a.files) {
    if (!text::iequals(path, "CITATION.cff")) continue;
    try {
      a.citation = parse_citation_cff(blob.bytes);
    } catch (const Error& e) {
      a.notes.push_back(std::string("CITATION.cff ignored: ") + e.what());
    }
  }
  return a;
}

WorkflowVersion Registry::make_version(const Acquired& a, const ClassId& workflow_class, int number,
                                       std::vector<std::string>& notes) const {
  WorkflowVersion v;
  v.version = number;
  v.files = a.files;
  v.main_workflow_path = a.main_path;
  v.diagram_path = a.diagram_path;
  v.abstract_cwl_path = a.abstract_cwl_path;
  v.source = a.source;
  v.created_at = now();
  v.revision_comment = a.revision_comment;
  if (a.crate) v.crate_extras = a.crate->extras;
  try {
    v.structure = parse_for_class(workflow_class, a.files, a.main_path, *options_.vocab,
                                  options_.config.max_file_bytes());
  } catch (const Error& e) {
    notes.push_back("could not parse " + a.main_path + " as " + workflow_class + ": " + e.what());
  }
  return v;
}

void Registry::apply_patch(WorkflowEntry& e, const MetadataPatch& p) const {
  if (p.title) e.title = std::string(text::trim(*p.title));
  if (p.description) e.description = *p.description;
  if (p.creators) {
    e.creators = *p.creators;
    for (auto& c : e.creators) {
      if (c.orcid) c.orcid = normalize_orcid(*c.orcid);
      if (c.orcid && c.orcid->empty()) c.orcid.reset();
    }
  }
  if (p.other_contributors) e.other_contributors = *p.other_contributors;
  if (p.contributor_user_ids) e.contributor_user_ids = *p.contributor_user_ids;
  if (p.maturity) e.maturity = *p.maturity;
  if (p.license) e.license = *p.license;
  if (p.tags) e.tags = *p.tags;
  if (p.edam_topics) {
    e.edam_topics.clear();
    for (const auto& t : *p.edam_topics)
      append_unique(e.edam_topics, options_.vocab->resolve(t, EdamBranch::topic).value_or(t));
  }
  if (p.edam_operations) {
    e.edam_operations.clear();
    for (const auto& t : *p.edam_operations)
      append_unique(e.edam_operations, options_.vocab->resolve(t, EdamBranch::operation).value_or(t));
  }
  if (p.tool_refs) e.tool_refs = *p.tool_refs;
  if (p.attributions) {
    e.attributions.clear();
    for (EntryId id : *p.attributions) append_unique(e.attributions, id);
  }
  if (p.custom_citation) {
    if (p.custom_citation->empty()) e.custom_citation.reset();
    else e.custom_citation = *p.custom_citation;
  }
  if (p.team_ids) {
    e.team_ids.clear();
    for (const auto& t : *p.team_ids) append_unique(e.team_ids, t);
  }
  if (p.policy) e.policy = *p.policy;
  if (p.test_status) e.test_status = *p.test_status;
}

ValidationReport Registry::validate_locked(const WorkflowEntry& entry) const {
  ValidationReport report = validate_entry(entry, *options_.vocab);
  for (const auto& t : entry.team_ids) {
    if (!teams_.count(t)) report.errors.push_back({"UnknownTeam", "team_ids", "no team `" + t + "`"});
  }
  for (EntryId a : entry.attributions) {
    if (a != entry.id && !entries_.count(a))
      report.errors.push_back({"UnknownAttribution", "attributions", "no workflow " + std::to_string(a)});
  }
  for (const auto& u : entry.contributor_user_ids) {
    if (!users_.count(u)) report.errors.push_back({"UnknownContributor", "contributor_user_ids", "no user `" + u + "`"});
  }
  if (entry.policy.visibility == Visibility::embargoed && !entry.policy.embargo_until)
    report.errors.push_back({"MissingEmbargoDate", "policy", "embargoed entries need an embargo date"});
  const auto& levels = options_.config.maturity_levels;
  if (!entry.maturity.empty() && std::find(levels.begin(), levels.end(), entry.maturity) == levels.end() &&
      !report.has_warning("UnknownMaturity"))
    report.warnings.push_back({"UnknownMaturity", "maturity", "`" + entry.maturity + "` is not a configured maturity level"});
  if (std::find(levels.begin(), levels.end(), entry.maturity) != levels.end()) {
    auto& w = report.warnings;
    w.erase(std::remove_if(w.begin(), w.end(), [](const ValidationIssue& i) { return i.code == "UnknownMaturity"; }),
            w.end());
  }
  return report;
}

Draft Registry::prefill(const Actor& actor, const Acquired& a, const MetadataPatch& overrides) const {
  Draft draft;
  draft.candidates = a.candidates;
  draft.notes = a.notes;
  draft.readme = a.readme;
  WorkflowEntry& e = draft.entry;
  e.workflow_class = overrides.workflow_class ? text::to_lower(*overrides.workflow_class) : a.detected_class;
  if (const WorkflowClass* cls = options_.classes->lookup(e.workflow_class)) e.workflow_class = cls->id;
  else draft.report.errors.push_back({"UnknownClass", "workflow_class", "no workflow class `" + e.workflow_class + "`"});

  WorkflowVersion v = make_version(a, e.workflow_class, 1, draft.notes);
  if (v.structure) {
    const WorkflowStructure& s = *v.structure;
    if (s.name) e.title = *s.name;
    if (s.description) e.description = *s.description;
    e.edam_topics = s.edam_topics;
    e.edam_operations = s.edam_operations;
    e.tool_refs = options_.tools->map(s.raw_tool_ids);
  }
  if (a.readme && !text::trim(*a.readme).empty()) e.description = *a.readme;
  if (a.citation) {
    if (!a.citation->title.empty()) e.title = a.citation->title;
    e.creators = a.citation->creators();
    if (a.citation->license) e.license = *a.citation->license;
    if (a.citation->preferred_citation) e.custom_citation = a.citation->preferred_citation;
  }
  if (a.crate) {
    const CrateContents& c = *a.crate;
    if (!c.title.empty()) e.title = c.title;
    if (!c.description.empty()) e.description = c.description;
    if (!c.license.empty()) e.license = c.license;
    if (!c.creators.empty()) e.creators = c.creators;
    if (!c.edam_topics.empty()) e.edam_topics = c.edam_topics;
    if (!c.edam_operations.empty()) e.edam_operations = c.edam_operations;
    if (!c.tags.empty()) e.tags = c.tags;
    if (c.maturity) e.maturity = *c.maturity;
    if (!c.tool_refs.empty()) e.tool_refs = c.tool_refs;
    if (c.custom_citation) e.custom_citation = c.custom_citation;
    for (const auto& t : c.team_ids) {
      if (teams_.count(t)) e.team_ids.push_back(t);
    }
    for (EntryId id : c.attribution_candidates) {
      if (entries_.count(id)) e.attributions.push_back(id);
    }
  }
  if (e.title.empty() && !overrides.title) e.title = stem(a.main_path);
  apply_patch(e, overrides);

  if (!e.team_ids.empty()) {
    auto first = teams_.find(e.team_ids.front());
    if (first != teams_.end()) {
      if (e.license.empty()) e.license = first->second.default_license;
      if (!overrides.policy) e.policy = first->second.default_policy;
    }
  }
  e.submitter = actor.user.value_or("");
  e.created_at = e.updated_at = v.created_at;
  e.versions.push_back(std::move(v));

  ValidationReport report = validate_locked(e);
  report.errors.insert(report.errors.begin(), draft.report.errors.begin(), draft.report.errors.end());
  draft.report = std::move(report);
  return draft;
}

Draft Registry::prepare_registration(const Actor& actor, const RegistrationSource& source,
                                     const MetadataPatch& overrides) {
  if (!actor.user) fail(ErrorCode::unauthenticated, "registration needs a signed-in user");
  Acquired a = acquire(source);
  std::shared_lock lock(state_mutex_);
  return prefill(actor, a, overrides);
}

RegistrationResult Registry::register_workflow(const Actor& actor, const RegistrationSource& source,
                                               const MetadataPatch& overrides) {
  if (!actor.user) fail(ErrorCode::unauthenticated, "registration needs a signed-in user");
  Acquired a = acquire(source);

  std::unique_lock lock(state_mutex_);
  Draft draft = prefill(actor, a, overrides);
  if (!draft.report.ok()) {
    std::string codes;
    for (const auto& issue : draft.report.errors) codes += (codes.empty() ? "" : ", ") + issue.code;
    throw RejectedError(ErrorCode::registration_rejected, "registration rejected: " + codes, draft.report);
  }
  ActorContext ctx = context_locked(actor);
  if (!ctx.registry_admin &&
      std::none_of(draft.entry.team_ids.begin(), draft.entry.team_ids.end(),
                   [&](const TeamId& t) { return ctx.team_ids.count(t) > 0; }))
    fail(ErrorCode::access_denied, "you must belong to one of the entry's teams");

  WorkflowEntry& entry = draft.entry;
  entry.id = next_entry_id_;
  ValidationReport report = validate_locked(entry);
  if (!report.ok()) throw RejectedError(ErrorCode::registration_rejected, "registration rejected", report);
  persist_entry(entry);
  ++next_entry_id_;
  persist_counters();
  entries_[entry.id] = entry;
  return {entry, report, draft.notes};
}

// ---------------------------------------------------------------------------
// Versions

WorkflowVersion Registry::commit_version(const Actor& actor, EntryId id, const Acquired& a,
                                         const std::string& revision_comment) {
  ClassId cls;
  {
    std::shared_lock lock(state_mutex_);
    const WorkflowEntry& entry = entry_ref(id);
    require_locked(actor, entry, Right::edit);
    cls = entry.workflow_class;
  }
  std::vector<std::string> notes;
  WorkflowVersion v = make_version(a, cls, 0, notes);
  if (!revision_comment.empty()) v.revision_comment = revision_comment;

  std::unique_lock lock(state_mutex_);
  WorkflowEntry entry = entry_ref(id);
  require_locked(actor, entry, Right::edit);
  int max_version = 0;
  for (const auto& existing : entry.versions) max_version = std::max(max_version, existing.version);
  v.version = max_version + 1;
  entry.versions.push_back(v);
  entry.updated_at = std::max(entry.updated_at, v.created_at);
  persist_entry(entry);
  entries_[id] = std::move(entry);
  emit(id, EventKind::new_version, json{{"version", v.version}});
  return v;
}

WorkflowVersion Registry::add_version(const Actor& actor, EntryId id, const RegistrationSource& source,
                                      const std::string& revision_comment) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  {
    std::shared_lock lock(state_mutex_);
    require_locked(actor, entry_ref(id), Right::edit);
  }
  Acquired a = acquire(source);
  return commit_version(actor, id, a, revision_comment);
}

void Registry::freeze_version(const Actor& actor, EntryId id, int version) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::unique_lock lock(state_mutex_);
  WorkflowEntry entry = entry_ref(id);
  require_locked(actor, entry, Right::manage);
  WorkflowVersion* v = entry.find_version(version);
  if (!v) fail(ErrorCode::unknown_version, "workflow " + std::to_string(id) + " has no version " + std::to_string(version));
  if (v->frozen) return;
  v->frozen = true;
  persist_entry(entry);
  entries_[id] = std::move(entry);
}

namespace {

WorkflowVersion& mutable_version(WorkflowEntry& entry, int version) {
  WorkflowVersion* v = entry.find_version(version);
  if (!v) fail(ErrorCode::unknown_version, "workflow " + std::to_string(entry.id) + " has no version " + std::to_string(version));
  if (v->frozen) fail(ErrorCode::frozen_version, "version " + std::to_string(version) + " is frozen");
  if (!std::holds_alternative<UploadSource>(v->source))
    fail(ErrorCode::conflict, "version " + std::to_string(version) + " mirrors its " +
                                  std::string(source_kind(v->source)) + " source and cannot be edited");
  return *v;
}

}  // namespace

WorkflowVersion Registry::put_file(const Actor& actor, EntryId id, int version, const std::string& path,
                                   FileBlob blob) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::unique_lock lock(state_mutex_);
  WorkflowEntry entry = entry_ref(id);
  require_locked(actor, entry, Right::edit);
  WorkflowVersion& v = mutable_version(entry, version);
  FileTree probe{{path, blob}};
  check_sizes(probe, options_.config.max_file_bytes());
  if (blob.media_type.empty()) blob.media_type = guess_media_type(path);
  v.files[path] = std::move(blob);
  if (path == v.main_workflow_path) {
    try {
      v.structure = parse_for_class(entry.workflow_class, v.files, v.main_workflow_path, *options_.vocab,
                                    options_.config.max_file_bytes());
    } catch (const Error&) {
      v.structure.reset();
    }
  }
  entry.updated_at = std::max(entry.updated_at, now());
  WorkflowVersion result = v;
  persist_entry(entry);
  entries_[id] = std::move(entry);
  return result;
}

WorkflowVersion Registry::remove_file(const Actor& actor, EntryId id, int version, const std::string& path) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::unique_lock lock(state_mutex_);
  WorkflowEntry entry = entry_ref(id);
  require_locked(actor, entry, Right::edit);
  WorkflowVersion& v = mutable_version(entry, version);
  if (!v.files.count(path)) fail(ErrorCode::not_found, "no file `" + path + "`");
  if (path == v.main_workflow_path) fail(ErrorCode::invalid_argument, "the main workflow file cannot be removed");
  v.files.erase(path);
  if (v.diagram_path == path) v.diagram_path.reset();
  if (v.abstract_cwl_path == path) v.abstract_cwl_path.reset();
  entry.updated_at = std::max(entry.updated_at, now());
  WorkflowVersion result = v;
  persist_entry(entry);
  entries_[id] = std::move(entry);
  return result;
}

// ---------------------------------------------------------------------------
// Metadata

bool Registry::creates_cycle_locked(EntryId id, const std::vector<EntryId>& attributions) const {
  std::vector<EntryId> stack(attributions.begin(), attributions.end());
  std::set<EntryId> seen;
  while (!stack.empty()) {
    EntryId cur = stack.back();
    stack.pop_back();
    if (cur == id) return true;
    if (!seen.insert(cur).second) continue;
    auto it = entries_.find(cur);
    if (it == entries_.end()) continue;
    for (EntryId next : it->second.attributions) stack.push_back(next);
  }
  return false;
}

WorkflowEntry Registry::update_metadata(const Actor& actor, EntryId id, const MetadataPatch& patch) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::unique_lock lock(state_mutex_);
  WorkflowEntry entry = entry_ref(id);
  require_locked(actor, entry, Right::edit);
  if (patch.workflow_class && *patch.workflow_class != entry.workflow_class)
    fail(ErrorCode::invalid_argument, "the workflow class is fixed at registration");
  if (patch.policy || patch.team_ids) require_locked(actor, entry, Right::manage);

  apply_patch(entry, patch);
  if (patch.attributions) {
    if (std::find(entry.attributions.begin(), entry.attributions.end(), id) != entry.attributions.end())
      fail(ErrorCode::attribution_cycle, "a workflow cannot be based on itself");
    if (creates_cycle_locked(id, entry.attributions))
      fail(ErrorCode::attribution_cycle, "attribution would create a cycle through workflow " + std::to_string(id));
  }
  ValidationReport report = validate_locked(entry);
  if (!report.ok()) {
    std::string codes;
    for (const auto& issue : report.errors) codes += (codes.empty() ? "" : ", ") + issue.code;
    throw RejectedError(ErrorCode::validation_failed, "metadata rejected: " + codes, report);
  }
  entry.updated_at = std::max(entry.updated_at, now());
  persist_entry(entry);
  entries_[id] = entry;
  emit(id, EventKind::metadata_changed, json{{"fields", patch.fields()}});
  return entry;
}

void Registry::delete_workflow(const Actor& actor, EntryId id) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::unique_lock lock(state_mutex_);
  const WorkflowEntry& entry = entry_ref(id);
  require_locked(actor, entry, Right::manage);
  if (!entry.doi_records.empty()) fail(ErrorCode::conflict, "workflows with minted DOIs cannot be deleted");
  const std::string key = std::to_string(id);
  for (auto& [cid, collection] : collections_) {
    auto& items = collection.items;
    auto before = items.size();
    items.erase(std::remove_if(items.begin(), items.end(),
                               [&](const CollectionItem& i) { return i.kind == AssetKind::workflow && i.target == key; }),
                items.end());
    if (items.size() != before) options_.store->put(kCollections, cid, collection);
  }
  for (auto it = subscriptions_.begin(); it != subscriptions_.end();) {
    if (it->entry_id == id) {
      options_.store->remove(kSubscriptions, subscription_key(*it));
      it = subscriptions_.erase(it);
    } else {
      ++it;
    }
  }
  options_.store->remove(kWorkflows, key);
  options_.store->remove(kMetrics, key);
  entries_.erase(id);
}

// ---------------------------------------------------------------------------
// DOIs

DoiRecord Registry::mint_doi(const Actor& actor, EntryId id, int version) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::string doi;
  json payload;
  {
    std::shared_lock lock(state_mutex_);
    const WorkflowEntry& entry = entry_ref(id);
    require_locked(actor, entry, Right::manage);
    const WorkflowVersion& v = version_of(entry, version);
    if (auto it = entry.doi_records.find(version); it != entry.doi_records.end()) return it->second;
    if (entry.policy.visibility != Visibility::public_access)
      fail(ErrorCode::visibility_required, "DOIs are only minted for public workflows");

    DataciteContext ctx;
    ctx.doi = format_doi(options_.config.doi_prefix, id, version);
    ctx.publisher = options_.config.publisher;
    ctx.url = canonical_url(options_.config.base_url, id, version);
    const WorkflowClass* cls = options_.classes->find(entry.workflow_class);
    ctx.class_name = cls ? cls->display_name : entry.workflow_class;
    ctx.published = now();
    for (EntryId base : entry.attributions) {
      auto bit = entries_.find(base);
      if (bit != entries_.end() && !bit->second.doi_records.empty())
        ctx.derived_from.push_back("https://doi.org/" + bit->second.doi_records.rbegin()->second.doi);
      else
        ctx.derived_from.push_back(canonical_url(options_.config.base_url, base));
    }
    for (const auto& t : entry.team_ids) {
      auto tit = teams_.find(t);
      ctx.team_names.push_back(tit == teams_.end() ? t : tit->second.name);
    }
    doi = ctx.doi;
    payload = datacite_payload(entry, v, ctx);
  }

  try {
    options_.mint_client->mint(doi, payload);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::mint_failed) throw;
    throw Error(ErrorCode::mint_failed, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::mint_failed, e.what());
  }

  std::unique_lock lock(state_mutex_);
  WorkflowEntry entry = entry_ref(id);
  DoiRecord record{doi, id, version, payload, now()};
  entry.find_version(version)->frozen = true;
  entry.doi_records[version] = record;
  persist_entry(entry);
  entries_[id] = std::move(entry);
  emit(id, EventKind::doi_minted, json{{"version", version}, {"doi", doi}});
  return record;
}

// ---------------------------------------------------------------------------
// Git sync

std::vector<WorkflowVersion> Registry::sync_git(const Actor& actor, EntryId id) {
  std::lock_guard<std::mutex> entry_guard(entry_mutex(id));
  std::string remote;
  std::string main_path;
  std::set<std::string> known_commits;
  {
    std::shared_lock lock(state_mutex_);
    const WorkflowEntry& entry = entry_ref(id);
    require_locked(actor, entry, Right::edit);
    for (const auto& v : entry.versions) {
      if (const auto* git = std::get_if<GitImportSource>(&v.source)) {
        remote = git->remote;
        main_path = v.main_workflow_path;
        known_commits.insert(git->commit_id);
      }
    }
  }
  if (remote.empty()) fail(ErrorCode::conflict, "workflow " + std::to_string(id) + " has no git source");

  RepositorySnapshot head = import_repository(remote, std::nullopt, options_.git);
  std::vector<WorkflowVersion> created;
  for (const Release& release : enumerate_releases(head)) {
    if (known_commits.count(release.commit_id)) continue;
    GitRequest request{remote, release.tag, std::nullopt};
    Acquired a = acquire(request);
    if (!main_path.empty() && a.files.count(main_path)) {
      a.main_path = main_path;
    }
    created.push_back(commit_version(actor, id, a, "Release " + release.tag));
    known_commits.insert(release.commit_id);
  }
  return created;
}

// ---------------------------------------------------------------------------
// Reads

WorkflowEntry Registry::get_workflow(const Actor& actor, EntryId id, Right right) const {
  std::shared_lock lock(state_mutex_);
  const WorkflowEntry& entry = entry_ref(id);
  require_locked(actor, entry, right);
  return entry;
}

bool Registry::exists(EntryId id) const {
  std::shared_lock lock(state_mutex_);
  return entries_.count(id) > 0;
}

AccessDecision Registry::decide(const Actor& actor, EntryId id, Right right) const {
  std::shared_lock lock(state_mutex_);
  return decide_locked(actor, entry_ref(id), right);
}

std::vector<WorkflowEntry> Registry::visible_workflows(const Actor& actor) const {
  std::shared_lock lock(state_mutex_);
  std::vector<WorkflowEntry> out;
  for (const auto& [id, entry] : entries_) {
    if (decide_locked(actor, entry, Right::view)) out.push_back(entry);
  }
  return out;
}

std::vector<EmbargoStub> Registry::embargoed_stubs(const Actor& actor) const {
  std::vector<EmbargoStub> out;
  if (options_.config.embargo_hides_listing) return out;
  std::shared_lock lock(state_mutex_);
  for (const auto& [id, entry] : entries_) {
    if (entry.policy.visibility != Visibility::embargoed) continue;
    if (decide_locked(actor, entry, Right::view)) continue;
    out.push_back({id, entry.title, entry.workflow_class, entry.team_ids, entry.policy.embargo_until});
  }
  return out;
}

SearchDoc Registry::search_doc_locked(const WorkflowEntry& e) const {
  SearchDoc d;
  d.id = e.id;
  d.title = e.title;
  d.description = e.description;
  d.tags = e.tags;
  for (const auto& c : e.creators) d.creator_names.push_back(c.name);
  d.created_at = e.created_at;
  d.updated_at = e.updated_at;
  d.views = e.metrics.views;
  d.downloads = e.metrics.downloads;

  auto& f = d.facets;
  f["class"] = {e.workflow_class};
  f["tag"] = e.tags;
  f["creator"] = d.creator_names;
  f["team"] = e.team_ids;
  std::vector<std::string> spaces, orgs;
  for (const auto& t : e.team_ids) {
    auto tit = teams_.find(t);
    if (tit == teams_.end()) continue;
    append_unique(spaces, tit->second.space_id);
    for (const auto& member : tit->second.members) {
      auto uit = users_.find(member.user_id);
      if (uit == users_.end()) continue;
      if (const Membership* m = uit->second.membership(t)) {
        for (const auto& o : m->organisation_ids) append_unique(orgs, o);
      }
    }
  }
  f["space"] = std::move(spaces);
  f["organisation"] = std::move(orgs);
  if (!e.maturity.empty()) f["maturity"] = {e.maturity};
  f["edam_topic"] = e.edam_topics;
  f["edam_operation"] = e.edam_operations;
  std::vector<std::string> tools;
  for (const auto& t : e.tool_refs) append_unique(tools, t.biotools_id.value_or(t.raw_id));
  f["tool"] = std::move(tools);
  return d;
}

SearchDoc Registry::search_doc(const WorkflowEntry& entry) const {
  std::shared_lock lock(state_mutex_);
  return search_doc_locked(entry);
}

SearchPage Registry::search(const Actor& actor, const SearchQuery& query) const {
  check_query(query);
  std::shared_lock lock(state_mutex_);
  std::vector<SearchDoc> docs;
  for (const auto& [id, entry] : entries_) {
    if (decide_locked(actor, entry, Right::view)) docs.push_back(search_doc_locked(entry));
  }
  SearchResult result = run_search(docs, query);
  SearchPage page;
  page.total = result.total;
  page.facet_counts = std::move(result.facet_counts);
  for (EntryId id : result.hits) page.hits.push_back(entries_.at(id));
  return page;
}

Metrics Registry::record_activity(EntryId id, ActivityKind kind) {
  std::unique_lock lock(state_mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) fail(ErrorCode::not_found, "no workflow " + std::to_string(id));
  Metrics& m = it->second.metrics;
  if (kind == ActivityKind::view) ++m.views;
  else ++m.downloads;
  persist_metrics(it->second);
  return m;
}

CrateOptions Registry::crate_options_locked() const {
  CrateOptions opts;
  opts.base_url = options_.config.base_url;
  opts.classes = options_.classes.get();
  opts.vocab = options_.vocab;
  std::map<TeamId, std::string> names;
  for (const auto& [id, team] : teams_) names[id] = team.name;
  opts.team_name = [names = std::move(names)](const TeamId& id) {
    auto it = names.find(id);
    return it == names.end() ? std::string() : it->second;
  };
  return opts;
}

CrateOptions Registry::crate_options() const {
  std::shared_lock lock(state_mutex_);
  return crate_options_locked();
}

WorkflowCrate Registry::export_crate(const Actor& actor, EntryId id, std::optional<int> version) const {
  std::shared_lock lock(state_mutex_);
  const WorkflowEntry& entry = entry_ref(id);
  require_locked(actor, entry, Right::download);
  const WorkflowVersion& v = version ? version_of(entry, *version) : entry.latest();
  return build_crate(entry, v, crate_options_locked());
}

json Registry::bioschemas(const Actor& actor, EntryId id, std::optional<int> version) const {
  std::shared_lock lock(state_mutex_);
  const WorkflowEntry& entry = entry_ref(id);
  require_locked(actor, entry, Right::view);
  const WorkflowVersion& v = version ? version_of(entry, *version) : entry.latest();
  return emit_bioschemas(entry, v, crate_options_locked());
}

CreditGraph Registry::credit(const Actor& actor, EntryId id) const {
  std::shared_lock lock(state_mutex_);
  const WorkflowEntry& entry = entry_ref(id);
  require_locked(actor, entry, Right::view);
  return resolve_credit(entry, directory_locked());
}

// ---------------------------------------------------------------------------
// Collections

namespace {

bool curates(const ActorContext& ctx, const Collection& c) {
  if (ctx.registry_admin) return true;
  return std::any_of(c.curator_team_ids.begin(), c.curator_team_ids.end(),
                     [&](const TeamId& t) { return ctx.team_ids.count(t) > 0; });
}

}  // namespace

Collection Registry::create_collection(const Actor& actor, Collection c) {
  std::unique_lock lock(state_mutex_);
  if (!actor.authenticated()) fail(ErrorCode::unauthenticated, "authentication required");
  c.title = std::string(text::trim(c.title));
  if (c.title.empty()) fail(ErrorCode::invalid_argument, "collection title is required");
  if (c.curator_team_ids.empty()) fail(ErrorCode::invalid_argument, "a collection needs a curator team");
  for (const auto& t : c.curator_team_ids) {
    if (!teams_.count(t)) fail(ErrorCode::not_found, "no team `" + t + "`");
  }
  if (!curates(context_locked(actor), c)) fail(ErrorCode::access_denied, "you must belong to a curator team");
  std::vector<CollectionItem> items = std::move(c.items);
  c.items.clear();
  for (auto& item : items) {
    if (std::find(c.items.begin(), c.items.end(), item) != c.items.end())
      fail(ErrorCode::duplicate_item, "item listed twice: " + item.target);
    if (item.kind == AssetKind::workflow && !entries_.count(std::strtoull(item.target.c_str(), nullptr, 10)))
      fail(ErrorCode::not_found, "no workflow " + item.target);
    c.items.push_back(std::move(item));
  }
  if (c.id.empty()) c.id = "collection-" + std::to_string(next_local_id_++);
  c.id = unique_id(c.id, {}, "collection", [&](const std::string& id) { return collections_.count(id) > 0; });
  persist_counters();
  options_.store->put(kCollections, c.id, c);
  collections_[c.id] = c;
  return c;
}

Collection Registry::add_collection_item(const Actor& actor, const CollectionId& id, CollectionItem item) {
  std::unique_lock lock(state_mutex_);
  auto it = collections_.find(id);
  if (it == collections_.end()) fail(ErrorCode::not_found, "no collection `" + id + "`");
  if (!curates(context_locked(actor), it->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated, "not a curator of `" + id + "`");
  if (item.target.empty()) fail(ErrorCode::invalid_argument, "item target is required");
  if (item.kind == AssetKind::workflow) {
    char* end = nullptr;
    const EntryId target = std::strtoull(item.target.c_str(), &end, 10);
    if (*end != '\0' || !entries_.count(target)) fail(ErrorCode::not_found, "no workflow " + item.target);
  }
  auto& items = it->second.items;
  if (std::find(items.begin(), items.end(), item) != items.end())
    fail(ErrorCode::duplicate_item, "`" + item.target + "` is already in `" + id + "`");
  Collection updated = it->second;
  updated.items.push_back(std::move(item));
  options_.store->put(kCollections, id, updated);
  it->second = updated;
  return updated;
}

Collection Registry::remove_collection_item(const Actor& actor, const CollectionId& id, const CollectionItem& item) {
  std::unique_lock lock(state_mutex_);
  auto it = collections_.find(id);
  if (it == collections_.end()) fail(ErrorCode::not_found, "no collection `" + id + "`");
  if (!curates(context_locked(actor), it->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated, "not a curator of `" + id + "`");
  Collection updated = it->second;
  auto pos = std::find(updated.items.begin(), updated.items.end(), item);
  if (pos == updated.items.end()) fail(ErrorCode::not_found, "`" + item.target + "` is not in `" + id + "`");
  updated.items.erase(pos);
  options_.store->put(kCollections, id, updated);
  it->second = updated;
  return updated;
}

void Registry::delete_collection(const Actor& actor, const CollectionId& id) {
  std::unique_lock lock(state_mutex_);
  auto it = collections_.find(id);
  if (it == collections_.end()) fail(ErrorCode::not_found, "no collection `" + id + "`");
  if (!curates(context_locked(actor), it->second))
    fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated, "not a curator of `" + id + "`");
  options_.store->remove(kCollections, id);
  collections_.erase(it);
}

std::optional<Collection> Registry::find_collection(const CollectionId& id) const {
  std::shared_lock lock(state_mutex_);
  auto it = collections_.find(id);
  if (it == collections_.end()) return std::nullopt;
  return it->second;
}

std::vector<Collection> Registry::collections() const {
  std::shared_lock lock(state_mutex_);
  std::vector<Collection> out;
  for (const auto& [id, c] : collections_) out.push_back(c);
  return out;
}

std::vector<CollectionId> Registry::collections_containing(EntryId id) const {
  std::shared_lock lock(state_mutex_);
  const std::string key = std::to_string(id);
  std::vector<CollectionId> out;
  for (const auto& [cid, c] : collections_) {
    if (std::any_of(c.items.begin(), c.items.end(),
                    [&](const CollectionItem& i) { return i.kind == AssetKind::workflow && i.target == key; }))
      out.push_back(cid);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assets

Asset Registry::create_asset(const Actor& actor, Asset asset) {
  std::unique_lock lock(state_mutex_);
  if (!actor.user) fail(ErrorCode::unauthenticated, "registration needs a signed-in user");
  if (asset.kind == AssetKind::workflow) fail(ErrorCode::invalid_argument, "workflows are registered as entries");
  if (asset.content.has_value() == asset.external.has_value())
    fail(ErrorCode::invalid_argument, "an asset has either stored content or an external reference");
  if (asset.external && asset.external->url.empty()) fail(ErrorCode::invalid_argument, "external reference needs a URL");
  if (asset.content) check_sizes(*asset.content, options_.config.max_file_bytes());
  if (text::trim(asset.title).empty()) fail(ErrorCode::invalid_argument, "asset title is required");
  if (asset.team_ids.empty()) fail(ErrorCode::invalid_argument, "an asset needs an owning team");
  ActorContext ctx = context_locked(actor);
  for (const auto& t : asset.team_ids) {
    if (!teams_.count(t)) fail(ErrorCode::not_found, "no team `" + t + "`");
  }
  if (!ctx.registry_admin && std::none_of(asset.team_ids.begin(), asset.team_ids.end(),
                                          [&](const TeamId& t) { return ctx.team_ids.count(t) > 0; }))
    fail(ErrorCode::access_denied, "you must belong to one of the asset's teams");
  if (asset.policy.visibility == Visibility::embargoed && !asset.policy.embargo_until)
    fail(ErrorCode::invalid_argument, "embargoed policy needs an embargo date");
  asset.submitter = *actor.user;
  asset.id = "asset-" + std::to_string(next_local_id_++);
  persist_counters();
  if (asset.content) {
    for (const auto& [path, blob] : *asset.content) options_.store->put_blob(blob.bytes);
  }
  options_.store->put(kAssets, asset.id, asset);
  assets_[asset.id] = asset;
  return asset;
}

Asset Registry::get_asset(const Actor& actor, const AssetId& id) const {
  std::shared_lock lock(state_mutex_);
  auto it = assets_.find(id);
  if (it == assets_.end()) fail(ErrorCode::not_found, "no asset `" + id + "`");
  ActorContext ctx = context_locked(actor);
  AccessDecision d = check_access(actor.authenticated() ? &ctx : nullptr,
                                  resource_locked(it->second.policy, it->second.team_ids, it->second.submitter),
                                  Right::view, now());
  if (!d) fail(ErrorCode::access_denied, "view denied on asset " + id + ": " + d.reason);
  return it->second;
}

void Registry::delete_asset(const Actor& actor, const AssetId& id) {
  std::unique_lock lock(state_mutex_);
  auto it = assets_.find(id);
  if (it == assets_.end()) fail(ErrorCode::not_found, "no asset `" + id + "`");
  ActorContext ctx = context_locked(actor);
  AccessDecision d = check_access(actor.authenticated() ? &ctx : nullptr,
                                  resource_locked(it->second.policy, it->second.team_ids, it->second.submitter),
                                  Right::manage, now());
  if (!d) fail(actor.authenticated() ? ErrorCode::access_denied : ErrorCode::unauthenticated, d.reason);
  for (auto& [cid, collection] : collections_) {
    auto& items = collection.items;
    auto before = items.size();
    items.erase(std::remove_if(items.begin(), items.end(),
                               [&](const CollectionItem& i) { return i.kind == it->second.kind && i.target == id; }),
                items.end());
    if (items.size() != before) options_.store->put(kCollections, cid, collection);
  }
  options_.store->remove(kAssets, id);
  assets_.erase(it);
}

// ---------------------------------------------------------------------------
// Notifications

void Registry::subscribe(const Actor& actor, EntryId id) {
  if (!actor.user) fail(ErrorCode::unauthenticated, "subscriptions need a signed-in user");
  std::unique_lock lock(state_mutex_);
  require_locked(actor, entry_ref(id), Right::view);
  for (const auto& s : subscriptions_) {
    if (s.user_id == *actor.user && s.entry_id == id) return;
  }
  Subscription s{*actor.user, id, next_seq_ - 1};
  options_.store->put(kSubscriptions, subscription_key(s),
                      json{{"user_id", s.user_id}, {"entry_id", s.entry_id}, {"since_seq", s.since_seq}});
  subscriptions_.push_back(std::move(s));
}

void Registry::unsubscribe(const Actor& actor, EntryId id) {
  if (!actor.user) fail(ErrorCode::unauthenticated, "subscriptions need a signed-in user");
  std::unique_lock lock(state_mutex_);
  for (auto it = subscriptions_.begin(); it != subscriptions_.end(); ++it) {
    if (it->user_id == *actor.user && it->entry_id == id) {
      options_.store->remove(kSubscriptions, subscription_key(*it));
      subscriptions_.erase(it);
      return;
    }
  }
}

std::vector<NotificationEvent> Registry::notifications(const Actor& actor) const {
  std::vector<NotificationEvent> out;
  if (!actor.user) return out;
  std::shared_lock lock(state_mutex_);
  std::map<EntryId, std::uint64_t> since;
  for (const auto& s : subscriptions_) {
    if (s.user_id != *actor.user) continue;
    auto it = entries_.find(s.entry_id);
    if (it == entries_.end() || !decide_locked(actor, it->second, Right::view)) continue;
    since[s.entry_id] = s.since_seq;
  }
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    auto s = since.find(it->entry_id);
    if (s != since.end() && it->seq > s->second) out.push_back(*it);
  }
  return out;
}

std::vector<NotificationEvent> Registry::events() const {
  std::shared_lock lock(state_mutex_);
  return events_;
}

}  // namespace flowhub
