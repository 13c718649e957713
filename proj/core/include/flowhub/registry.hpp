#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "flowhub/access.hpp"
#include "flowhub/classes.hpp"
#include "flowhub/config.hpp"
#include "flowhub/crate.hpp"
#include "flowhub/doi.hpp"
#include "flowhub/error.hpp"
#include "flowhub/git_import.hpp"
#include "flowhub/model.hpp"
#include "flowhub/search.hpp"
#include "flowhub/store.hpp"
#include "flowhub/validation.hpp"
#include "flowhub/vocab.hpp"

namespace flowhub {

/// Who is asking. `user` empty = anonymous. `operator_access` is the local
/// operator (CLI against a store directory): registry-admin rights without
/// being a user.
struct Actor {
  std::optional<UserId> user;
  bool operator_access = false;

  static Actor anonymous() { return {}; }
  static Actor of(UserId id) { return {std::move(id), false}; }
  static Actor local_operator() { return {std::nullopt, true}; }
  bool authenticated() const { return user.has_value() || operator_access; }
};

/// Raised when validate_entry reports errors. code() is
/// registration_rejected or validation_failed.
class RejectedError : public Error {
 public:
  RejectedError(ErrorCode code, const std::string& message, ValidationReport report)
      : Error(code, message), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

// ---------------------------------------------------------------------------
// Registration input

struct UploadRequest {
  FileTree files;
  /// Empty: the best detect_workflow_files candidate (or the only file).
  std::string main_path;
  std::optional<std::string> diagram_path;
};

struct CrateRequest {
  std::string archive;
};

struct GitRequest {
  std::string remote;
  std::optional<std::string> ref;
  std::optional<std::string> main_path;
};

using RegistrationSource = std::variant<UploadRequest, CrateRequest, GitRequest>;

/// Wizard-editable fields. Absent members are left alone.
struct MetadataPatch {
  std::optional<std::string> title;
  std::optional<std::string> description;
  std::optional<std::vector<Creator>> creators;
  std::optional<std::string> other_contributors;
  std::optional<std::vector<UserId>> contributor_user_ids;
  std::optional<std::string> maturity;
  std::optional<std::string> license;
  std::optional<std::vector<std::string>> tags;
  std::optional<std::vector<std::string>> edam_topics;
  std::optional<std::vector<std::string>> edam_operations;
  std::optional<std::vector<ToolRef>> tool_refs;
  std::optional<std::vector<EntryId>> attributions;
  /// Empty string clears.
  std::optional<std::string> custom_citation;
  std::optional<std::vector<TeamId>> team_ids;
  std::optional<AccessPolicy> policy;
  std::optional<TestStatus> test_status;
  /// Registration only.
  std::optional<ClassId> workflow_class;

  bool empty() const;
  /// Names of the fields present, in declaration order.
  std::vector<std::string> fields() const;
};

/// Throws Error(invalid_argument) for unknown or ill-typed keys.
MetadataPatch metadata_patch_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetadataPatch& patch);

/// A registration as the wizard would show it before submission.
struct Draft {
  WorkflowEntry entry;
  ValidationReport report;
  std::vector<CandidateFile> candidates;
  /// Non-fatal pipeline messages (parser failures, skipped prefill sources).
  std::vector<std::string> notes;
  std::optional<std::string> readme;
};

struct RegistrationResult {
  WorkflowEntry entry;
  ValidationReport report;
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Notifications

enum class EventKind { new_version, metadata_changed, doi_minted };
std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

struct NotificationEvent {
  std::uint64_t seq = 0;
  EntryId entry_id = 0;
  EventKind kind = EventKind::new_version;
  Timestamp timestamp{};
  nlohmann::json payload = nlohmann::json::object();
};

nlohmann::json to_json(const NotificationEvent& event);
NotificationEvent event_from_json(const nlohmann::json& j);

struct Subscription {
  UserId user_id;
  EntryId entry_id = 0;
  /// Events up to this sequence number predate the subscription.
  std::uint64_t since_seq = 0;
};

enum class ActivityKind { view, download };

struct SearchPage {
  std::vector<WorkflowEntry> hits;
  std::map<std::string, std::map<std::string, std::uint64_t>> facet_counts;
  std::uint64_t total = 0;
};

/// Listing stub for an embargoed entry the caller may not view.
struct EmbargoStub {
  EntryId id = 0;
  std::string title;
  ClassId workflow_class;
  std::vector<TeamId> team_ids;
  std::optional<Timestamp> embargo_until;
};

struct RegistryOptions {
  Config config;
  /// Defaults to a MemoryStore (or a FileStore when config.store_dir is set).
  std::shared_ptr<Store> store;
  /// Defaults to a MockMintClient.
  std::shared_ptr<MintClient> mint_client;
  std::shared_ptr<const ClassRegistry> classes;
  const EdamVocabulary* vocab = nullptr;
  const ToolMapper* tools = nullptr;
  GitImportOptions git;
  std::function<Timestamp()> clock;
  int pbkdf2_iterations = 20000;
};

/// Transactional registry state. Reads run concurrently; writes to one entry
/// are serialized; every write reaches the store before it becomes visible.
class Registry {
 public:
  explicit Registry(RegistryOptions options = {});
  ~Registry();
  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;

  const Config& config() const { return options_.config; }
  const ClassRegistry& classes() const { return *options_.classes; }
  const EdamVocabulary& vocab() const { return *options_.vocab; }
  Store& store() { return *options_.store; }
  MintClient& mint_client() { return *options_.mint_client; }
  Timestamp now() const;

  // -- identities ----------------------------------------------------------

  /// Registry admins (or the operator) create users. The very first user may
  /// be created by anyone and becomes a registry admin.
  User create_user(const Actor& actor, User user, const std::optional<std::string>& password = {});
  void set_password(const Actor& actor, const UserId& user, const std::string& password);
  /// Throws Error(unauthenticated) on bad credentials.
  std::string issue_token(const UserId& user, const std::string& password);
  /// Operator or registry admin issues a token for any user.
  std::string issue_token_for(const Actor& actor, const UserId& user);
  /// nullopt for unknown or expired tokens.
  std::optional<UserId> authenticate(const std::string& token) const;

  std::optional<User> find_user(const UserId& id) const;
  std::vector<User> users() const;
  ActorContext actor_context(const Actor& actor) const;

  Organisation create_organisation(const Actor& actor, Organisation org);
  std::vector<Organisation> organisations() const;
  /// Replaces the user's organisation set (self or registry admin).
  User set_user_organisations(const Actor& actor, const UserId& user, std::set<OrganisationId> orgs);
  /// Per-team affiliations; must be a subset of the user's organisations.
  User set_team_affiliations(const Actor& actor, const UserId& user, const TeamId& team,
                             std::vector<OrganisationId> orgs);

  /// Registry admins only. The caller becomes admin when none are given.
  Space create_space(const Actor& actor, Space space);
  /// Default space: Error(forbidden). Space with teams: Error(conflict).
  void delete_space(const Actor& actor, const SpaceId& id);
  std::optional<Space> find_space(const SpaceId& id) const;
  std::vector<Space> spaces() const;
  const SpaceId& default_space_id() const { return default_space_id_; }

  /// Any user may create a team in the default space; other spaces need a
  /// space admin. The creator becomes the team's admin.
  Team create_team(const Actor& actor, Team team);
  /// Team admins, space admins and registry admins.
  Team add_member(const Actor& actor, const TeamId& team, const UserId& user, Role role = Role::member);
  Team remove_member(const Actor& actor, const TeamId& team, const UserId& user);
  Team set_team_defaults(const Actor& actor, const TeamId& team, std::optional<AccessPolicy> policy,
                         std::optional<std::string> license);
  /// Error(conflict) while entries or assets still belong to the team.
  void delete_team(const Actor& actor, const TeamId& id);
  std::optional<Team> find_team(const TeamId& id) const;
  std::vector<Team> teams() const;

  // -- workflows -----------------------------------------------------------

  /// Runs the registration pipeline without persisting anything.
  Draft prepare_registration(const Actor& actor, const RegistrationSource& source,
                             const MetadataPatch& overrides = {});
  /// Throws RejectedError(registration_rejected) when validation reports
  /// errors; source errors propagate unchanged.
  RegistrationResult register_workflow(const Actor& actor, const RegistrationSource& source,
                                       const MetadataPatch& overrides = {});

  WorkflowVersion add_version(const Actor& actor, EntryId id, const RegistrationSource& source,
                              const std::string& revision_comment = {});
  void freeze_version(const Actor& actor, EntryId id, int version);
  /// Upload-sourced, unfrozen versions only. Error(frozen_version) once frozen,
  /// Error(conflict) for git/crate versions.
  WorkflowVersion put_file(const Actor& actor, EntryId id, int version, const std::string& path, FileBlob blob);
  WorkflowVersion remove_file(const Actor& actor, EntryId id, int version, const std::string& path);

  WorkflowEntry update_metadata(const Actor& actor, EntryId id, const MetadataPatch& patch);
  void delete_workflow(const Actor& actor, EntryId id);

  DoiRecord mint_doi(const Actor& actor, EntryId id, int version);

  /// Git release sync: one new version per tag whose commit is not yet
  /// registered, in release order.
  std::vector<WorkflowVersion> sync_git(const Actor& actor, EntryId id);

  /// Error(not_found) for unknown ids, Error(access_denied) when `right` is
  /// not held.
  WorkflowEntry get_workflow(const Actor& actor, EntryId id, Right right = Right::view) const;
  bool exists(EntryId id) const;
  AccessDecision decide(const Actor& actor, EntryId id, Right right) const;
  /// Every entry the actor may view, by id.
  std::vector<WorkflowEntry> visible_workflows(const Actor& actor) const;
  std::vector<EmbargoStub> embargoed_stubs(const Actor& actor) const;

  SearchPage search(const Actor& actor, const SearchQuery& query) const;
  SearchDoc search_doc(const WorkflowEntry& entry) const;

  Metrics record_activity(EntryId id, ActivityKind kind);

  WorkflowCrate export_crate(const Actor& actor, EntryId id, std::optional<int> version = {}) const;
  CrateOptions crate_options() const;
  nlohmann::json bioschemas(const Actor& actor, EntryId id, std::optional<int> version = {}) const;
  CreditGraph credit(const Actor& actor, EntryId id) const;

  // -- collections ---------------------------------------------------------

  Collection create_collection(const Actor& actor, Collection collection);
  /// Error(duplicate_item) for a repeated (kind, target).
  Collection add_collection_item(const Actor& actor, const CollectionId& id, CollectionItem item);
  Collection remove_collection_item(const Actor& actor, const CollectionId& id, const CollectionItem& item);
  void delete_collection(const Actor& actor, const CollectionId& id);
  std::optional<Collection> find_collection(const CollectionId& id) const;
  std::vector<Collection> collections() const;
  /// Back-references: collections listing the entry.
  std::vector<CollectionId> collections_containing(EntryId id) const;

  // -- assets --------------------------------------------------------------

  Asset create_asset(const Actor& actor, Asset asset);
  Asset get_asset(const Actor& actor, const AssetId& id) const;
  void delete_asset(const Actor& actor, const AssetId& id);

  // -- notifications -------------------------------------------------------

  /// A repeated subscription is a no-op.
  void subscribe(const Actor& actor, EntryId id);
  void unsubscribe(const Actor& actor, EntryId id);
  /// Events of subscribed, still viewable entries, newest first.
  std::vector<NotificationEvent> notifications(const Actor& actor) const;
  std::vector<NotificationEvent> events() const;

 private:
  struct Credential {
    std::string salt;
    std::string hash;
  };
  struct TokenRecord {
    UserId user_id;
    Timestamp expires_at{};
  };

  void load();
  void ensure_default_space();
  std::mutex& entry_mutex(EntryId id);

  // Callers hold state_mutex_ (shared or unique).
  const WorkflowEntry& entry_ref(EntryId id) const;
  ActorContext context_locked(const Actor& actor) const;
  ProtectedResource resource_locked(const AccessPolicy& policy, const std::vector<TeamId>& teams,
                                    const UserId& submitter) const;
  AccessDecision decide_locked(const Actor& actor, const WorkflowEntry& entry, Right right) const;
  void require_locked(const Actor& actor, const WorkflowEntry& entry, Right right) const;
  CreditDirectory directory_locked() const;
  SearchDoc search_doc_locked(const WorkflowEntry& entry) const;
  bool creates_cycle_locked(EntryId id, const std::vector<EntryId>& attributions) const;
  CrateOptions crate_options_locked() const;

  // Callers hold state_mutex_ exclusively.
  void persist_entry(const WorkflowEntry& entry);
  void persist_metrics(const WorkflowEntry& entry);
  void persist_user(const User& user);
  void persist_team(const Team& team);
  void emit(EntryId id, EventKind kind, nlohmann::json payload);

  struct Acquired;
  Acquired acquire(const RegistrationSource& source) const;
  WorkflowVersion make_version(const Acquired& acquired, const ClassId& workflow_class, int number,
                               std::vector<std::string>& notes) const;
  WorkflowVersion commit_version(const Actor& actor, EntryId id, const Acquired& acquired,
                                 const std::string& revision_comment);
  Draft prefill(const Actor& actor, const Acquired& acquired, const MetadataPatch& overrides) const;
  void apply_patch(WorkflowEntry& entry, const MetadataPatch& patch) const;
  ValidationReport validate_locked(const WorkflowEntry& entry) const;
  std::string unique_id(std::string_view wanted, std::string_view name, std::string_view prefix,
                        const std::function<bool(const std::string&)>& taken) const;
  void persist_counters();
  std::string hash_password(const std::string& password, const std::string& salt) const;

  RegistryOptions options_;
  mutable std::shared_mutex state_mutex_;
  std::mutex entry_locks_mutex_;
  std::map<EntryId, std::unique_ptr<std::mutex>> entry_locks_;

  std::map<EntryId, WorkflowEntry> entries_;
  std::map<UserId, User> users_;
  std::map<UserId, Credential> credentials_;
  std::map<std::string, TokenRecord> tokens_;
  std::map<TeamId, Team> teams_;
  std::map<SpaceId, Space> spaces_;
  std::map<OrganisationId, Organisation> organisations_;
  std::map<CollectionId, Collection> collections_;
  std::map<AssetId, Asset> assets_;
  std::vector<Subscription> subscriptions_;
  std::vector<NotificationEvent> events_;
  SpaceId default_space_id_;
  EntryId next_entry_id_ = 1;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_local_id_ = 1;
};

}  // namespace flowhub
