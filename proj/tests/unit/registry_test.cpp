#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "flowhub/registry.hpp"
#include "support.hpp"

using namespace flowhub;
using flowhub::testing::World;
using flowhub::testing::galaxy_upload;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io_error;
}

std::size_t count_events(const Registry& r, EntryId id, EventKind kind) {
  std::size_t n = 0;
  for (const auto& e : r.events()) n += e.entry_id == id && e.kind == kind;
  return n;
}

}  // namespace

TEST(Registration, GalaxyUploadIsParsed) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  const WorkflowEntry e = w.registry->get_workflow(w.alice, id);
  EXPECT_EQ(e.workflow_class, "galaxy");
  ASSERT_EQ(e.versions.size(), 1u);
  EXPECT_EQ(e.versions[0].version, 1);
  ASSERT_TRUE(e.versions[0].structure.has_value());
  EXPECT_EQ(e.versions[0].structure->steps.size(), 2u);
  EXPECT_EQ(e.submitter, "alice");
  ASSERT_EQ(e.tool_refs.size(), 1u);
  EXPECT_EQ(e.tool_refs[0].biotools_id, std::optional<std::string>("fastqc"));
}

TEST(Registration, SecondUploadIsVersionTwo) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  const WorkflowVersion v2 = w.registry->add_version(w.alice, id, UploadRequest{galaxy_upload("Demo v2"), "", {}}, "update");
  EXPECT_EQ(v2.version, 2);
  EXPECT_EQ(v2.revision_comment, "update");
  EXPECT_EQ(w.registry->get_workflow(w.alice, id).versions.size(), 2u);
}

TEST(Registration, DryRunPersistsNothing) {
  World w;
  MetadataPatch p;
  p.team_ids = std::vector<TeamId>{w.lab};
  const Draft d = w.registry->prepare_registration(w.alice, UploadRequest{galaxy_upload("Draft"), "", {}}, p);
  EXPECT_EQ(d.entry.title, "Draft");
  EXPECT_FALSE(d.candidates.empty());
  EXPECT_TRUE(w.registry->visible_workflows(w.alice).empty());
}

TEST(Registration, ValidationErrorsReject) {
  World w;
  MetadataPatch p;
  p.title = "";
  p.team_ids = std::vector<TeamId>{w.lab};
  try {
    w.registry->register_workflow(w.alice, UploadRequest{{{"notes.txt", {"", "text/plain"}}}, "", {}}, p);
    FAIL();
  } catch (const RejectedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::registration_rejected);
    EXPECT_TRUE(e.report().has_error("MissingTitle"));
  }
}

TEST(Registration, NonMembersCannotRegisterForATeam) {
  World w;
  MetadataPatch p;
  p.team_ids = std::vector<TeamId>{w.lab};
  EXPECT_EQ(code_of([&] { w.registry->register_workflow(w.bob, UploadRequest{galaxy_upload(), "", {}}, p); }),
            ErrorCode::access_denied);
  EXPECT_EQ(code_of([&] {
              w.registry->register_workflow(Actor::anonymous(), UploadRequest{galaxy_upload(), "", {}}, p);
            }),
            ErrorCode::unauthenticated);
}

TEST(Registration, CrateImportReproducesSourceMetadata) {
  World w;
  MetadataPatch p;
  p.title = "Source";
  p.description = "Calls variants";
  p.license = "Apache-2.0";
  p.tags = std::vector<std::string>{"genomics", "qc"};
  p.creators = std::vector<Creator>{{"Ada Lovelace", "0000-0002-1825-0097", "Analytical Engines"}};
  p.edam_topics = std::vector<std::string>{"topic_0199"};
  p.maturity = std::string(kMaturityStable);
  const EntryId source = w.upload(galaxy_upload("Source"), p);
  const WorkflowCrate crate = w.registry->export_crate(w.alice, source);

  MetadataPatch team;
  team.team_ids = std::vector<TeamId>{w.lab};
  const WorkflowEntry copy = w.registry->register_workflow(w.alice, CrateRequest{crate.archive}, team).entry;
  const WorkflowEntry orig = w.registry->get_workflow(w.alice, source);
  EXPECT_EQ(copy.title, orig.title);
  EXPECT_EQ(copy.description, orig.description);
  EXPECT_EQ(copy.license, orig.license);
  EXPECT_EQ(copy.tags, orig.tags);
  EXPECT_EQ(copy.creators, orig.creators);
  EXPECT_EQ(copy.edam_topics, orig.edam_topics);
  EXPECT_EQ(copy.maturity, orig.maturity);
  EXPECT_EQ(copy.workflow_class, orig.workflow_class);
  EXPECT_EQ(copy.tool_refs, orig.tool_refs);
  EXPECT_EQ(copy.versions[0].files, orig.versions[0].files);
  EXPECT_EQ(source_kind(copy.versions[0].source), "crate");
}

TEST(Versions, AddVersionOnFrozenHeadIsAllowed) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  w.registry->freeze_version(w.alice, id, 1);
  EXPECT_EQ(w.registry->add_version(w.alice, id, UploadRequest{galaxy_upload(), "", {}}).version, 2);
}

TEST(Versions, FrozenVersionRejectsFileChanges) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  w.registry->put_file(w.alice, id, 1, "README.md", {"hello", "text/markdown"});
  w.registry->freeze_version(w.alice, id, 1);
  EXPECT_EQ(code_of([&] { w.registry->put_file(w.alice, id, 1, "workflow.ga", {"{}", "application/json"}); }),
            ErrorCode::frozen_version);
  EXPECT_EQ(code_of([&] { w.registry->remove_file(w.alice, id, 1, "README.md"); }), ErrorCode::frozen_version);
  EXPECT_EQ(w.registry->get_workflow(w.alice, id).versions[0].files.count("README.md"), 1u);
}

TEST(Versions, FreezingTwiceEmitsNothingNew) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  const std::size_t before = w.registry->events().size();
  w.registry->freeze_version(w.alice, id, 1);
  w.registry->freeze_version(w.alice, id, 1);
  EXPECT_EQ(w.registry->events().size(), before);
  EXPECT_TRUE(w.registry->get_workflow(w.alice, id).versions[0].frozen);
}

TEST(Versions, UnknownVersion) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  EXPECT_EQ(code_of([&] { w.registry->freeze_version(w.alice, id, 9); }), ErrorCode::unknown_version);
}

TEST(Metadata, MaturityChangePersistsAndEmits) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  MetadataPatch p;
  p.maturity = std::string(kMaturityStable);
  w.registry->update_metadata(w.alice, id, p);
  EXPECT_EQ(w.registry->get_workflow(w.alice, id).maturity, kMaturityStable);
  EXPECT_EQ(count_events(*w.registry, id, EventKind::metadata_changed), 1u);

  RegistryOptions reopened;
  reopened.store = w.store;
  reopened.mint_client = w.mint;
  reopened.pbkdf2_iterations = 1000;
  Registry again(std::move(reopened));
  EXPECT_EQ(again.get_workflow(w.alice, id).maturity, kMaturityStable);
  EXPECT_EQ(count_events(again, id, EventKind::metadata_changed), 1u);
}

TEST(Metadata, ClearingTitleIsRejected) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  MetadataPatch p;
  p.title = "";
  EXPECT_EQ(code_of([&] { w.registry->update_metadata(w.alice, id, p); }), ErrorCode::validation_failed);
  EXPECT_EQ(w.registry->get_workflow(w.alice, id).title, "Demo");
}

TEST(Metadata, AttributionCycleIsRejected) {
  World w;
  const EntryId a = w.upload_galaxy("A");
  const EntryId b = w.upload_galaxy("B");
  MetadataPatch ab;
  ab.attributions = std::vector<EntryId>{b};
  w.registry->update_metadata(w.alice, a, ab);
  MetadataPatch ba;
  ba.attributions = std::vector<EntryId>{a};
  EXPECT_EQ(code_of([&] { w.registry->update_metadata(w.alice, b, ba); }), ErrorCode::attribution_cycle);
  MetadataPatch self;
  self.attributions = std::vector<EntryId>{a};
  EXPECT_NE(code_of([&] { w.registry->update_metadata(w.alice, a, self); }), ErrorCode::io_error);
}

TEST(Metadata, OnlyEditorsMayEdit) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  MetadataPatch p;
  p.description = "x";
  EXPECT_EQ(code_of([&] { w.registry->update_metadata(w.bob, id, p); }), ErrorCode::access_denied);
}

TEST(Doi, MintOnPublicVersionFreezes) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  const DoiRecord r = w.registry->mint_doi(w.alice, id, 1);
  EXPECT_EQ(r.doi, "10.77777/wfhub." + std::to_string(id) + ".1");
  EXPECT_TRUE(w.registry->get_workflow(w.alice, id).versions[0].frozen);
  EXPECT_EQ(w.mint->calls().size(), 1u);
  EXPECT_EQ(w.mint->calls()[0].payload["data"]["attributes"]["doi"], r.doi);
}

TEST(Doi, MintingTwiceReturnsSameRecord) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  const DoiRecord first = w.registry->mint_doi(w.alice, id, 1);
  w.clock.advance(std::chrono::hours(1));
  EXPECT_EQ(w.registry->mint_doi(w.alice, id, 1), first);
  EXPECT_EQ(w.mint->calls().size(), 1u);
  EXPECT_EQ(count_events(*w.registry, id, EventKind::doi_minted), 1u);
}

TEST(Doi, PrivateEntryNeedsVisibility) {
  World w;
  const EntryId id = w.upload_galaxy("Demo", Visibility::private_access);
  EXPECT_EQ(code_of([&] { w.registry->mint_doi(w.alice, id, 1); }), ErrorCode::visibility_required);
  EXPECT_TRUE(w.mint->calls().empty());
}

TEST(Doi, AgencyFailureLeavesVersionUnfrozen) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  w.mint->fail_next();
  EXPECT_EQ(code_of([&] { w.registry->mint_doi(w.alice, id, 1); }), ErrorCode::mint_failed);
  const WorkflowEntry e = w.registry->get_workflow(w.alice, id);
  EXPECT_FALSE(e.versions[0].frozen);
  EXPECT_TRUE(e.doi_records.empty());
}

TEST(Doi, EntriesWithDoisCannotBeDeleted) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  w.registry->mint_doi(w.alice, id, 1);
  EXPECT_EQ(code_of([&] { w.registry->delete_workflow(w.alice, id); }), ErrorCode::conflict);
}

TEST(Search, EmptyAnonymousQueryReturnsPublicEntries) {
  World w;
  w.upload_galaxy("Public one");
  w.upload_galaxy("Public two");
  w.upload_galaxy("Hidden", Visibility::private_access);
  w.upload_galaxy("Members", Visibility::registered);
  w.upload_galaxy("Later", Visibility::embargoed);
  const SearchPage page = w.registry->search(Actor::anonymous(), SearchQuery{});
  EXPECT_EQ(page.total, 2u);
  EXPECT_EQ(w.registry->search(w.bob, SearchQuery{}).total, 3u);
  EXPECT_EQ(w.registry->search(w.alice, SearchQuery{}).total, 5u);
}

TEST(Search, ClassFacetAndText) {
  World w;
  for (int i = 0; i < 20; ++i) w.upload_galaxy(i % 4 ? "Galaxy " + std::to_string(i) : "COVID galaxy " + std::to_string(i));
  for (int i = 0; i < 10; ++i) {
    MetadataPatch p;
    p.title = i % 5 ? "CWL " + std::to_string(i) : "covid CWL " + std::to_string(i);
    p.license = "MIT";
    w.upload({{"workflow.cwl", {"cwlVersion: v1.2\nclass: Workflow\ninputs: []\noutputs: []\nsteps: []\n", ""}}}, p);
  }
  SearchQuery all;
  const SearchPage everything = w.registry->search(Actor::anonymous(), all);
  EXPECT_EQ(everything.total, 30u);
  std::uint64_t sum = 0;
  for (const auto& [cls, n] : everything.facet_counts.at("class")) sum += n;
  EXPECT_EQ(sum, 30u);
  EXPECT_EQ(everything.facet_counts.at("class").at("cwl"), 10u);

  SearchQuery cwl;
  cwl.facet_filters["class"] = {"cwl"};
  EXPECT_EQ(w.registry->search(Actor::anonymous(), cwl).total, 10u);

  SearchQuery covid;
  covid.text = "covid";
  const SearchPage hits = w.registry->search(Actor::anonymous(), covid);
  EXPECT_EQ(hits.total, 7u);
  for (const auto& e : hits.hits) EXPECT_NE(text::to_lower(e.title).find("covid"), std::string::npos);
}

TEST(Metrics, ViewsAndDownloads) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  const Metrics m = w.registry->record_activity(id, ActivityKind::view);
  EXPECT_EQ(m.views, 1u);
  EXPECT_EQ(m.downloads, 0u);

  std::vector<std::thread> threads;
  for (int i = 0; i < 100; ++i) threads.emplace_back([&] { w.registry->record_activity(id, ActivityKind::download); });
  for (auto& t : threads) t.join();
  const WorkflowEntry e = w.registry->get_workflow(w.alice, id);
  EXPECT_EQ(e.metrics.downloads, 100u);
  EXPECT_EQ(e.metrics.views, 1u);
}

TEST(Concurrency, ParallelAddVersionHasNoGaps) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  std::vector<std::thread> threads;
  std::vector<int> numbers(16);
  for (int i = 0; i < 16; ++i)
    threads.emplace_back([&, i] {
      numbers[i] = w.registry->add_version(w.alice, id, UploadRequest{galaxy_upload("v" + std::to_string(i)), "", {}}).version;
    });
  for (auto& t : threads) t.join();
  std::sort(numbers.begin(), numbers.end());
  for (int i = 0; i < 16; ++i) EXPECT_EQ(numbers[i], i + 2);
  const WorkflowEntry e = w.registry->get_workflow(w.alice, id);
  ASSERT_EQ(e.versions.size(), 17u);
  for (std::size_t i = 0; i < e.versions.size(); ++i) EXPECT_EQ(e.versions[i].version, static_cast<int>(i) + 1);
}

TEST(Collections, ItemsDuplicatesAndBackReferences) {
  World w;
  const EntryId a = w.upload_galaxy("A");
  const EntryId b = w.upload_galaxy("B");
  Collection c;
  c.title = "Favourites";
  c.curator_team_ids = {w.lab};
  const CollectionId cid = w.registry->create_collection(w.alice, c).id;
  w.registry->add_collection_item(w.alice, cid, {AssetKind::workflow, std::to_string(a)});
  const Collection two = w.registry->add_collection_item(w.alice, cid, {AssetKind::workflow, std::to_string(b)});
  EXPECT_EQ(two.items.size(), 2u);
  EXPECT_EQ(code_of([&] { w.registry->add_collection_item(w.alice, cid, {AssetKind::workflow, std::to_string(a)}); }),
            ErrorCode::duplicate_item);
  EXPECT_EQ(w.registry->collections_containing(a), std::vector<CollectionId>{cid});
  w.registry->delete_collection(w.alice, cid);
  EXPECT_TRUE(w.registry->collections_containing(a).empty());
  EXPECT_FALSE(w.registry->find_collection(cid).has_value());
}

TEST(Notifications, SubscribeThenNewVersion) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  w.registry->subscribe(w.bob, id);
  w.registry->subscribe(w.bob, id);
  w.registry->add_version(w.alice, id, UploadRequest{galaxy_upload(), "", {}});
  const auto events = w.registry->notifications(w.bob);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, EventKind::new_version);
  EXPECT_EQ(events[0].payload["version"], 2);
  EXPECT_TRUE(w.registry->notifications(w.admin).empty());
}

TEST(Notifications, NewestFirst) {
  World w;
  const EntryId id = w.upload_galaxy("Demo");
  w.registry->subscribe(w.bob, id);
  w.registry->add_version(w.alice, id, UploadRequest{galaxy_upload(), "", {}});
  MetadataPatch p;
  p.description = "now documented";
  w.registry->update_metadata(w.alice, id, p);
  w.registry->mint_doi(w.alice, id, 2);
  const auto events = w.registry->notifications(w.bob);
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0].kind, EventKind::doi_minted);
  EXPECT_EQ(events[1].kind, EventKind::metadata_changed);
  EXPECT_EQ(events[2].kind, EventKind::new_version);
  EXPECT_GT(events[0].seq, events[1].seq);
  EXPECT_GT(events[1].seq, events[2].seq);
  w.registry->unsubscribe(w.bob, id);
  EXPECT_TRUE(w.registry->notifications(w.bob).empty());
}

TEST(Spaces, TeamMembershipIsRecorded) {
  World w;
  Team t;
  t.name = "Bob's team";
  t.space_id = w.registry->default_space_id();
  const Team team = w.registry->create_team(w.bob, t);
  ASSERT_NE(team.member("bob"), nullptr);
  EXPECT_EQ(team.member("bob")->role, Role::admin);
  const User bob = *w.registry->find_user("bob");
  ASSERT_NE(bob.membership(team.id), nullptr);
  w.registry->add_member(w.bob, team.id, "alice");
  EXPECT_NE(w.registry->find_user("alice")->membership(team.id), nullptr);
}

TEST(Spaces, DefaultSpaceCannotBeDeleted) {
  World w;
  EXPECT_EQ(code_of([&] { w.registry->delete_space(w.admin, w.registry->default_space_id()); }), ErrorCode::forbidden);
}

TEST(Spaces, TeamWithoutSpaceIsRejected) {
  World w;
  Team t;
  t.name = "Floating";
  EXPECT_EQ(code_of([&] { w.registry->create_team(w.alice, t); }), ErrorCode::invalid_argument);
}

TEST(Spaces, NonDefaultSpacesNeedTheirAdmin) {
  World w;
  Space s;
  s.name = "Consortium";
  const Space space = w.registry->create_space(w.admin, s);
  Team t;
  t.name = "Partners";
  t.space_id = space.id;
  EXPECT_EQ(code_of([&] { w.registry->create_team(w.bob, t); }), ErrorCode::access_denied);
  EXPECT_EQ(code_of([&] { w.registry->create_space(w.bob, s); }), ErrorCode::access_denied);
  w.registry->create_team(w.admin, t);
  EXPECT_EQ(code_of([&] { w.registry->delete_space(w.admin, space.id); }), ErrorCode::conflict);
}

TEST(Identity, TokensAuthenticate) {
  World w;
  const std::string token = w.registry->issue_token("alice", "alice-password");
  EXPECT_EQ(w.registry->authenticate(token), std::optional<UserId>("alice"));
  EXPECT_EQ(w.registry->authenticate("bogus"), std::nullopt);
  EXPECT_EQ(code_of([&] { w.registry->issue_token("alice", "wrong"); }), ErrorCode::unauthenticated);
  EXPECT_TRUE(w.registry->find_user("admin")->registry_admin);
  EXPECT_FALSE(w.registry->find_user("bob")->registry_admin);
}

TEST(Access, RegistryResolvesRelations) {
  World w;
  const EntryId id = w.upload_galaxy("Secret", Visibility::private_access);
  EXPECT_FALSE(w.registry->decide(Actor::anonymous(), id, Right::view));
  EXPECT_FALSE(w.registry->decide(w.bob, id, Right::view));
  EXPECT_TRUE(w.registry->decide(w.alice, id, Right::manage));
  EXPECT_TRUE(w.registry->decide(w.admin, id, Right::manage));
  EXPECT_EQ(code_of([&] { w.registry->get_workflow(w.bob, id); }), ErrorCode::access_denied);
  EXPECT_EQ(code_of([&] { w.registry->get_workflow(w.bob, 999); }), ErrorCode::not_found);
}
