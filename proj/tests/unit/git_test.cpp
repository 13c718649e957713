#include <gtest/gtest.h>

#include "flowhub/git_import.hpp"
#include "flowhub/registry.hpp"
#include "support.hpp"

using namespace flowhub;
using flowhub::testing::GitRepo;
using flowhub::testing::World;
using flowhub::testing::fixture;

namespace {

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io_error;
}

FileTree tree(std::initializer_list<std::pair<const char*, const char*>> files) {
  FileTree out;
  for (const auto& [path, content] : files) out[path] = FileBlob{content, guess_media_type(path)};
  return out;
}

}  // namespace

TEST(GitImport, TwoCommitsGiveTwoLogEntries) {
  GitRepo repo;
  repo.write("main.nf", "workflow { }\n");
  const std::string first = repo.commit("first");
  repo.write("README.md", "# Demo\n");
  const std::string second = repo.commit("second");
  const RepositorySnapshot snap = import_repository(repo.remote());
  ASSERT_EQ(snap.commit_log.size(), 2u);
  EXPECT_EQ(snap.commit_log[0].commit_id, second);
  EXPECT_EQ(snap.commit_log[1].commit_id, first);
  EXPECT_EQ(snap.commit_log[0].message, "second");
  EXPECT_EQ(snap.commit_id, second);
  EXPECT_EQ(snap.ref, "main");
  EXPECT_EQ(snap.files.size(), 2u);
  EXPECT_EQ(snap.files.at("README.md").bytes, "# Demo\n");
}

TEST(GitImport, TagRefResolvesToItsCommit) {
  GitRepo repo;
  repo.write("main.nf", "workflow { a }\n");
  const std::string tagged = repo.commit("release");
  repo.tag("v1.0", true);
  repo.write("main.nf", "workflow { b }\n");
  repo.commit("later");
  const RepositorySnapshot snap = import_repository(repo.remote(), std::string("v1.0"));
  EXPECT_EQ(snap.commit_id, tagged);
  EXPECT_EQ(snap.files.at("main.nf").bytes, "workflow { a }\n");
}

TEST(GitImport, BadRefAndBadRemote) {
  GitRepo repo;
  repo.write("a.cwl", "x");
  repo.commit("one");
  EXPECT_EQ(error_of([&] { import_repository(repo.remote(), std::string("no-such-branch")); }),
            ErrorCode::ref_not_found);
  EXPECT_EQ(error_of([&] { import_repository(repo.remote(), std::string("--upload-pack=evil")); }),
            ErrorCode::ref_not_found);
  EXPECT_EQ(error_of([&] { import_repository("/nonexistent/repo"); }), ErrorCode::fetch_error);
  EXPECT_EQ(error_of([&] { import_repository("git@github.com:x/y.git"); }), ErrorCode::fetch_error);
  EXPECT_FALSE(is_supported_remote("ssh://host/repo"));
  EXPECT_TRUE(is_supported_remote("https://github.com/x/y"));
}

TEST(GitImport, SizeLimits) {
  GitRepo repo;
  repo.write("a.txt", std::string(5000, 'x'));
  repo.write("b.txt", "y");
  repo.commit("big");
  GitImportOptions small;
  small.max_bytes = 1000;
  EXPECT_EQ(error_of([&] { import_repository(repo.remote(), std::nullopt, small); }), ErrorCode::size_limit);
  GitImportOptions few;
  few.max_files = 1;
  EXPECT_EQ(error_of([&] { import_repository(repo.remote(), std::nullopt, few); }), ErrorCode::size_limit);
}

TEST(GitImport, ImportIsByteExact) {
  GitRepo repo;
  std::string binary;
  for (int i = 0; i < 256; ++i) binary += static_cast<char>(i);
  repo.write("data/blob.bin", binary);
  repo.write("empty.txt", "");
  repo.commit("binary");
  const RepositorySnapshot snap = import_repository(repo.remote());
  EXPECT_EQ(snap.files.at("data/blob.bin").bytes, binary);
  EXPECT_EQ(snap.files.at("empty.txt").bytes, "");
}

TEST(Detection, NextflowUnderWorkflowDirectory) {
  const auto classes = ClassRegistry::seeded();
  const auto found = detect_workflow_files(tree({{"workflow/main.nf", "workflow { }\n"}, {"README.md", "# x"}}), classes);
  EXPECT_EQ(found, (std::vector<CandidateFile>{{"workflow/main.nf", "nextflow"}}));
  EXPECT_TRUE(detect_workflow_files({}, classes).empty());
}

TEST(Detection, ShallowerFilesRankFirst) {
  const auto classes = ClassRegistry::seeded();
  const char* cwl = "cwlVersion: v1.2\nclass: Workflow\n";
  const auto found = detect_workflow_files(tree({{"deep/b.cwl", cwl}, {"a.cwl", cwl}}), classes);
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].path, "a.cwl");
  EXPECT_EQ(found[1].path, "deep/b.cwl");
}

TEST(Detection, Readme) {
  EXPECT_EQ(extract_readme(tree({{"README.md", "root"}, {"docs/README.md", "docs"}})), std::optional<std::string>("root"));
  EXPECT_EQ(extract_readme(tree({{"docs/README.md", "docs"}, {"main.nf", ""}})), std::optional<std::string>("docs"));
  EXPECT_EQ(extract_readme(tree({{"main.nf", ""}})), std::nullopt);
}

TEST(Releases, OrderedByCommitTime) {
  GitRepo repo;
  repo.write("a", "1");
  repo.commit("one");
  repo.tag("v10");
  repo.write("a", "2");
  repo.commit("two");
  repo.tag("v2", true);
  const auto releases = enumerate_releases(import_repository(repo.remote()));
  ASSERT_EQ(releases.size(), 2u);
  EXPECT_EQ(releases[0].tag, "v10");
  EXPECT_EQ(releases[1].tag, "v2");
  EXPECT_LT(releases[0].timestamp, releases[1].timestamp);
}

TEST(Releases, UntaggedAndTies) {
  GitRepo repo;
  repo.write("a", "1");
  repo.commit("one");
  EXPECT_TRUE(enumerate_releases(import_repository(repo.remote())).empty());
  repo.tag("zeta");
  repo.tag("alpha");
  const auto releases = enumerate_releases(import_repository(repo.remote()));
  ASSERT_EQ(releases.size(), 2u);
  EXPECT_EQ(releases[0].tag, "alpha");
  EXPECT_EQ(releases[1].tag, "zeta");
}

TEST(GitRegistration, CitationCffPrefillsCreators) {
  GitRepo repo;
  repo.copy_tree(fixture("repos/cff-workflow"));
  repo.commit("import");
  World w;
  MetadataPatch teams;
  teams.team_ids = std::vector<TeamId>{w.lab};
  const WorkflowEntry e = w.registry->register_workflow(w.alice, GitRequest{repo.remote(), {}, {}}, teams).entry;
  EXPECT_EQ(e.title, "Variant annotation workflow");
  ASSERT_EQ(e.creators.size(), 3u);
  EXPECT_EQ(e.creators[0].orcid, std::optional<std::string>("0000-0002-1825-0097"));
  EXPECT_EQ(e.creators[1].orcid, std::optional<std::string>("0000-0001-5109-3700"));
  EXPECT_EQ(e.creators[2].orcid, std::nullopt);
  EXPECT_EQ(e.license, "Apache-2.0");
  EXPECT_EQ(e.workflow_class, "cwl");
  EXPECT_EQ(e.versions[0].main_workflow_path, "annotate.cwl");
  EXPECT_NE(e.description.find("VEP"), std::string::npos);
  const auto& source = std::get<GitImportSource>(e.versions[0].source);
  EXPECT_EQ(source.ref, "main");
  EXPECT_EQ(source.commit_id.size(), 40u);
}

TEST(GitRegistration, SyncAddsOneVersionPerNewTagInOrder) {
  GitRepo repo;
  repo.write("main.nf", "workflow { one }\n");
  repo.write("nextflow.config", "manifest {\n  name = 'demo'\n}\n");
  repo.commit("one");
  repo.tag("v1.0");
  repo.write("main.nf", "workflow { two }\n");
  repo.commit("two");
  repo.tag("v2.0");
  repo.write("main.nf", "workflow { three }\n");
  repo.commit("three");

  World w;
  MetadataPatch p;
  p.team_ids = std::vector<TeamId>{w.lab};
  p.title = "Synced";
  const EntryId id = w.registry->register_workflow(w.alice, GitRequest{repo.remote(), {}, {}}, p).entry.id;
  const auto created = w.registry->sync_git(w.alice, id);
  ASSERT_EQ(created.size(), 2u);
  EXPECT_EQ(created[0].version, 2);
  EXPECT_EQ(std::get<GitImportSource>(created[0].source).ref, "v1.0");
  EXPECT_EQ(created[0].files.at("main.nf").bytes, "workflow { one }\n");
  EXPECT_EQ(created[1].version, 3);
  EXPECT_EQ(std::get<GitImportSource>(created[1].source).ref, "v2.0");
  EXPECT_TRUE(w.registry->sync_git(w.alice, id).empty());

  EXPECT_EQ(error_of([&] { w.registry->put_file(w.alice, id, 2, "x", {"y", "text/plain"}); }), ErrorCode::conflict);
}

TEST(GitRegistration, VarlociraptorRepository) {
  GitRepo repo;
  repo.copy_tree(fixture("repos/dna-seq-varlociraptor"));
  repo.commit("import");
  World w;
  MetadataPatch p;
  p.team_ids = std::vector<TeamId>{w.lab};
  p.title = "dna-seq-varlociraptor";
  const WorkflowEntry e = w.registry->register_workflow(w.alice, GitRequest{repo.remote(), {}, {}}, p).entry;
  EXPECT_EQ(e.workflow_class, "snakemake");
  EXPECT_EQ(e.versions[0].main_workflow_path, "workflow/Snakefile");
  ASSERT_TRUE(e.versions[0].structure.has_value());
  EXPECT_EQ(e.versions[0].structure->steps.size(), 10u);
}
