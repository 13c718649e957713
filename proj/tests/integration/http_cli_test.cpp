#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "flowhub/http.hpp"
#include "support.hpp"

using namespace flowhub;
using nlohmann::json;
using flowhub::testing::World;
using flowhub::testing::fixture;
using flowhub::testing::parse_link_header;

namespace fs = std::filesystem;

namespace {

class LiveServer {
 public:
  LiveServer() : api_(*world.registry), server_(api_, 16u * 1024 * 1024) {
    port = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.run(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

  World world;
  int port = 0;

 private:
  ApiService api_;
  HttpServer server_;
  std::thread thread_;
};

ProcessResult cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{FLOWHUB_CLI_PATH};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions options;
  options.env = {{"FLOWHUB_CONFIG", ""}, {"FLOWHUB_TOKEN", ""}};
  return run_process(argv, options);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  for (auto& l : text::split(s, '\n'))
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

TEST(Http, LandingPageOverTheWire) {
  LiveServer s;
  MetadataPatch p;
  p.title = "Wire";
  p.license = "MIT";
  p.creators = std::vector<Creator>{{"Josiah Carberry", "0000-0002-1825-0097", std::nullopt}};
  const EntryId id = s.world.upload(flowhub::testing::galaxy_upload("Wire"), p);

  HttpClient client(s.url());
  ApiRequest req = ApiRequest::make("GET", "/workflows/" + std::to_string(id));
  req.headers["accept"] = "text/html";
  const ApiResponse r = client.send(req);
  ASSERT_EQ(r.status, 200);
  const auto links = parse_link_header(r.header("Link"));
  std::set<std::string> rels;
  for (const auto& l : links) rels.insert(l.params.at("rel"));
  for (const char* rel : {"cite-as", "describedby", "item", "author"}) EXPECT_TRUE(rels.count(rel)) << rel;

  const ApiResponse descriptor = client.send(
      ApiRequest::make("GET", "/ga4gh/trs/v2/tools/%23workflow%2F" + std::to_string(id) + "/versions/1/PLAIN_GALAXY/descriptor"));
  EXPECT_EQ(descriptor.body, s.world.registry->get_workflow(s.world.alice, id).latest().files.at("workflow.ga").bytes);
}

TEST(Http, AuthenticatedPostAndErrors) {
  LiveServer s;
  const std::string token = s.world.registry->issue_token("alice", "alice-password");
  HttpClient client(s.url(), token);
  json files = json::object();
  for (const auto& [path, blob] : flowhub::testing::galaxy_upload("Remote")) files[path] = blob.bytes;
  json body{{"source", {{"kind", "upload"}, {"files", files}}}, {"metadata", {{"team_ids", {s.world.lab}}}}};
  ApiRequest post = ApiRequest::make("POST", "/workflows", body.dump());
  const ApiResponse created = client.send(post);
  ASSERT_EQ(created.status, 201) << created.body;

  HttpClient anonymous(s.url());
  EXPECT_EQ(anonymous.send(post).status, 401);
  EXPECT_EQ(anonymous.send(ApiRequest::make("GET", "/workflows/77")).status, 404);
  HttpClient nowhere("http://127.0.0.1:1", "", std::chrono::seconds(2));
  EXPECT_THROW(nowhere.send(ApiRequest::make("GET", "/")), TransportError);
}

TEST(Http, RemoteCliSearchMatchesApi) {
  LiveServer s;
  s.world.upload_galaxy("remote covid");
  s.world.upload_galaxy("remote other");
  const ProcessResult r = cli({"--server", s.url(), "--json", "search", "covid"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json hits = json::parse(r.out)["hits"];
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0]["title"], "remote covid");
  EXPECT_EQ(cli({"--server", "http://127.0.0.1:1", "search"}).exit_code, 5);
}

class CliStore : public ::testing::Test {
 protected:
  CliStore() : dir_("flowhub-cli-test"), store_((dir_.path() / "store").string()) {}

  ProcessResult run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--store", store_});
    return cli(args);
  }

  std::string setup_team() {
    EXPECT_EQ(run({"admin", "create-user", "alice", "--password", "alice-pw"}).exit_code, 0);
    const ProcessResult team = run({"admin", "create-team", "Lab", "--admin", "alice"});
    EXPECT_EQ(team.exit_code, 0) << team.err;
    return std::string(text::trim(team.out.substr(team.out.rfind(' ') + 1)));
  }

  std::string register_dir(const fs::path& dir, const std::string& team, const std::string& title,
                           std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"--as", "alice", "register", "--upload", dir.string(), "--team", team, "--title", title};
    args.insert(args.end(), extra.begin(), extra.end());
    const ProcessResult r = run(args);
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return r.out;
  }

  /// The same request answered by an in-process ApiService over the CLI's store.
  ApiResponse direct(const ApiRequest& req) {
    RegistryOptions options;
    options.config.store_dir = store_;
    Registry registry(std::move(options));
    ApiService api(registry);
    const Actor op = Actor::local_operator();
    return api.handle(req, &op);
  }

  TempDir dir_;
  std::string store_;
};

TEST_F(CliStore, RegisterPrintsIdAndWarnings) {
  const std::string team = setup_team();
  const std::string out = register_dir(fixture("classes/galaxy/rnaseq.ga"), team, "RNA-seq");
  const auto l = lines(out);
  ASSERT_FALSE(l.empty());
  EXPECT_EQ(l[0], "registered workflow 1: RNA-seq [galaxy]");
  EXPECT_NE(out.find("warning MissingLicense"), std::string::npos) << out;
  EXPECT_NE(out.find("warning MissingCreators"), std::string::npos) << out;
}

TEST_F(CliStore, ExportedCrateValidates) {
  const std::string team = setup_team();
  register_dir(fixture("classes/galaxy/rnaseq.ga"), team, "Exported", {"--license", "MIT"});
  const std::string crate = (dir_.path() / "out.crate.zip").string();
  const ProcessResult exp = run({"export-crate", "1", "-o", crate});
  ASSERT_EQ(exp.exit_code, 0) << exp.err;
  const ProcessResult val = cli({"validate-crate", crate});
  EXPECT_EQ(val.exit_code, 0) << val.err;
  EXPECT_NE(val.out.find(": valid"), std::string::npos) << val.out;
  ApiRequest req = ApiRequest::make("GET", "/workflows/1/ro_crate");
  EXPECT_EQ(direct(req).body, flowhub::testing::read_file(crate));
}

TEST_F(CliStore, SearchRowsEqualApiHits) {
  const std::string team = setup_team();
  register_dir(fixture("classes/galaxy/rnaseq.ga"), team, "Galaxy one");
  register_dir(fixture("classes/cwl/workflow.cwl"), team, "CWL one");
  register_dir(fixture("classes/galaxy/assembly.ga"), team, "Galaxy two");

  const ProcessResult human = run({"search", "--facet", "class=galaxy"});
  ASSERT_EQ(human.exit_code, 0) << human.err;
  ApiRequest req = ApiRequest::make("GET", "/search");
  req.query = {{"facet", "class=galaxy"}, {"page", "1"}, {"page_size", "20"}};
  const json api = direct(req).json_body();

  std::vector<std::string> expected{std::to_string(api["total"].get<int>()) + " result(s)"};
  for (const auto& h : api["hits"])
    expected.push_back("  " + h["id"].dump() + "\t" + h["workflow_class"].get<std::string>() + "\t" +
                       h["title"].get<std::string>());
  EXPECT_EQ(lines(human.out), expected);
  EXPECT_EQ(api["total"], 2);

  const ProcessResult raw = run({"--json", "search", "--facet", "class=galaxy"});
  EXPECT_EQ(json::parse(raw.out), api);
}

TEST_F(CliStore, MintDoiAndExitCodes) {
  const std::string team = setup_team();
  register_dir(fixture("classes/galaxy/rnaseq.ga"), team, "Minted");
  const ProcessResult minted = run({"mint-doi", "1", "1"});
  EXPECT_EQ(minted.exit_code, 0) << minted.err;
  EXPECT_EQ(minted.out, "doi: 10.77777/wfhub.1.1\n");
  EXPECT_EQ(run({"mint-doi", "9", "1"}).exit_code, 4);
  EXPECT_EQ(run({"--as", "nobody", "sync", "1"}).exit_code, 3);
  const std::string metadata = (dir_.path() / "untitled.json").string();
  std::ofstream(metadata) << R"({"title": ""})";
  const ProcessResult bad = run({"--as", "alice", "register", "--upload", fixture("classes/other/notes.txt").string(),
                                 "--team", team, "--metadata", metadata});
  EXPECT_EQ(bad.exit_code, 2);
  EXPECT_NE(bad.err.find("error (422)"), std::string::npos) << bad.err;
}

TEST_F(CliStore, GitRegistrationAndSync) {
  flowhub::testing::GitRepo repo;
  repo.copy_tree(fixture("repos/cff-workflow"));
  repo.commit("import");
  repo.tag("v1.0");
  const std::string team = setup_team();
  const ProcessResult r = run({"--as", "alice", "register", "--git", repo.remote(), "--team", team});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(lines(r.out)[0], "registered workflow 1: Variant annotation workflow [cwl]");
  const ProcessResult s = run({"sync", "1"});
  EXPECT_EQ(s.exit_code, 0) << s.err;
  EXPECT_EQ(lines(s.out)[0], "0 new version(s)");
}
