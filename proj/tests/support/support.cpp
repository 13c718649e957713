#include "support.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "flowhub/serialize.hpp"

namespace flowhub::testing {

namespace fs = std::filesystem;

fs::path fixture(std::string_view relative) { return fs::path(FLOWHUB_FIXTURES_DIR) / relative; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FileTree load_tree(const fs::path& dir) {
  FileTree tree;
  for (const auto& item : fs::recursive_directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const std::string rel = fs::relative(item.path(), dir).generic_string();
    tree.emplace(rel, FileBlob{read_file(item.path()), guess_media_type(rel)});
  }
  return tree;
}

Timestamp at(std::string_view iso8601) {
  auto t = timefmt::parse_iso8601(iso8601);
  if (!t) throw std::runtime_error("bad timestamp " + std::string(iso8601));
  return *t;
}

ManualClock::ManualClock(Timestamp start)
    : seconds_(std::make_shared<std::atomic<std::int64_t>>(timefmt::to_unix(start))) {}

Timestamp ManualClock::now() const { return timefmt::from_unix(seconds_->load()); }
void ManualClock::advance(std::chrono::seconds by) { seconds_->fetch_add(by.count()); }
void ManualClock::set(Timestamp t) { seconds_->store(timefmt::to_unix(t)); }
std::function<Timestamp()> ManualClock::fn() const {
  auto s = seconds_;
  return [s] { return timefmt::from_unix(s->load()); };
}

FileTree galaxy_upload(const std::string& name, const std::string& path) {
  nlohmann::json doc = {
      {"a_galaxy_workflow", "true"},
      {"format-version", "0.1"},
      {"name", name},
      {"annotation", "Runs FastQC on " + name},
      {"steps",
       {{"0", {{"id", 0}, {"type", "data_input"}, {"label", "reads"}, {"workflow_outputs", nlohmann::json::array()}}},
        {"1",
         {{"id", 1},
          {"type", "tool"},
          {"tool_id", "toolshed.g2.bx.psu.edu/repos/devteam/fastqc/fastqc/0.73"},
          {"label", "FastQC"},
          {"workflow_outputs", {{{"label", "report"}, {"output_name", "html_file"}}}}}}}}};
  return {{path, FileBlob{doc.dump(2), "application/json"}}};
}

World::World(Config config) : store(std::make_shared<MemoryStore>()), mint(std::make_shared<MockMintClient>()) {
  RegistryOptions options;
  options.config = std::move(config);
  options.store = store;
  options.mint_client = mint;
  options.clock = clock.fn();
  options.pbkdf2_iterations = 1000;
  registry = std::make_unique<Registry>(std::move(options));
  User a;
  a.id = "admin";
  a.display_name = "Registry Admin";
  registry->create_user(op, a, std::string("admin-password"));
  add_user("alice", "Alice Andersen");
  add_user("bob", "Bob Brown");
  Team team;
  team.name = "Lab";
  team.space_id = registry->default_space_id();
  lab = registry->create_team(alice, team).id;
}

User World::add_user(const std::string& id, const std::string& name) {
  User u;
  u.id = id;
  u.display_name = name.empty() ? id : name;
  return registry->create_user(op, u, id + "-password");
}

EntryId World::upload(FileTree files, MetadataPatch patch, const std::string& main_path) {
  if (!patch.team_ids) patch.team_ids = std::vector<TeamId>{lab};
  UploadRequest req{std::move(files), main_path, std::nullopt};
  return registry->register_workflow(alice, req, patch).entry.id;
}

EntryId World::upload_galaxy(const std::string& title, Visibility visibility) {
  MetadataPatch patch;
  patch.title = title;
  patch.license = "MIT";
  AccessPolicy policy;
  policy.visibility = visibility;
  if (visibility == Visibility::embargoed) policy.embargo_until = at("2030-01-01T00:00:00Z");
  patch.policy = policy;
  return upload(galaxy_upload(title), patch);
}

GitRepo::GitRepo() : dir_("flowhub-test-repo"), repo_(dir_.path() / "repo") {
  fs::create_directories(repo_);
  git({"init", "--quiet", "--initial-branch=main"});
  git({"config", "user.name", "Test Author"});
  git({"config", "user.email", "author@example.org"});
  git({"config", "commit.gpgsign", "false"});
  git({"config", "tag.gpgsign", "false"});
}

std::map<std::string, std::string> GitRepo::env() const {
  char date[64];
  std::snprintf(date, sizeof date, "2024-01-%02dT12:00:00Z", commits_ < 1 ? 1 : commits_);
  return {{"GIT_AUTHOR_DATE", date}, {"GIT_COMMITTER_DATE", date}, {"GIT_CONFIG_NOSYSTEM", "1"},
          {"HOME", dir_.path().string()}, {"LC_ALL", "C"}};
}

std::string GitRepo::git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv{"git", "-C", repo_.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions options;
  options.env = env();
  ProcessResult r = run_process(argv, options);
  if (r.exit_code != 0) throw std::runtime_error("git failed: " + r.err);
  return r.out;
}

void GitRepo::write(const std::string& relative, const std::string& content) {
  fs::path p = repo_ / relative;
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

void GitRepo::copy_tree(const fs::path& source) {
  fs::copy(source, repo_, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

std::string GitRepo::commit(const std::string& message) {
  ++commits_;
  git({"add", "-A"});
  git({"commit", "--quiet", "--allow-empty", "-m", message});
  return std::string(text::trim(git({"rev-parse", "HEAD"})));
}

void GitRepo::tag(const std::string& name, bool annotated) {
  if (annotated) git({"tag", "-a", name, "-m", "Release " + name});
  else git({"tag", name});
}

}  // namespace flowhub::testing

namespace flowhub::testing {
namespace {

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& from) {
  return from[rng() % from.size()];
}

std::string random_text(std::mt19937& rng, int min_words, int max_words) {
  static const std::vector<std::string> words{
      "variant", "calling", "RNA-seq", "Ünïcode", "assembly", "\"quoted\"", "comma, separated",
      "<tag>",   "genome",  "ß",       "metagenomics", "a&b", "line\nbreak", "tab\there", "COVID-19"};
  const int n = min_words + static_cast<int>(rng() % (max_words - min_words + 1));
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + pick(rng, words);
  return out;
}

std::string random_orcid(std::mt19937& rng) {
  std::string digits;
  for (int i = 0; i < 15; ++i) digits += static_cast<char>('0' + rng() % 10);
  digits += orcid_check_digit(digits);
  return digits.substr(0, 4) + "-" + digits.substr(4, 4) + "-" + digits.substr(8, 4) + "-" + digits.substr(12, 4);
}

std::vector<std::string> vocab_ids(std::string_view prefix) {
  std::vector<std::string> out;
  for (const auto& [id, label] : EdamVocabulary::bundled().entries())
    if (id.rfind(prefix, 0) == 0) out.push_back(id);
  return out;
}

}  // namespace

WorkflowEntry random_entry(std::mt19937& rng, EntryId id) {
  static const std::vector<std::string> topics = vocab_ids("topic_");
  static const std::vector<std::string> operations = vocab_ids("operation_");
  static const std::vector<std::string> licenses{"MIT", "Apache-2.0", "GPL-3.0-or-later", "CC-BY-4.0", "",
                                                  "Custom terms of use"};
  static const std::vector<std::pair<std::string, std::string>> mains{
      {"galaxy", "workflow.ga"}, {"cwl", "workflow.cwl"},     {"nextflow", "main.nf"},
      {"snakemake", "Snakefile"}, {"jupyter", "analysis.ipynb"}, {"wdl", "workflow.wdl"},
      {"python", "pipeline.py"},  {"bash", "run.sh"}};
  static const std::vector<std::string> tools{"bwa", "samtools", "fastqc", "multiqc", "bowtie2", "hisat2"};

  WorkflowEntry e;
  e.id = id;
  e.title = random_text(rng, 1, 5);
  if (rng() % 4) e.description = random_text(rng, 0, 12);
  e.license = pick(rng, licenses);
  for (int i = 0, n = rng() % 4; i < n; ++i) {
    Creator c{random_text(rng, 1, 3), std::nullopt, std::nullopt};
    if (rng() % 2) c.orcid = random_orcid(rng);
    if (rng() % 3 == 0) c.affiliation = random_text(rng, 1, 3);
    e.creators.push_back(std::move(c));
  }
  const auto& [cls, main] = pick(rng, mains);
  e.workflow_class = cls;
  for (int i = 0, n = rng() % 3; i < n; ++i) {
    const std::string& t = pick(rng, topics);
    if (std::find(e.edam_topics.begin(), e.edam_topics.end(), t) == e.edam_topics.end()) e.edam_topics.push_back(t);
  }
  for (int i = 0, n = rng() % 3; i < n; ++i) {
    const std::string& o = pick(rng, operations);
    if (std::find(e.edam_operations.begin(), e.edam_operations.end(), o) == e.edam_operations.end())
      e.edam_operations.push_back(o);
  }
  for (int i = 0, n = rng() % 4; i < n; ++i) e.tags.push_back(random_text(rng, 1, 2));
  e.maturity = rng() % 2 ? std::string(kMaturityStable) : std::string(kMaturityWorkInProgress);
  for (int i = 0, n = rng() % 3; i < n; ++i) {
    const std::string& t = pick(rng, tools);
    ToolRef ref{"toolshed.g2.bx.psu.edu/repos/devteam/" + t + "/" + t + "/1." + std::to_string(i), std::nullopt, t};
    if (rng() % 2) ref.biotools_id = t;
    e.tool_refs.push_back(std::move(ref));
  }
  for (int i = 0, n = 1 + rng() % 2; i < n; ++i) e.team_ids.push_back("team-" + std::to_string(rng() % 1000 + i * 1000));
  if (rng() % 3 == 0) e.custom_citation = random_text(rng, 3, 8);
  for (int i = 0, n = rng() % 3; i < n; ++i) e.attributions.push_back(1000 + rng() % 50 + i * 50);

  WorkflowVersion v;
  v.version = 1 + rng() % 3;
  v.created_at = at("2024-05-01T10:00:00Z") + std::chrono::hours(rng() % 5000);
  v.main_workflow_path = main;
  v.files[main] = FileBlob{"# " + e.title + "\n" + random_text(rng, 5, 20), guess_media_type(main)};
  v.files["README.md"] = FileBlob{random_text(rng, 3, 30), "text/markdown"};
  if (rng() % 2) {
    std::string png("\x89PNG\r\n\x1a\n", 8);
    for (int i = 0; i < 64; ++i) png += static_cast<char>(rng() % 256);
    v.files["images/diagram.png"] = FileBlob{png, "image/png"};
    v.diagram_path = "images/diagram.png";
  }
  if (rng() % 3 == 0) {
    v.files["abstract.cwl"] = FileBlob{"cwlVersion: v1.2\nclass: Workflow\ninputs: {}\noutputs: {}\nsteps: {}\n",
                                      "application/x-yaml"};
    v.abstract_cwl_path = "abstract.cwl";
  }
  if (rng() % 2) v.files["test/data/sample sheet.tsv"] = FileBlob{"a\tb\n1\t2\n", "text/tab-separated-values"};
  e.created_at = e.updated_at = v.created_at;
  e.versions.push_back(std::move(v));
  return e;
}

std::vector<std::string> crate_mismatches(const WorkflowEntry& e, const CrateContents& r) {
  std::vector<std::string> bad;
  const WorkflowVersion& v = e.versions.back();
  auto check = [&](bool same, const char* field) {
    if (!same) bad.emplace_back(field);
  };
  check(r.title == e.title, "title");
  check(r.description == e.description, "description");
  check(r.license == e.license, "license");
  check(r.creators == e.creators, "creators");
  check(r.workflow_class == std::optional<ClassId>(e.workflow_class), "workflow_class");
  check(r.edam_topics == e.edam_topics, "edam_topics");
  check(r.edam_operations == e.edam_operations, "edam_operations");
  check(r.tags == e.tags, "tags");
  check(r.maturity == std::optional<std::string>(e.maturity), "maturity");
  check(r.tool_refs == e.tool_refs, "tool_refs");
  check(r.team_ids == e.team_ids, "team_ids");
  check(r.custom_citation == e.custom_citation, "custom_citation");
  check(r.attribution_candidates == e.attributions, "attributions");
  check(r.files == v.files, "files");
  check(r.main_workflow_path == v.main_workflow_path, "main_workflow_path");
  check(r.diagram_path == v.diagram_path, "diagram_path");
  check(r.abstract_cwl_path == v.abstract_cwl_path, "abstract_cwl_path");
  check(r.date_published == std::optional<Timestamp>(v.created_at), "date_published");
  return bad;
}

}  // namespace flowhub::testing

namespace flowhub::testing {

std::vector<ParsedLink> parse_link_header(std::string_view h) {
  std::vector<ParsedLink> out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < h.size() && (h[i] == ' ' || h[i] == '\t')) ++i;
  };
  auto is_token = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("!#$%&'*+-.^_`|~").find(c) != std::string_view::npos;
  };
  skip_ws();
  while (i < h.size()) {
    if (h[i] != '<') throw std::invalid_argument("expected '<' at " + std::to_string(i));
    const std::size_t close = h.find('>', i);
    if (close == std::string_view::npos) throw std::invalid_argument("unterminated target");
    ParsedLink link;
    link.target = std::string(h.substr(i + 1, close - i - 1));
    i = close + 1;
    skip_ws();
    while (i < h.size() && h[i] == ';') {
      ++i;
      skip_ws();
      std::string name;
      while (i < h.size() && is_token(h[i])) name += static_cast<char>(std::tolower(static_cast<unsigned char>(h[i++])));
      if (name.empty()) throw std::invalid_argument("empty parameter name");
      skip_ws();
      std::string value;
      if (i < h.size() && h[i] == '=') {
        ++i;
        skip_ws();
        if (i < h.size() && h[i] == '"') {
          ++i;
          while (i < h.size() && h[i] != '"') {
            if (h[i] == '\\' && i + 1 < h.size()) ++i;
            value += h[i++];
          }
          if (i >= h.size()) throw std::invalid_argument("unterminated quoted value");
          ++i;
        } else {
          while (i < h.size() && is_token(h[i])) value += h[i++];
        }
      }
      if (!link.params.count(name)) link.params[name] = value;
      skip_ws();
    }
    out.push_back(std::move(link));
    if (i < h.size()) {
      if (h[i] != ',') throw std::invalid_argument("expected ',' at " + std::to_string(i));
      ++i;
      skip_ws();
    }
  }
  return out;
}

}  // namespace flowhub::testing
