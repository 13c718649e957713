#include "flowhub/git_import.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "flowhub/error.hpp"
#include "flowhub/process.hpp"

namespace flowhub {
namespace {

namespace fs = std::filesystem;

const std::map<std::string, std::string> kGitEnv = {
    {"GIT_TERMINAL_PROMPT", "0"},
    {"GIT_ASKPASS", "true"},
    {"GIT_CONFIG_NOSYSTEM", "1"},
    {"LC_ALL", "C"},
};

std::mutex& remote_lock(const std::string& remote) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard<std::mutex> guard(registry_mutex);
  auto& slot = locks[remote];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

class Git {
 public:
  Git(std::string exe, fs::path repo) : exe_(std::move(exe)), repo_(std::move(repo)) {}

  ProcessResult run(std::vector<std::string> args, std::string input = {}) const {
    args.insert(args.begin(), {exe_, "-C", repo_.string()});
    ProcessOptions options;
    options.env = kGitEnv;
    options.input = std::move(input);
    return run_process(args, options);
  }

  std::string check(std::vector<std::string> args, ErrorCode code, std::string_view what) const {
    ProcessResult r = run(std::move(args));
    if (r.exit_code != 0)
      throw Error(code, std::string(what) + ": " + std::string(text::trim(r.err)));
    return r.out;
  }

  std::optional<std::string> resolve(const std::string& rev) const {
    ProcessResult r = run({"rev-parse", "--verify", "--quiet", rev + "^{commit}"});
    if (r.exit_code != 0) return std::nullopt;
    return std::string(text::trim(r.out));
  }

 private:
  std::string exe_;
  fs::path repo_;
};

bool is_local(std::string_view remote) {
  return remote.rfind("file://", 0) == 0 || (!remote.empty() && (remote.front() == '/' || remote.front() == '.'));
}

std::vector<std::string> split_records(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find(sep, start);
    if (end == std::string::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<CommitInfo> read_log(const Git& git, const std::string& commit) {
  const std::string raw =
      git.check({"log", "--format=%H%x1f%ct%x1f%B%x1e", commit}, ErrorCode::fetch_error, "git log");
  std::vector<CommitInfo> log;
  for (auto& record : split_records(raw, '\x1e')) {
    std::string_view r = text::trim(record);
    if (r.empty()) continue;
    auto fields = text::split(r, '\x1f');
    if (fields.size() < 3) continue;
    CommitInfo info;
    info.commit_id = fields[0];
    info.timestamp = timefmt::from_unix(std::stoll(fields[1]));
    info.message = std::string(text::trim(fields[2]));
    log.push_back(std::move(info));
  }
  return log;
}

std::vector<Release> read_tags(const Git& git) {
  const std::string raw = git.check(
      {"for-each-ref", "--format=%(refname:strip=2)%1f%(objecttype)%1f%(objectname)%1f%(*objecttype)%1f%(*objectname)",
       "refs/tags"},
      ErrorCode::fetch_error, "git for-each-ref");
  std::vector<Release> tags;
  for (const auto& line : split_records(raw, '\n')) {
    auto f = text::split(line, '\x1f');
    if (f.size() < 5) continue;
    std::string commit;
    if (f[1] == "commit") commit = f[2];
    else if (f[1] == "tag" && f[3] == "commit") commit = f[4];
    else continue;
    tags.push_back({f[0], commit, {}});
  }
  // Commit timestamps for every tagged commit in one call.
  if (!tags.empty()) {
    std::vector<std::string> args{"show", "-s", "--format=%H %ct"};
    for (const auto& t : tags) args.push_back(t.commit_id);
    std::map<std::string, Timestamp> when;
    for (const auto& line : split_records(git.check(args, ErrorCode::fetch_error, "git show"), '\n')) {
      auto space = line.find(' ');
      if (space == std::string::npos) continue;
      when[line.substr(0, space)] = timefmt::from_unix(std::stoll(line.substr(space + 1)));
    }
    for (auto& t : tags) t.timestamp = when[t.commit_id];
  }
  return tags;
}

FileTree read_tree(const Git& git, const std::string& commit, const GitImportOptions& options) {
  const std::string listing =
      git.check({"ls-tree", "-r", "-l", "-z", commit}, ErrorCode::fetch_error, "git ls-tree");
  struct Item {
    std::string object;
    std::string path;
  };
  std::vector<Item> items;
  std::uint64_t total = 0;
  for (const auto& record : split_records(listing, '\0')) {
    // "<mode> <type> <object> <size>\t<path>"
    auto tab = record.find('\t');
    if (tab == std::string::npos) continue;
    auto fields = text::split(record.substr(0, tab), ' ');
    fields.erase(std::remove(fields.begin(), fields.end(), std::string()), fields.end());
    if (fields.size() < 4 || fields[1] != "blob" || fields[0] == "120000") continue;
    total += std::stoull(fields[3]);
    items.push_back({fields[2], record.substr(tab + 1)});
    if (items.size() > options.max_files)
      throw Error(ErrorCode::size_limit, "repository has more than " + std::to_string(options.max_files) + " files");
    if (total > options.max_bytes)
      throw Error(ErrorCode::size_limit, "repository content exceeds " + std::to_string(options.max_bytes) + " bytes");
  }

  std::string request;
  for (const auto& item : items) request += item.object + "\n";
  ProcessResult batch = git.run({"cat-file", "--batch"}, request);
  if (batch.exit_code != 0) throw Error(ErrorCode::fetch_error, "git cat-file: " + batch.err);

  FileTree files;
  std::size_t pos = 0;
  for (const auto& item : items) {
    // "<object> blob <size>\n<bytes>\n"
    std::size_t header_end = batch.out.find('\n', pos);
    if (header_end == std::string::npos) throw Error(ErrorCode::fetch_error, "truncated cat-file output");
    auto header = text::split(std::string_view(batch.out).substr(pos, header_end - pos), ' ');
    if (header.size() < 3 || header[1] != "blob")
      throw Error(ErrorCode::fetch_error, "unexpected cat-file header for " + item.path);
    std::size_t size = std::stoull(header[2]);
    if (header_end + 1 + size > batch.out.size()) throw Error(ErrorCode::fetch_error, "truncated cat-file output");
    std::string bytes = batch.out.substr(header_end + 1, size);
    pos = header_end + 1 + size + 1;
    files.emplace(item.path, FileBlob{std::move(bytes), guess_media_type(item.path)});
  }
  return files;
}

}  // namespace

bool is_supported_remote(std::string_view remote) {
  if (remote.empty() || remote.front() == '-') return false;
  if (remote.rfind("https://", 0) == 0 || remote.rfind("file://", 0) == 0) return true;
  if (remote.find("://") != std::string_view::npos) return false;
  // scp-style `user@host:path`
  if (remote.find('@') != std::string_view::npos && remote.find(':') != std::string_view::npos) return false;
  return remote.front() == '/' || remote.front() == '.';
}

RepositorySnapshot import_repository(const std::string& remote, const std::optional<std::string>& ref,
                                     const GitImportOptions& options) {
  if (!is_supported_remote(remote))
    throw Error(ErrorCode::fetch_error, "unsupported remote `" + remote + "` (https, file:// or a local path)");
  if (is_local(remote) && remote.rfind("file://", 0) != 0 && !fs::exists(remote))
    throw Error(ErrorCode::fetch_error, "no repository at `" + remote + "`");
  if (ref && (ref->empty() || ref->front() == '-'))
    throw Error(ErrorCode::ref_not_found, "invalid ref `" + *ref + "`");

  std::lock_guard<std::mutex> guard(remote_lock(remote));
  TempDir scratch("flowhub-git");
  const fs::path repo = scratch.path() / "repo";

  std::vector<std::string> clone{options.git, "clone", "--quiet", "--no-checkout"};
  if (!is_local(remote) && options.depth > 0) {
    clone.push_back("--depth=" + std::to_string(options.depth));
    clone.push_back("--no-single-branch");
  }
  clone.push_back("--");
  clone.push_back(remote);
  clone.push_back(repo.string());
  ProcessOptions popts;
  popts.env = kGitEnv;
  ProcessResult cloned = run_process(clone, popts);
  if (cloned.exit_code != 0)
    throw Error(ErrorCode::fetch_error, "clone of `" + remote + "` failed: " + std::string(text::trim(cloned.err)));

  Git git(options.git, repo);
  RepositorySnapshot snap;
  snap.remote = remote;
  std::optional<std::string> commit;
  if (ref) {
    for (const std::string& candidate : {"refs/tags/" + *ref, "refs/remotes/origin/" + *ref, *ref}) {
      if ((commit = git.resolve(candidate))) break;
    }
    if (!commit) throw Error(ErrorCode::ref_not_found, "ref `" + *ref + "` not found in `" + remote + "`");
    snap.ref = *ref;
  } else {
    commit = git.resolve("HEAD");
    if (!commit) throw Error(ErrorCode::ref_not_found, "`" + remote + "` has no commits");
    ProcessResult head = git.run({"symbolic-ref", "--short", "HEAD"});
    snap.ref = head.exit_code == 0 ? std::string(text::trim(head.out)) : "HEAD";
  }
  snap.commit_id = *commit;
  snap.files = read_tree(git, snap.commit_id, options);
  snap.commit_log = read_log(git, snap.commit_id);
  snap.tags = read_tags(git);
  std::sort(snap.tags.begin(), snap.tags.end(), [](const Release& a, const Release& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tag < b.tag;
  });
  return snap;
}

std::vector<CandidateFile> detect_workflow_files(const FileTree& files, const ClassRegistry& classes) {
  std::vector<CandidateFile> out;
  for (const auto& [path, blob] : files) {
    std::optional<ClassId> id = blob.bytes.size() <= kDefaultMaxParseBytes
                                    ? classes.match(path, blob.bytes)
                                    : classes.match_name(path);
    if (id && *id != kOtherClass) out.push_back({path, *id});
  }
  std::sort(out.begin(), out.end(), [](const CandidateFile& a, const CandidateFile& b) {
    const bool a_other = a.class_id == kOtherClass, b_other = b.class_id == kOtherClass;
    if (a_other != b_other) return !a_other;
    const auto da = text::path_depth(a.path), db = text::path_depth(b.path);
    if (da != db) return da < db;
    return a.path < b.path;
  });
  return out;
}

std::optional<std::string> extract_readme(const FileTree& files) {
  const FileBlob* best = nullptr;
  std::tuple<std::size_t, int, std::string> best_key;
  for (const auto& [path, blob] : files) {
    const std::string name = text::to_lower(text::basename(path));
    int rank;
    if (name == "readme.md") rank = 0;
    else if (name == "readme") rank = 1;
    else continue;
    std::tuple<std::size_t, int, std::string> key{text::path_depth(path), rank, path};
    if (!best || key < best_key) {
      best_key = std::move(key);
      best = &blob;
    }
  }
  if (!best) return std::nullopt;
  return best->bytes;
}

std::vector<Release> enumerate_releases(const RepositorySnapshot& snapshot) {
  std::vector<Release> releases = snapshot.tags;
  std::sort(releases.begin(), releases.end(), [](const Release& a, const Release& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tag < b.tag;
  });
  return releases;
}

}  // namespace flowhub
