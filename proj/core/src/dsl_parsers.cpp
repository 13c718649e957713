#include <regex>
#include <set>

#include "flowhub/error.hpp"
#include "flowhub/parsers.hpp"

namespace flowhub {
namespace {

// Body of the first `manifest {` block, honouring quotes and comments.
std::optional<std::string> manifest_body(const std::string& s) {
  static const std::regex opener(R"re((^|[^\w.])manifest\s*\{)re");
  std::smatch m;
  if (!std::regex_search(s, m, opener)) return std::nullopt;
  std::size_t i = static_cast<std::size_t>(m.position(0) + m.length(0));
  const std::size_t start = i;
  int depth = 1;
  char quote = 0;
  while (i < s.size()) {
    char c = s[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      auto end = s.find("*/", i + 2);
      i = end == std::string::npos ? s.size() : end + 1;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return s.substr(start, i - start);
    }
    ++i;
  }
  return std::nullopt;
}

void read_assignments(const std::string& body, const std::regex& pattern,
                      std::map<std::string, std::string>& out) {
  for (auto it = std::sregex_iterator(body.begin(), body.end(), pattern); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    std::string value = m[3].matched ? m[3].str() : m[4].str();
    out.emplace(m[2].str(), value);
  }
}

const FileBlob* find_file(const FileTree& files, const std::string& path) {
  auto it = files.find(path);
  return it == files.end() ? nullptr : &it->second;
}

std::string normalize_path(const std::string& path) {
  std::vector<std::string> parts;
  for (const auto& part : text::split(path, '/')) {
    if (part.empty() || part == ".") continue;
    if (part == "..") {
      if (!parts.empty()) parts.pop_back();
      continue;
    }
    parts.push_back(part);
  }
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "/") + p;
  return out;
}

}  // namespace

WorkflowStructure parse_nextflow_manifest(const FileTree& files) {
  static const std::regex block_assign(
      R"re((^|\n)\s*(\w+)\s*=\s*(?:'([^'\n]*)'|"([^"\n]*)"))re");
  static const std::regex dotted_assign(
      R"re((^|\n)\s*manifest\.(\w+)\s*=\s*(?:'([^'\n]*)'|"([^"\n]*)"))re");

  std::map<std::string, std::string> values;
  bool found = false;
  for (const char* name : {"nextflow.config", "main.nf"}) {
    const FileBlob* file = find_file(files, name);
    if (!file) continue;
    found = true;
    if (auto body = manifest_body(file->bytes)) {
      read_assignments(*body, block_assign, values);
    }
    read_assignments(file->bytes, dotted_assign, values);
  }
  if (!found) throw Error(ErrorCode::not_found, "no nextflow.config or main.nf at the root");

  WorkflowStructure out;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = values.find(key);
    if (it == values.end() || text::trim(it->second).empty()) return std::nullopt;
    return it->second;
  };
  out.name = take("name");
  out.description = take("description");
  out.version = take("version");
  out.language_version = take("nextflowVersion");
  return out;
}

WorkflowStructure parse_snakemake(const FileTree& files) {
  static const std::regex rule_re(R"re(^\s*(?:rule|checkpoint)\s+([A-Za-z_]\w*)\s*:)re");
  static const std::regex include_re(R"re(^\s*include\s*:\s*(?:'([^']*)'|"([^"]*)"))re");
  static const std::regex wrapper_re(R"re(^\s*wrapper\s*:\s*(?:'([^']*)'|"([^"]*)"))re");
  static const std::regex bio_re(R"re((?:^|/)bio/([^/]+))re");

  std::string root;
  for (const char* candidate : {"Snakefile", "workflow/Snakefile"}) {
    if (find_file(files, candidate)) {
      root = candidate;
      break;
    }
  }
  if (root.empty()) throw Error(ErrorCode::not_found, "no Snakefile or workflow/Snakefile");

  WorkflowStructure out;
  std::set<std::string> visited;
  std::set<std::string> rule_ids;
  std::set<std::string> tool_ids;

  // Depth-first in include order, so rules appear as Snakemake would see them.
  auto visit = [&](auto&& self, const std::string& path) -> void {
    if (!visited.insert(path).second) return;
    const FileBlob* file = find_file(files, path);
    if (!file) return;
    const std::string dir = text::dirname(path);
    std::optional<std::size_t> current;
    std::size_t line_start = 0;
    const std::string& src = file->bytes;
    while (line_start <= src.size()) {
      std::size_t end = src.find('\n', line_start);
      if (end == std::string::npos) end = src.size();
      const std::string line = src.substr(line_start, end - line_start);
      line_start = end + 1;
      std::smatch m;
      if (std::regex_search(line, m, rule_re)) {
        current.reset();
        const std::string id = m[1].str();
        if (rule_ids.insert(id).second) {
          current = out.steps.size();
          out.steps.push_back(StepDecl{id, id, std::nullopt, std::nullopt});
        }
      } else if (std::regex_search(line, m, include_re)) {
        current.reset();
        std::string target = m[1].matched ? m[1].str() : m[2].str();
        self(self, normalize_path(dir.empty() ? target : dir + "/" + target));
      } else if (current && std::regex_search(line, m, wrapper_re)) {
        const std::string wrapper = m[1].matched ? m[1].str() : m[2].str();
        std::smatch bio;
        std::string tool = std::regex_search(wrapper, bio, bio_re) ? bio[1].str() : wrapper;
        out.steps[*current].tool_ref = ToolRef{tool, std::nullopt, tool};
        if (tool_ids.insert(tool).second) out.raw_tool_ids.push_back(tool);
      }
      if (end == src.size()) break;
    }
  };
  visit(visit, root);
  return out;
}

std::optional<WorkflowStructure> parse_for_class(std::string_view class_id, const FileTree& files,
                                                 const std::string& main_path,
                                                 const EdamVocabulary& vocab,
                                                 std::size_t max_bytes) {
  auto main_content = [&]() -> const std::string& {
    const FileBlob* file = find_file(files, main_path);
    if (!file) throw Error(ErrorCode::not_found, "main workflow file missing: " + main_path);
    return file->bytes;
  };
  if (class_id == "galaxy") return parse_galaxy(main_content(), max_bytes);
  if (class_id == "cwl") return parse_cwl_abstract(main_content(), vocab, max_bytes);
  if (class_id == "nextflow") return parse_nextflow_manifest(files);
  if (class_id == "snakemake") return parse_snakemake(files);
  return std::nullopt;
}

}  // namespace flowhub
