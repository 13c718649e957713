#include "flowhub/vocab.hpp"

#include <array>
#include <fstream>
#include <regex>
#include <sstream>

#include "flowhub/error.hpp"

namespace flowhub {
namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void for_each_data_line(std::string_view text, Fn&& fn) {
  for (const auto& raw : text::split(text, '\n')) {
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    fn(line);
  }
}

std::string_view branch_prefix(EdamBranch branch) {
  switch (branch) {
    case EdamBranch::topic: return "topic_";
    case EdamBranch::operation: return "operation_";
    case EdamBranch::format: return "format_";
  }
  return "";
}

}  // namespace

// ---------------------------------------------------------------------------

EdamVocabulary EdamVocabulary::parse(std::string_view text) {
  EdamVocabulary vocab;
  for_each_data_line(text, [&](std::string_view line) {
    auto tab = line.find('\t');
    std::string id(text::trim(line.substr(0, tab)));
    std::string label = tab == std::string_view::npos ? std::string()
                                                      : std::string(text::trim(line.substr(tab + 1)));
    if (has_syntax(id)) vocab.labels_[id] = label;
  });
  return vocab;
}

EdamVocabulary EdamVocabulary::load(const std::filesystem::path& file) {
  return parse(read_file(file));
}

const EdamVocabulary& EdamVocabulary::bundled() {
  static const EdamVocabulary vocab = parse(bundled_data::edam_ids());
  return vocab;
}

bool EdamVocabulary::has_syntax(std::string_view id, EdamBranch branch) {
  auto prefix = branch_prefix(branch);
  if (id.size() != prefix.size() + 4 || id.substr(0, prefix.size()) != prefix) return false;
  for (char c : id.substr(prefix.size())) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

bool EdamVocabulary::has_syntax(std::string_view id) {
  return has_syntax(id, EdamBranch::topic) || has_syntax(id, EdamBranch::operation) ||
         has_syntax(id, EdamBranch::format);
}

std::optional<std::string> EdamVocabulary::id_from_reference(std::string_view ref) {
  std::string_view s = text::trim(ref);
  for (std::string_view prefix :
       {"http://edamontology.org/", "https://edamontology.org/", "edam:"}) {
    if (s.substr(0, prefix.size()) == prefix) {
      s.remove_prefix(prefix.size());
      break;
    }
  }
  if (has_syntax(s)) return std::string(s);
  return std::nullopt;
}

std::string EdamVocabulary::iri(std::string_view id) { return std::string(kEdamBase) + std::string(id); }

bool EdamVocabulary::contains(std::string_view id) const {
  return labels_.find(std::string(id)) != labels_.end();
}

bool EdamVocabulary::is_valid(std::string_view id, EdamBranch branch) const {
  return has_syntax(id, branch) && contains(id);
}

std::optional<std::string> EdamVocabulary::label(std::string_view id) const {
  auto it = labels_.find(std::string(id));
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> EdamVocabulary::find_by_label(std::string_view label,
                                                         EdamBranch branch) const {
  auto prefix = branch_prefix(branch);
  std::string_view wanted = text::trim(label);
  for (const auto& [id, name] : labels_) {
    if (id.compare(0, prefix.size(), prefix) == 0 && text::iequals(name, wanted)) return id;
  }
  return std::nullopt;
}

std::optional<std::string> EdamVocabulary::resolve(std::string_view ref, EdamBranch branch) const {
  if (auto id = id_from_reference(ref)) {
    if (has_syntax(*id, branch)) return id;
    return std::nullopt;
  }
  return find_by_label(ref, branch);
}

// ---------------------------------------------------------------------------

ToolMapper::ToolMapper(std::map<std::string, std::string> table, std::set<std::string> known_ids)
    : table_(std::move(table)), known_(std::move(known_ids)) {}

ToolMapper ToolMapper::parse(std::string_view ids_text, std::string_view table_tsv) {
  std::set<std::string> ids;
  for_each_data_line(ids_text, [&](std::string_view line) {
    if (is_valid_biotools_id(line)) ids.insert(text::to_lower(line));
  });
  std::map<std::string, std::string> table;
  for_each_data_line(table_tsv, [&](std::string_view line) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) return;
    std::string raw(text::trim(line.substr(0, tab)));
    std::string target = text::to_lower(text::trim(line.substr(tab + 1)));
    if (!raw.empty() && is_valid_biotools_id(target)) table[raw] = target;
  });
  return ToolMapper(std::move(table), std::move(ids));
}

ToolMapper ToolMapper::load(const std::filesystem::path& ids_file,
                            const std::filesystem::path& table_file) {
  return parse(read_file(ids_file), read_file(table_file));
}

const ToolMapper& ToolMapper::bundled() {
  static const ToolMapper mapper =
      parse(bundled_data::biotools_ids(), bundled_data::galaxy_biotools());
  return mapper;
}

std::string ToolMapper::strip_toolshed(std::string_view raw) {
  auto parts = text::split(raw, '/');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] == "repos" && i > 0 && i + 3 < parts.size()) return parts[i + 3];
  }
  return std::string(raw);
}

ToolRef ToolMapper::map_one(std::string_view raw) const {
  ToolRef ref;
  ref.raw_id = std::string(raw);
  const std::string stripped = strip_toolshed(raw);
  ref.display_name = stripped;
  if (auto it = table_.find(ref.raw_id); it != table_.end()) {
    ref.biotools_id = it->second;
    return ref;
  }
  const std::string key = text::to_lower(stripped);
  if (auto it = table_.find(key); it != table_.end()) {
    ref.biotools_id = it->second;
  } else if (known_.count(key)) {
    ref.biotools_id = key;
  }
  return ref;
}

std::vector<ToolRef> ToolMapper::map(const std::vector<std::string>& raw_ids) const {
  std::vector<ToolRef> out;
  out.reserve(raw_ids.size());
  for (const auto& raw : raw_ids) out.push_back(map_one(raw));
  return out;
}

bool ToolMapper::knows(std::string_view biotools_id) const {
  return known_.count(text::to_lower(biotools_id)) > 0;
}

// ---------------------------------------------------------------------------

namespace spdx {
namespace {

constexpr std::array<std::string_view, 48> kKnown = {
    "0BSD",         "AFL-3.0",      "AGPL-3.0-only", "AGPL-3.0-or-later", "Apache-1.1",
    "Apache-2.0",   "Artistic-2.0", "BSD-2-Clause",  "BSD-3-Clause",      "BSL-1.0",
    "CC-BY-3.0",    "CC-BY-4.0",    "CC-BY-NC-4.0",  "CC-BY-NC-SA-4.0",   "CC-BY-NC-ND-4.0",
    "CC-BY-ND-4.0", "CC-BY-SA-4.0", "CC0-1.0",       "CDDL-1.0",          "CECILL-2.1",
    "EPL-1.0",      "EPL-2.0",      "EUPL-1.1",      "EUPL-1.2",          "GPL-2.0-only",
    "GPL-2.0-or-later", "GPL-3.0-only", "GPL-3.0-or-later", "ISC",         "LGPL-2.1-only",
    "LGPL-2.1-or-later", "LGPL-3.0-only", "LGPL-3.0-or-later", "MIT",      "MIT-0",
    "MPL-1.1",      "MPL-2.0",      "MS-PL",         "NCSA",              "ODbL-1.0",
    "OFL-1.1",      "PDDL-1.0",     "PostgreSQL",    "Python-2.0",        "Unlicense",
    "UPL-1.0",      "WTFPL",        "Zlib"};

}  // namespace

bool is_known(std::string_view id) {
  for (auto known : kKnown) {
    if (known == id) return true;
  }
  return false;
}

std::string iri(std::string_view id) { return std::string(kSpdxBase) + std::string(id); }

std::optional<std::string> id_from_iri(std::string_view value) {
  for (std::string_view prefix : {"https://spdx.org/licenses/", "http://spdx.org/licenses/"}) {
    if (value.substr(0, prefix.size()) == prefix) {
      std::string_view id = value.substr(prefix.size());
      for (std::string_view suffix : {".html", ".json"}) {
        if (id.size() > suffix.size() && id.substr(id.size() - suffix.size()) == suffix)
          id.remove_suffix(suffix.size());
      }
      if (!id.empty()) return std::string(id);
    }
  }
  return std::nullopt;
}

}  // namespace spdx

}  // namespace flowhub
