#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/model.hpp"

namespace flowhub {

inline constexpr std::string_view kEdamBase = "http://edamontology.org/";
inline constexpr std::string_view kBiotoolsBase = "https://bio.tools/";
inline constexpr std::string_view kSpdxBase = "https://spdx.org/licenses/";

enum class EdamBranch { topic, operation, format };

/// EDAM concept ids with their preferred labels. Validity is syntactic
/// (`topic_NNNN`, `operation_NNNN`, `format_NNNN`) plus membership in the
/// bundled id list; there is no ontology reasoning.
class EdamVocabulary {
 public:
  EdamVocabulary() = default;

  /// `id<TAB>label` or bare `id` per line; `#` starts a comment line.
  static EdamVocabulary parse(std::string_view text);
  static EdamVocabulary load(const std::filesystem::path& file);
  static const EdamVocabulary& bundled();

  static bool has_syntax(std::string_view id, EdamBranch branch);
  static bool has_syntax(std::string_view id);
  /// `http://edamontology.org/topic_0196`, `edam:topic_0196` or a bare id ->
  /// bare id; anything else -> nullopt. Purely syntactic.
  static std::optional<std::string> id_from_reference(std::string_view ref);
  static std::string iri(std::string_view id);

  bool contains(std::string_view id) const;
  bool is_valid(std::string_view id, EdamBranch branch) const;
  std::optional<std::string> label(std::string_view id) const;
  /// Case-insensitive preferred-label lookup, restricted to one branch.
  std::optional<std::string> find_by_label(std::string_view label, EdamBranch branch) const;
  /// Accepts an IRI, CURIE, bare id or preferred label.
  std::optional<std::string> resolve(std::string_view ref, EdamBranch branch) const;

  std::size_t size() const { return labels_.size(); }
  const std::map<std::string, std::string>& entries() const { return labels_; }

 private:
  std::map<std::string, std::string> labels_;
};

/// Maps raw tool identifiers found in workflow sources to bio.tools ids.
class ToolMapper {
 public:
  ToolMapper() = default;
  ToolMapper(std::map<std::string, std::string> table, std::set<std::string> known_ids);

  /// `ids_text`: one bio.tools id per line. `table_tsv`: `raw<TAB>biotools`.
  static ToolMapper parse(std::string_view ids_text, std::string_view table_tsv);
  static ToolMapper load(const std::filesystem::path& ids_file,
                         const std::filesystem::path& table_file);
  static const ToolMapper& bundled();

  /// `<host>/repos/<owner>/<repo>/<tool>[/<version>]` -> `<tool>`; other ids
  /// are returned unchanged.
  static std::string strip_toolshed(std::string_view raw);

  /// Lookup order: the mapping table on the raw id, the table on the
  /// stripped lowercase id, then the known-id list on the stripped lowercase
  /// id. No hit leaves biotools_id empty.
  ToolRef map_one(std::string_view raw) const;
  std::vector<ToolRef> map(const std::vector<std::string>& raw_ids) const;

  bool knows(std::string_view biotools_id) const;

 private:
  std::map<std::string, std::string> table_;
  std::set<std::string> known_;
};

namespace spdx {

bool is_known(std::string_view id);
std::string iri(std::string_view id);
/// `https://spdx.org/licenses/MIT` (optionally `.html`/`.json`) -> `MIT`.
std::optional<std::string> id_from_iri(std::string_view iri);

}  // namespace spdx

namespace bundled_data {

std::string_view biotools_ids();
std::string_view galaxy_biotools();
std::string_view edam_ids();

}  // namespace bundled_data

}  // namespace flowhub
