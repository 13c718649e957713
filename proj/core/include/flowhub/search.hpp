#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/model.hpp"

namespace flowhub {

inline constexpr std::array<std::string_view, 10> kFacetNames = {
    "class", "tag", "creator", "team", "space", "organisation",
    "maturity", "edam_topic", "edam_operation", "tool"};

bool is_facet_name(std::string_view name);

enum class SortKey { title, created, updated, views, downloads };
enum class SortOrder { asc, desc };

std::string_view to_string(SortKey key);
std::string_view to_string(SortOrder order);
/// Throws Error(bad_query) on unknown tokens.
SortKey parse_sort_key(std::string_view s);
SortOrder parse_sort_order(std::string_view s);

struct SearchQuery {
  std::optional<std::string> text;
  /// facet -> accepted values. Values within a facet are alternatives, facets
  /// are conjunctive. Matching is case-insensitive.
  std::map<std::string, std::set<std::string>> facet_filters;
  SortKey sort = SortKey::updated;
  SortOrder order = SortOrder::desc;
  /// 1-based.
  std::size_t page = 1;
  std::size_t page_size = 20;
};

/// Throws Error(bad_query) for unknown facets, page 0 or a page_size
/// outside [1, 100].
void check_query(const SearchQuery& query);

/// The searchable projection of one entry, built by the registry.
struct SearchDoc {
  EntryId id = 0;
  std::string title;
  std::string description;
  std::vector<std::string> tags;
  std::vector<std::string> creator_names;
  /// facet -> values carried by this entry.
  std::map<std::string, std::vector<std::string>> facets;
  Timestamp created_at{};
  Timestamp updated_at{};
  std::uint64_t views = 0;
  std::uint64_t downloads = 0;
};

struct SearchResult {
  /// The requested page, in sort order.
  std::vector<EntryId> hits;
  /// facet -> value -> number of matching entries. A facet's counts ignore
  /// that facet's own filter and honour every other one.
  std::map<std::string, std::map<std::string, std::uint64_t>> facet_counts;
  std::uint64_t total = 0;
};

/// Lowercased query tokens must all occur among the tokens of the title,
/// description, tags and creator names.
bool matches_text(const SearchDoc& doc, const std::vector<std::string>& query_tokens);

/// `docs` must already be restricted to what the caller may view.
SearchResult run_search(const std::vector<SearchDoc>& docs, const SearchQuery& query);

}  // namespace flowhub
