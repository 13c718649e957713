#include "flowhub/search.hpp"

#include <algorithm>
#include <unordered_set>

#include "flowhub/error.hpp"

namespace flowhub {
namespace {

bool facet_accepts(const SearchDoc& doc, const std::string& facet, const std::set<std::string>& wanted) {
  if (wanted.empty()) return true;
  auto it = doc.facets.find(facet);
  if (it == doc.facets.end()) return false;
  for (const auto& value : it->second) {
    for (const auto& w : wanted) {
      if (text::iequals(value, w)) return true;
    }
  }
  return false;
}

bool passes_filters(const SearchDoc& doc, const SearchQuery& query, std::string_view skip) {
  for (const auto& [facet, wanted] : query.facet_filters) {
    if (facet == skip) continue;
    if (!facet_accepts(doc, facet, wanted)) return false;
  }
  return true;
}

int compare_docs(const SearchDoc& a, const SearchDoc& b, SortKey key) {
  auto cmp = [](const auto& x, const auto& y) { return x < y ? -1 : (y < x ? 1 : 0); };
  switch (key) {
    case SortKey::title: {
      int c = cmp(text::to_lower(a.title), text::to_lower(b.title));
      return c != 0 ? c : cmp(a.title, b.title);
    }
    case SortKey::created: return cmp(a.created_at, b.created_at);
    case SortKey::updated: return cmp(a.updated_at, b.updated_at);
    case SortKey::views: return cmp(a.views, b.views);
    case SortKey::downloads: return cmp(a.downloads, b.downloads);
  }
  return 0;
}

}  // namespace

bool is_facet_name(std::string_view name) {
  return std::find(kFacetNames.begin(), kFacetNames.end(), name) != kFacetNames.end();
}

std::string_view to_string(SortKey key) {
  switch (key) {
    case SortKey::title: return "title";
    case SortKey::created: return "created";
    case SortKey::updated: return "updated";
    case SortKey::views: return "views";
    case SortKey::downloads: return "downloads";
  }
  return "updated";
}

std::string_view to_string(SortOrder order) { return order == SortOrder::asc ? "asc" : "desc"; }

SortKey parse_sort_key(std::string_view s) {
  for (SortKey k : {SortKey::title, SortKey::created, SortKey::updated, SortKey::views, SortKey::downloads}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::bad_query, "unknown sort key `" + std::string(s) + "`");
}

SortOrder parse_sort_order(std::string_view s) {
  if (s == "asc") return SortOrder::asc;
  if (s == "desc") return SortOrder::desc;
  throw Error(ErrorCode::bad_query, "unknown sort order `" + std::string(s) + "`");
}

void check_query(const SearchQuery& query) {
  for (const auto& [facet, values] : query.facet_filters) {
    if (!is_facet_name(facet)) throw Error(ErrorCode::bad_query, "unknown facet `" + facet + "`");
  }
  if (query.page == 0) throw Error(ErrorCode::bad_query, "page starts at 1");
  if (query.page_size < 1 || query.page_size > 100)
    throw Error(ErrorCode::bad_query, "page_size must be between 1 and 100");
}

bool matches_text(const SearchDoc& doc, const std::vector<std::string>& query_tokens) {
  if (query_tokens.empty()) return true;
  std::unordered_set<std::string> tokens;
  auto add = [&](std::string_view s) {
    for (auto& t : text::tokenize(s)) tokens.insert(std::move(t));
  };
  add(doc.title);
  add(doc.description);
  for (const auto& t : doc.tags) add(t);
  for (const auto& c : doc.creator_names) add(c);
  return std::all_of(query_tokens.begin(), query_tokens.end(),
                     [&](const std::string& t) { return tokens.count(t) > 0; });
}

SearchResult run_search(const std::vector<SearchDoc>& docs, const SearchQuery& query) {
  check_query(query);
  const std::vector<std::string> tokens = query.text ? text::tokenize(*query.text) : std::vector<std::string>{};

  std::vector<const SearchDoc*> text_hits;
  for (const auto& doc : docs) {
    if (matches_text(doc, tokens)) text_hits.push_back(&doc);
  }

  SearchResult result;
  for (std::string_view facet_view : kFacetNames) {
    const std::string facet(facet_view);
    auto& counts = result.facet_counts[facet];
    for (const SearchDoc* doc : text_hits) {
      if (!passes_filters(*doc, query, facet)) continue;
      auto it = doc->facets.find(facet);
      if (it == doc->facets.end()) continue;
      std::set<std::string> seen(it->second.begin(), it->second.end());
      for (const auto& value : seen) ++counts[value];
    }
  }

  std::vector<const SearchDoc*> hits;
  for (const SearchDoc* doc : text_hits) {
    if (passes_filters(*doc, query, {})) hits.push_back(doc);
  }
  std::sort(hits.begin(), hits.end(), [&](const SearchDoc* a, const SearchDoc* b) {
    int c = compare_docs(*a, *b, query.sort);
    if (c != 0) return query.order == SortOrder::asc ? c < 0 : c > 0;
    return a->id < b->id;
  });

  result.total = hits.size();
  const std::size_t begin = (query.page - 1) * query.page_size;
  for (std::size_t i = begin; i < hits.size() && i < begin + query.page_size; ++i)
    result.hits.push_back(hits[i]->id);
  return result;
}

}  // namespace flowhub
