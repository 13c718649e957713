#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "flowhub/error.hpp"
#include "flowhub/process.hpp"
#include "flowhub/search.hpp"
#include "flowhub/store.hpp"

using namespace flowhub;
using nlohmann::json;

namespace {

void exercise_store(Store& store) {
  EXPECT_TRUE(store.list("workflow").empty());
  store.put("workflow", "1", {{"id", 1}, {"title", "a"}});
  store.put("workflow", "2", {{"id", 2}});
  store.put("workflow", "1", {{"id", 1}, {"title", "b"}});
  auto docs = store.list("workflow");
  ASSERT_EQ(docs.size(), 2u);
  store.remove("workflow", "2");
  docs = store.list("workflow");
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0]["title"], "b");

  const std::string bytes("\0binary\xff", 8);
  const std::string digest = store.put_blob(bytes);
  EXPECT_EQ(digest, digest::sha256_hex(bytes));
  EXPECT_EQ(store.put_blob(bytes), digest);
  EXPECT_EQ(store.get_blob(digest), bytes);
  try {
    store.get_blob(std::string(64, '0'));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::integrity_error);
  }

  store.append_event({{"seq", 1}});
  store.append_event({{"seq", 2}});
  const auto events = store.events();
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[1]["seq"], 2);
}

}  // namespace

TEST(Store, MemoryStore) {
  MemoryStore store;
  exercise_store(store);
  EXPECT_EQ(store.blob_count(), 1u);
}

TEST(Store, FileStorePersistsAcrossInstances) {
  TempDir dir("flowhub-store-test");
  {
    FileStore store(dir.path() / "data");
    exercise_store(store);
  }
  FileStore reopened(dir.path() / "data");
  EXPECT_EQ(reopened.list("workflow").size(), 1u);
  EXPECT_EQ(reopened.events().size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "data" / "events.log"));
}

TEST(Store, FileStoreKeepsHostileIdsInsideItsRoot) {
  TempDir dir("flowhub-store-test");
  FileStore store(dir.path() / "data");
  store.put("workflow", "../escape", {{"id", "../escape"}});
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "data" / "entities" / "escape.json"));
  const auto docs = store.list("workflow");
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0]["id"], "../escape");
  store.remove("workflow", "../escape");
  EXPECT_TRUE(store.list("workflow").empty());
}

namespace {

const std::vector<std::string> kWords{"covid", "variant", "assembly", "rna", "qc", "metagenome"};

std::vector<SearchDoc> random_docs(std::mt19937& rng, std::size_t n) {
  const std::map<std::string, std::vector<std::string>> values{
      {"class", {"galaxy", "cwl", "nextflow", "snakemake"}},
      {"tag", {"covid-19", "genomics", "qc", "teaching"}},
      {"creator", {"ada lovelace", "alan turing", "grace hopper"}},
      {"team", {"t1", "t2", "t3"}},
      {"space", {"s0", "s1"}},
      {"organisation", {"uni", "institute"}},
      {"maturity", {"stable", "work_in_progress"}},
      {"edam_topic", {"topic_0196", "topic_3170"}},
      {"edam_operation", {"operation_0525", "operation_3227"}},
      {"tool", {"bwa", "samtools", "fastqc"}}};
  std::vector<SearchDoc> docs;
  for (std::size_t i = 0; i < n; ++i) {
    SearchDoc d;
    d.id = i + 1;
    d.title = kWords[rng() % kWords.size()] + " workflow " + std::to_string(i);
    d.description = rng() % 2 ? kWords[rng() % kWords.size()] : "";
    for (const auto& [facet, pool] : values) {
      std::vector<std::string> chosen;
      const std::size_t k = facet == "class" || facet == "maturity" ? 1 : rng() % 3;
      for (std::size_t j = 0; j < k; ++j) {
        const std::string& v = pool[rng() % pool.size()];
        if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) chosen.push_back(v);
      }
      if (!chosen.empty()) d.facets[facet] = chosen;
    }
    if (d.facets.count("tag")) d.tags = d.facets.at("tag");
    if (d.facets.count("creator")) d.creator_names = d.facets.at("creator");
    d.views = rng() % 100;
    d.downloads = rng() % 100;
    d.created_at = timefmt::from_unix(1700000000 + rng() % 1000000);
    d.updated_at = d.created_at + std::chrono::seconds(rng() % 1000);
    docs.push_back(std::move(d));
  }
  return docs;
}

bool passes(const SearchDoc& d, const SearchQuery& q, const std::string& except_facet) {
  if (q.text) {
    std::set<std::string> have;
    for (const std::string* field : {&d.title, &d.description})
      for (auto& t : text::tokenize(*field)) have.insert(t);
    for (const auto* list : {&d.tags, &d.creator_names})
      for (const auto& s : *list)
        for (auto& t : text::tokenize(s)) have.insert(t);
    for (const auto& t : text::tokenize(*q.text))
      if (!have.count(t)) return false;
  }
  for (const auto& [facet, accepted] : q.facet_filters) {
    if (facet == except_facet) continue;
    auto it = d.facets.find(facet);
    if (it == d.facets.end()) return false;
    bool any = false;
    for (const auto& v : it->second) any |= accepted.count(v) > 0;
    if (!any) return false;
  }
  return true;
}

}  // namespace

TEST(Search, FacetCountsEqualBruteForce) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto docs = random_docs(rng, rng() % 51);
    SearchQuery q;
    q.page_size = 100;
    if (rng() % 3 == 0) q.text = kWords[rng() % kWords.size()];
    for (int f = 0, n = rng() % 3; f < n; ++f) {
      const std::string facet(kFacetNames[rng() % kFacetNames.size()]);
      if (docs.empty()) break;
      const SearchDoc& donor = docs[rng() % docs.size()];
      auto it = donor.facets.find(facet);
      if (it != donor.facets.end()) q.facet_filters[facet].insert(it->second[rng() % it->second.size()]);
    }
    const SearchResult result = run_search(docs, q);

    std::uint64_t total = 0;
    std::map<std::string, std::map<std::string, std::uint64_t>> expected;
    for (const auto& d : docs) {
      total += passes(d, q, "");
      for (auto facet : kFacetNames) {
        if (!passes(d, q, std::string(facet))) continue;
        auto it = d.facets.find(std::string(facet));
        if (it == d.facets.end()) continue;
        for (const auto& v : it->second) ++expected[std::string(facet)][v];
      }
    }
    ASSERT_EQ(result.total, total) << "trial " << trial;
    EXPECT_EQ(result.hits.size(), total);
    for (auto facet : kFacetNames) {
      const std::string f(facet);
      auto got = result.facet_counts.count(f) ? result.facet_counts.at(f) : std::map<std::string, std::uint64_t>{};
      std::erase_if(got, [](const auto& kv) { return kv.second == 0; });
      EXPECT_EQ(got, expected[f]) << "trial " << trial << " facet " << f;
    }
  }
}

TEST(Search, ClassFacetSumsToTotal) {
  std::mt19937 rng(5);
  const auto docs = random_docs(rng, 30);
  const SearchResult r = run_search(docs, SearchQuery{});
  EXPECT_EQ(r.total, 30u);
  std::uint64_t sum = 0;
  for (const auto& [value, n] : r.facet_counts.at("class")) sum += n;
  EXPECT_EQ(sum, r.total);
  EXPECT_EQ(r.hits.size(), 20u);
}

TEST(Search, SortingAndPaging) {
  std::mt19937 rng(11);
  const auto docs = random_docs(rng, 45);
  std::map<EntryId, const SearchDoc*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;

  SearchQuery q;
  q.sort = SortKey::views;
  q.order = SortOrder::desc;
  q.page_size = 100;
  const auto all = run_search(docs, q).hits;
  ASSERT_EQ(all.size(), 45u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GE(by_id[all[i - 1]]->views, by_id[all[i]]->views);

  q.page_size = 20;
  q.page = 3;
  const auto page3 = run_search(docs, q).hits;
  EXPECT_EQ(page3, std::vector<EntryId>(all.begin() + 40, all.end()));

  q.sort = SortKey::title;
  q.order = SortOrder::asc;
  q.page = 1;
  q.page_size = 100;
  const auto titles = run_search(docs, q).hits;
  for (std::size_t i = 1; i < titles.size(); ++i)
    EXPECT_LE(text::to_lower(by_id[titles[i - 1]]->title), text::to_lower(by_id[titles[i]]->title));
}

TEST(Search, BadQueries) {
  SearchQuery q;
  q.facet_filters["colour"] = {"red"};
  EXPECT_THROW(check_query(q), Error);
  SearchQuery zero;
  zero.page = 0;
  EXPECT_THROW(check_query(zero), Error);
  SearchQuery huge;
  huge.page_size = 101;
  EXPECT_THROW(check_query(huge), Error);
  EXPECT_THROW(parse_sort_key("popularity"), Error);
  EXPECT_EQ(parse_sort_order("desc"), SortOrder::desc);
}

TEST(Search, TextMatchingIsCaseInsensitive) {
  SearchDoc d;
  d.title = "COVID-19 variant calling";
  EXPECT_TRUE(matches_text(d, {"covid", "variant"}));
  EXPECT_FALSE(matches_text(d, {"assembly"}));
}
