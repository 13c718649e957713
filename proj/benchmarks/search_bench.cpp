#include <benchmark/benchmark.h>

#include <random>

#include "flowhub/search.hpp"

using namespace flowhub;

namespace {

std::vector<SearchDoc> make_docs(std::size_t n) {
  std::mt19937 rng(7);
  const std::vector<std::string> words{"covid", "variant", "assembly", "rna", "qc", "metagenome"};
  const std::vector<std::string> classes{"galaxy", "cwl", "nextflow", "snakemake"};
  const std::vector<std::string> tags{"covid-19", "genomics", "qc", "teaching", "imaging"};
  std::vector<SearchDoc> docs;
  for (std::size_t i = 0; i < n; ++i) {
    SearchDoc d;
    d.id = i + 1;
    d.title = words[rng() % words.size()] + " workflow " + std::to_string(i);
    d.description = words[rng() % words.size()] + " " + words[rng() % words.size()];
    d.tags = {tags[rng() % tags.size()]};
    d.facets["class"] = {classes[rng() % classes.size()]};
    d.facets["tag"] = d.tags;
    d.facets["maturity"] = {rng() % 2 ? "stable" : "work_in_progress"};
    d.views = rng() % 1000;
    d.created_at = d.updated_at = timefmt::from_unix(1700000000 + rng() % 1000000);
    docs.push_back(std::move(d));
  }
  return docs;
}

void BM_SearchAll(benchmark::State& state) {
  const auto docs = make_docs(state.range(0));
  SearchQuery q;
  for (auto _ : state) benchmark::DoNotOptimize(run_search(docs, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchAll)->Arg(100)->Arg(1000)->Arg(10000);

void BM_SearchTextAndFacets(benchmark::State& state) {
  const auto docs = make_docs(state.range(0));
  SearchQuery q;
  q.text = "covid";
  q.facet_filters["class"] = {"galaxy", "cwl"};
  q.facet_filters["tag"] = {"genomics"};
  q.sort = SortKey::views;
  for (auto _ : state) benchmark::DoNotOptimize(run_search(docs, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchTextAndFacets)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace
