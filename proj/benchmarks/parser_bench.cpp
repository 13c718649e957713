#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowhub/classes.hpp"
#include "flowhub/parsers.hpp"

using namespace flowhub;

namespace {

std::string slurp(const std::string& relative) {
  std::ifstream in(std::filesystem::path(FLOWHUB_FIXTURES_DIR) / relative, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void BM_ParseGalaxy(benchmark::State& state) {
  const std::string doc = slurp("galaxy/find_transcripts_tsi.ga");
  for (auto _ : state) benchmark::DoNotOptimize(parse_galaxy(doc));
  state.SetBytesProcessed(state.iterations() * doc.size());
}
BENCHMARK(BM_ParseGalaxy);

void BM_DetectClass(benchmark::State& state) {
  const ClassRegistry classes = ClassRegistry::seeded();
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& dir : std::filesystem::directory_iterator(std::filesystem::path(FLOWHUB_FIXTURES_DIR) / "classes"))
    for (const auto& f : std::filesystem::directory_iterator(dir.path()))
      files.emplace_back(f.path().filename().string(),
                         slurp("classes/" + dir.path().filename().string() + "/" + f.path().filename().string()));
  for (auto _ : state)
    for (const auto& [name, content] : files) benchmark::DoNotOptimize(detect_class(classes, name, content));
  state.SetItemsProcessed(state.iterations() * files.size());
}
BENCHMARK(BM_DetectClass);

void BM_AbstractCwlRoundTrip(benchmark::State& state) {
  WorkflowStructure w;
  for (int i = 0; i < 5; ++i) w.inputs.push_back({"input_" + std::to_string(i)});
  for (int i = 0; i < state.range(0); ++i)
    w.steps.push_back({"step_" + std::to_string(i), "Step " + std::to_string(i)});
  w.outputs.push_back({"result", std::nullopt, std::nullopt, std::nullopt, w.steps.back().id});
  for (auto _ : state) benchmark::DoNotOptimize(parse_cwl_abstract(generate_abstract_cwl(w)));
}
BENCHMARK(BM_AbstractCwlRoundTrip)->Arg(10)->Arg(100);

}  // namespace
