#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "flowhub/error.hpp"
#include "flowhub/parsers.hpp"
#include "support.hpp"

using namespace flowhub;
using flowhub::testing::fixture;
using flowhub::testing::load_tree;
using flowhub::testing::read_file;

namespace fs = std::filesystem;

TEST(ClassDetection, CorpusIsClassifiedByDirectory) {
  const ClassRegistry classes = ClassRegistry::seeded();
  std::map<std::string, int> per_class;
  for (const auto& dir : fs::directory_iterator(fixture("classes"))) {
    const std::string expected = dir.path().filename().string();
    for (const auto& file : fs::directory_iterator(dir.path())) {
      const std::string name = file.path().filename().string();
      EXPECT_EQ(detect_class(classes, name, read_file(file.path())), expected) << expected << "/" << name;
      ++per_class[expected];
    }
  }
  EXPECT_EQ(per_class.size(), 9u);
  for (const auto& [cls, n] : per_class) EXPECT_GE(n, 5) << cls;
}

TEST(ClassDetection, SpecExamples) {
  const ClassRegistry classes = ClassRegistry::seeded();
  EXPECT_EQ(detect_class(classes, "wf.ga", R"({"a_galaxy_workflow": "true", "steps": {}})"), "galaxy");
  EXPECT_EQ(detect_class(classes, "main.nf", "workflow { }\n"), "nextflow");
  EXPECT_EQ(detect_class(classes, "notes.txt", ""), "other");
}

TEST(ClassDetection, OversizedContentIsRejected) {
  const ClassRegistry classes = ClassRegistry::seeded();
  EXPECT_THROW(classes.match("big.ga", std::string(2048, 'x'), 1024), Error);
  EXPECT_EQ(classes.match_name("big.ga"), std::optional<ClassId>("galaxy"));
}

TEST(ClassDetection, RuntimeClassesCanBeAdded) {
  ClassRegistry classes = ClassRegistry::seeded();
  classes.add({"toil", "Toil", std::nullopt, {{"*.toil", ""}}, ""});
  EXPECT_EQ(detect_class(classes, "x.toil", "x"), "toil");
  EXPECT_THROW(classes.add({"toil", "Toil", std::nullopt, {}, ""}), Error);
  EXPECT_NE(classes.lookup("GALAXY"), nullptr);
}

TEST(Galaxy, TsiFixtureCounts) {
  const auto s = parse_galaxy(read_file(fixture("galaxy/find_transcripts_tsi.ga")));
  EXPECT_EQ(s.inputs.size(), 3u);
  EXPECT_EQ(s.steps.size(), 9u);
  EXPECT_EQ(s.outputs.size(), 6u);
  EXPECT_EQ(s.raw_tool_ids.size(), 4u);
  EXPECT_EQ(s.name, std::optional<std::string>("Find transcripts - TSI"));
  ASSERT_FALSE(s.inputs.empty());
  EXPECT_EQ(s.inputs[0].label, std::optional<std::string>("RNA-seq reads"));
}

TEST(Galaxy, ThreeStepFixtureCounts) {
  const auto s = parse_galaxy(read_file(fixture("galaxy/qc_trim_three_step.ga")));
  EXPECT_EQ(s.inputs.size(), 1u);
  EXPECT_EQ(s.steps.size(), 3u);
  EXPECT_EQ(s.outputs.size(), 2u);
  ASSERT_EQ(s.raw_tool_ids.size(), 2u);
  EXPECT_NE(s.raw_tool_ids[0].find("fastqc"), std::string::npos);
  EXPECT_NE(s.raw_tool_ids[1].find("trimmomatic"), std::string::npos);
}

TEST(Galaxy, ZeroStepsGivesEmptyLists) {
  const auto s = parse_galaxy(read_file(fixture("galaxy/zero_steps.ga")));
  EXPECT_TRUE(s.steps.empty());
  EXPECT_TRUE(s.inputs.empty());
  EXPECT_TRUE(s.outputs.empty());
}

TEST(Galaxy, MalformedInputThrows) {
  EXPECT_THROW(parse_galaxy("{not json"), Error);
  EXPECT_THROW(parse_galaxy("[1, 2]"), Error);
  EXPECT_THROW(parse_galaxy(std::string(100, ' '), 10), Error);
}

TEST(Cwl, MinimalWorkflowCounts) {
  const auto s = parse_cwl_abstract(R"(cwlVersion: v1.2
class: Workflow
inputs:
  reads: File
outputs:
  report:
    type: File
    outputSource: qc/report
steps:
  qc:
    run: qc.cwl
    in: {reads: reads}
    out: [report]
)");
  EXPECT_EQ(s.inputs.size(), 1u);
  EXPECT_EQ(s.steps.size(), 1u);
  EXPECT_EQ(s.outputs.size(), 1u);
  EXPECT_EQ(s.outputs[0].source_step, std::optional<std::string>("qc"));
  EXPECT_EQ(s.language_version, std::optional<std::string>("v1.2"));
}

TEST(Cwl, EdamFormatAndOperation) {
  const auto s = parse_cwl_abstract(R"(cwlVersion: v1.2
class: Workflow
intent: [genome assembly]
inputs:
  reads:
    type: File
    format: http://edamontology.org/format_1929
outputs: []
steps: []
)");
  ASSERT_EQ(s.inputs.size(), 1u);
  EXPECT_EQ(s.inputs[0].edam_format, std::optional<std::string>("format_1929"));
  EXPECT_EQ(s.edam_operations, std::vector<std::string>{"operation_0525"});
}

TEST(Cwl, ToolClassIsNotAWorkflow) {
  try {
    parse_cwl_abstract("cwlVersion: v1.2\nclass: CommandLineTool\nbaseCommand: echo\ninputs: []\noutputs: []\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_a_workflow);
  }
}

TEST(Cwl, PackedGraphResolvesMain) {
  const auto s = parse_cwl_abstract(R"({"cwlVersion": "v1.2", "$graph": [
    {"id": "#tool", "class": "CommandLineTool", "inputs": [], "outputs": []},
    {"id": "#main", "class": "Workflow", "inputs": [{"id": "x", "type": "File"}], "outputs": [],
     "steps": [{"id": "s", "run": "#tool", "in": [], "out": []}]}]})");
  EXPECT_EQ(s.inputs.size(), 1u);
  EXPECT_EQ(s.steps.size(), 1u);
  try {
    parse_cwl_abstract(read_file(fixture("classes/cwl/packed.json")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_a_workflow);
  }
}

TEST(Nextflow, ManifestName) {
  FileTree files{{"nextflow.config", {"manifest {\n  name = 'nf-core/demo'\n  nextflowVersion = '!>=23.04'\n}\n", ""}}};
  const auto s = parse_nextflow_manifest(files);
  EXPECT_EQ(s.name, std::optional<std::string>("nf-core/demo"));
  EXPECT_EQ(s.language_version, std::optional<std::string>("!>=23.04"));
  EXPECT_TRUE(s.steps.empty());
}

TEST(Nextflow, EmptyConfigGivesEmptyStructure) {
  const auto s = parse_nextflow_manifest({{"nextflow.config", {"", ""}}});
  EXPECT_EQ(s, WorkflowStructure{});
}

TEST(Nextflow, MissingFilesThrow) {
  EXPECT_THROW(parse_nextflow_manifest({{"README.md", {"x", ""}}}), Error);
}

TEST(Snakemake, ThreeRules) {
  FileTree files{{"Snakefile", {"rule all:\n    input: 'x'\n\nrule map:\n    shell: 'bwa'\n\nrule call:\n    shell: 'x'\n", ""}}};
  const auto s = parse_snakemake(files);
  ASSERT_EQ(s.steps.size(), 3u);
  EXPECT_EQ(s.steps[0].id, "all");
  EXPECT_EQ(s.steps[1].id, "map");
  EXPECT_EQ(s.steps[2].id, "call");
}

TEST(Snakemake, EmptySnakefile) {
  EXPECT_TRUE(parse_snakemake({{"Snakefile", {"", ""}}}).steps.empty());
}

TEST(Snakemake, VarlociraptorLayoutFollowsIncludes) {
  const FileTree files = load_tree(fixture("repos/dna-seq-varlociraptor"));
  const ClassRegistry classes = ClassRegistry::seeded();
  EXPECT_EQ(detect_class(classes, "workflow/Snakefile", files.at("workflow/Snakefile").bytes), "snakemake");
  const auto s = parse_snakemake(files);
  std::vector<std::string> ids;
  for (const auto& step : s.steps) ids.push_back(step.id);
  const std::vector<std::string> expected{"get_genome",      "genome_faidx",     "bwa_index",     "map_reads",
                                          "mark_duplicates", "freebayes",        "split_candidates",
                                          "call_variants",   "merge_calls",      "all"};
  EXPECT_EQ(ids, expected);
}

TEST(ToolMapper, ToolshedIdsAndTable) {
  const ToolMapper& mapper = ToolMapper::bundled();
  EXPECT_EQ(mapper.map_one("toolshed.g2.bx.psu.edu/repos/devteam/bwa/bwa/0.7.17.4").biotools_id,
            std::optional<std::string>("bwa"));
  EXPECT_EQ(mapper.map_one("my_local_tool").biotools_id, std::nullopt);

  const ToolMapper custom = ToolMapper::parse("bwa\nsamtools\n", "toolshed.g2.bx.psu.edu/repos/devteam/bwa/bwa/0.7.17.4\tsamtools\n");
  EXPECT_EQ(custom.map_one("toolshed.g2.bx.psu.edu/repos/devteam/bwa/bwa/0.7.17.4").biotools_id,
            std::optional<std::string>("samtools"));
  EXPECT_EQ(ToolMapper::strip_toolshed("toolshed.g2.bx.psu.edu/repos/iuc/hisat2/hisat2/2.2.1"), "hisat2");
}

TEST(AbstractCwl, EmptyStructure) {
  const auto s = parse_cwl_abstract(generate_abstract_cwl(WorkflowStructure{}));
  EXPECT_TRUE(s.inputs.empty());
  EXPECT_TRUE(s.outputs.empty());
  EXPECT_TRUE(s.steps.empty());
}

TEST(AbstractCwl, TwoInputsOneOutputTwoSteps) {
  WorkflowStructure w;
  w.inputs = {{"reads"}, {"reference"}};
  w.steps = {{"align", "Align", ToolRef{"bwa", "bwa", "bwa"}}, {"call", "Call"}};
  w.outputs = {{"variants", std::nullopt, std::nullopt, std::nullopt, "call"}};
  const auto back = parse_cwl_abstract(generate_abstract_cwl(w));
  ASSERT_EQ(back.inputs.size(), 2u);
  EXPECT_EQ(back.inputs[1].id, "reference");
  ASSERT_EQ(back.steps.size(), 2u);
  EXPECT_EQ(back.steps[0].id, "align");
  ASSERT_EQ(back.outputs.size(), 1u);
  EXPECT_EQ(back.outputs[0].source_step, std::optional<std::string>("call"));
}

TEST(AbstractCwl, FromGalaxyKeepsStepCount) {
  const auto galaxy = parse_galaxy(read_file(fixture("galaxy/find_transcripts_tsi.ga")));
  const auto back = parse_cwl_abstract(generate_abstract_cwl(galaxy));
  EXPECT_EQ(back.steps.size(), galaxy.steps.size());
  EXPECT_EQ(back.inputs.size(), galaxy.inputs.size());
  EXPECT_EQ(back.outputs.size(), galaxy.outputs.size());
}

TEST(AbstractCwl, RandomStructuresRoundTrip) {
  std::mt19937 rng(20240301);
  for (int trial = 0; trial < 100; ++trial) {
    WorkflowStructure w;
    const int n_in = rng() % 5, n_steps = rng() % 7, n_out = n_steps ? rng() % 4 : 0;
    for (int i = 0; i < n_in; ++i) w.inputs.push_back({"in_" + std::to_string(trial) + "_" + std::to_string(i)});
    for (int i = 0; i < n_steps; ++i) w.steps.push_back({"step_" + std::to_string(i), "Step " + std::to_string(i)});
    for (int i = 0; i < n_out; ++i)
      w.outputs.push_back({"out_" + std::to_string(i), std::nullopt, std::nullopt, std::nullopt,
                           w.steps[rng() % n_steps].id});
    const auto back = parse_cwl_abstract(generate_abstract_cwl(w));
    ASSERT_EQ(back.inputs.size(), w.inputs.size()) << trial;
    ASSERT_EQ(back.steps.size(), w.steps.size()) << trial;
    ASSERT_EQ(back.outputs.size(), w.outputs.size()) << trial;
    for (std::size_t i = 0; i < w.inputs.size(); ++i) EXPECT_EQ(back.inputs[i].id, w.inputs[i].id);
    for (std::size_t i = 0; i < w.steps.size(); ++i) EXPECT_EQ(back.steps[i].id, w.steps[i].id);
    for (std::size_t i = 0; i < w.outputs.size(); ++i) {
      EXPECT_EQ(back.outputs[i].id, w.outputs[i].id);
      EXPECT_EQ(back.outputs[i].source_step, w.outputs[i].source_step);
    }
  }
}

TEST(AbstractCwl, InvalidStructuresAreRejected) {
  WorkflowStructure dup;
  dup.inputs = {{"x"}, {"x"}};
  EXPECT_THROW(check_structure(dup), Error);
  WorkflowStructure slash;
  slash.steps = {{"a/b", "bad"}};
  EXPECT_THROW(generate_abstract_cwl(slash), Error);
  WorkflowStructure dangling;
  dangling.outputs = {{"o", std::nullopt, std::nullopt, std::nullopt, "missing"}};
  EXPECT_THROW(check_structure(dangling), Error);
}
