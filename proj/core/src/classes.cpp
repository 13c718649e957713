#include "flowhub/classes.hpp"

#include "flowhub/error.hpp"

namespace flowhub {

ClassRegistry ClassRegistry::seeded() {
  ClassRegistry registry;
  registry.add({"galaxy",
                "Galaxy",
                "GALAXY",
                {{"", R"("a_galaxy_workflow"\s*:\s*"?true)"},
                 {"*.yml", R"(class\s*:\s*GalaxyWorkflow)"},
                 {"*.yaml", R"(class\s*:\s*GalaxyWorkflow)"},
                 {"*.ga", ""}},
                "https://galaxyproject.org/"});
  registry.add({"cwl",
                "Common Workflow Language",
                "CWL",
                {{"*.yml", R"(cwlVersion\s*:)"},
                 {"*.yaml", R"(cwlVersion\s*:)"},
                 {"*.json", R"("cwlVersion"\s*:)"},
                 {"", R"(^#!.*\bcwl-runner\b)"},
                 {"*.cwl", ""}},
                "https://w3id.org/cwl/"});
  registry.add({"nextflow",
                "Nextflow",
                "NFL",
                {{"", R"(^#!.*\bnextflow\b)"}, {"*.nf", ""}, {"nextflow.config", ""}},
                "https://www.nextflow.io/"});
  registry.add({"snakemake",
                "Snakemake",
                "SMK",
                {{"", R"(^#!.*\bsnakemake\b)"},
                 {"Snakefile", ""},
                 {"*.smk", ""},
                 {"*.snakefile", ""}},
                "https://snakemake.readthedocs.io"});
  registry.add({"jupyter",
                "Jupyter",
                std::nullopt,
                {{"*.json", R"("nbformat"\s*:\s*\d)"}, {"*.ipynb", ""}},
                "https://jupyter.org"});
  registry.add({"python",
                "Python",
                std::nullopt,
                {{"", R"(^#!.*\bpython[0-9.]*\b)"}, {"*.py", ""}},
                "https://www.python.org"});
  registry.add({"bash",
                "Bash",
                std::nullopt,
                {{"", R"(^#!.*\b(bash|sh)\b)"}, {"*.sh", ""}, {"*.bash", ""}},
                "https://www.gnu.org/software/bash/"});
  registry.add({"wdl", "Workflow Description Language", "WDL", {{"*.wdl", ""}},
                "https://openwdl.org"});
  registry.add({std::string(kOtherClass), "Other", std::nullopt, {}, ""});
  return registry;
}

void ClassRegistry::add(WorkflowClass cls) {
  if (cls.id.empty()) throw Error(ErrorCode::invalid_argument, "workflow class id is empty");
  if (find(cls.id)) throw Error(ErrorCode::duplicate_item, "workflow class exists: " + cls.id);
  const std::size_t index = classes_.size();
  for (const auto& rule : cls.detection_rules) {
    if (rule.probe.empty()) {
      if (!rule.glob.empty()) glob_rules_.push_back({index, rule.glob, nullptr});
      continue;
    }
    try {
      auto re = std::make_shared<const std::regex>(rule.probe, std::regex::ECMAScript);
      probe_rules_.push_back({index, rule.glob, std::move(re)});
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::invalid_argument,
                  "bad probe for class " + cls.id + ": " + std::string(e.what()));
    }
  }
  classes_.push_back(std::move(cls));
}

const WorkflowClass* ClassRegistry::find(std::string_view id) const {
  for (const auto& cls : classes_) {
    if (cls.id == id) return &cls;
  }
  return nullptr;
}

const WorkflowClass* ClassRegistry::lookup(std::string_view id_or_name) const {
  for (const auto& cls : classes_) {
    if (text::iequals(cls.id, id_or_name) || text::iequals(cls.display_name, id_or_name))
      return &cls;
  }
  return nullptr;
}

std::optional<ClassId> ClassRegistry::match(std::string_view filename, std::string_view content,
                                            std::size_t max_bytes) const {
  if (content.size() > max_bytes)
    throw Error(ErrorCode::size_limit, std::string(filename) + " exceeds the " +
                                           std::to_string(max_bytes) + " byte parse limit");
  const std::string window(content.substr(0, kProbeWindow));
  for (const auto& rule : probe_rules_) {
    if (!rule.glob.empty() && !text::glob_match(rule.glob, filename)) continue;
    if (std::regex_search(window, *rule.probe)) return classes_[rule.class_index].id;
  }
  return match_name(filename);
}

std::optional<ClassId> ClassRegistry::match_name(std::string_view filename) const {
  for (const auto& rule : glob_rules_) {
    if (text::glob_match(rule.glob, filename)) return classes_[rule.class_index].id;
  }
  return std::nullopt;
}

ClassId detect_class(const ClassRegistry& classes, std::string_view filename,
                     std::string_view content, std::size_t max_bytes) {
  if (auto id = classes.match(filename, content, max_bytes)) return *id;
  return std::string(kOtherClass);
}

}  // namespace flowhub
