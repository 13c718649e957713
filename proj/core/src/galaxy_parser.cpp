#include <algorithm>
#include <set>

#include "flowhub/error.hpp"
#include "flowhub/parsers.hpp"
#include "json.hpp"

namespace flowhub {
namespace {

using nlohmann::json;

std::optional<std::string> non_empty_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  auto value = it->get<std::string>();
  if (text::trim(value).empty()) return std::nullopt;
  return value;
}

template <typename... Rest>
std::optional<std::string> first_present(std::optional<std::string> first, Rest... rest) {
  if constexpr (sizeof...(rest) == 0) {
    return first;
  } else {
    return first ? first : first_present(rest...);
  }
}

std::string unique_id(std::string base, std::set<std::string>& taken) {
  if (base.empty()) base = "_";
  std::string candidate = base;
  for (int n = 2; taken.count(candidate); ++n) candidate = base + "_" + std::to_string(n);
  taken.insert(candidate);
  return candidate;
}

}  // namespace

WorkflowStructure parse_galaxy(std::string_view content, std::size_t max_bytes) {
  if (content.size() > max_bytes)
    throw Error(ErrorCode::size_limit, "Galaxy workflow exceeds the parse size limit");

  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed Galaxy workflow JSON", "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw Error(ErrorCode::schema_error, "Galaxy workflow is not a JSON object");
  auto steps_it = doc.find("steps");
  if (steps_it == doc.end())
    throw Error(ErrorCode::schema_error, "Galaxy workflow has no `steps` map");

  struct KeyedStep {
    unsigned long long number;
    std::string key;
    const json* step;
  };
  std::vector<KeyedStep> ordered;
  if (steps_it->is_object()) {
    for (auto it = steps_it->begin(); it != steps_it->end(); ++it) {
      const std::string& key = it.key();
      if (key.empty() || key.size() > 18 ||
          !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ParseError("non-numeric Galaxy step key", "steps/" + key);
      ordered.push_back({std::stoull(key), key, &it.value()});
    }
  } else if (steps_it->is_array()) {
    for (std::size_t i = 0; i < steps_it->size(); ++i)
      ordered.push_back({i, std::to_string(i), &(*steps_it)[i]});
  } else {
    throw Error(ErrorCode::schema_error, "Galaxy `steps` is neither an object nor an array");
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.number < b.number; });

  WorkflowStructure out;
  out.name = non_empty_string(doc, "name");
  out.description = non_empty_string(doc, "annotation");
  out.version = non_empty_string(doc, "release");
  if (auto it = doc.find("format-version"); it != doc.end()) {
    if (it->is_string()) out.language_version = it->get<std::string>();
    else if (it->is_number()) out.language_version = it->dump();
  }

  std::set<std::string> input_ids;
  std::set<std::string> output_ids;
  std::set<std::string> seen_tools;
  for (const auto& keyed : ordered) {
    const json& step = *keyed.step;
    const std::string& key = keyed.key;
    if (!step.is_object()) throw ParseError("Galaxy step is not an object", "steps/" + key);

    const std::string type = non_empty_string(step, "type").value_or("tool");
    const auto tool_id = non_empty_string(step, "tool_id");
    const auto label = non_empty_string(step, "label");

    StepDecl decl;
    decl.id = key;
    decl.label =
        first_present(label, non_empty_string(step, "name"), tool_id).value_or("step " + key);

    if (type == "data_input" || type == "data_collection_input") {
      std::optional<std::string> input_name;
      if (auto it = step.find("inputs"); it != step.end() && it->is_array() && !it->empty() &&
                                         (*it)[0].is_object())
        input_name = non_empty_string((*it)[0], "name");
      PortDecl port;
      const std::string base = first_present(label, input_name).value_or("input_" + key);
      port.id = unique_id(text::sanitize_identifier(base), input_ids);
      port.label = label ? label : input_name;
      port.data_type = type == "data_input" ? "File" : "File[]";
      out.inputs.push_back(std::move(port));
    } else if (type == "subworkflow") {
      std::string name = "subworkflow";
      if (auto it = step.find("subworkflow"); it != step.end() && it->is_object())
        name = non_empty_string(*it, "name").value_or(name);
      decl.subworkflow = name;
    } else if (tool_id) {
      ToolRef ref;
      ref.raw_id = *tool_id;
      ref.display_name = ToolMapper::strip_toolshed(*tool_id);
      decl.tool_ref = ref;
      if (seen_tools.insert(*tool_id).second) out.raw_tool_ids.push_back(*tool_id);
    }

    if (auto it = step.find("workflow_outputs"); it != step.end()) {
      if (!it->is_array())
        throw ParseError("`workflow_outputs` is not an array", "steps/" + key);
      for (const auto& wo : *it) {
        if (!wo.is_object()) continue;
        const auto out_label = non_empty_string(wo, "label");
        const auto output_name = non_empty_string(wo, "output_name").value_or("output");
        PortDecl port;
        port.id = unique_id(text::sanitize_identifier(out_label.value_or(key + "_" + output_name)),
                            output_ids);
        port.label = out_label;
        port.source_step = key;
        out.outputs.push_back(std::move(port));
      }
    }
    out.steps.push_back(std::move(decl));
  }
  return out;
}

}  // namespace flowhub
