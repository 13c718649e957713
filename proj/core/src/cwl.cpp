#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>

#include "flowhub/error.hpp"
#include "flowhub/parsers.hpp"

namespace flowhub {
namespace {

constexpr int kMaxNesting = 256;

// yaml-cpp recurses per nesting level; refuse pathological inputs up front.
void check_nesting(std::string_view content) {
  int depth = 0;
  int dashes_on_line = 0;
  char quote = 0;
  for (char c : content) {
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    switch (c) {
      case '"':
      case '\'': quote = c; break;
      case '[':
      case '{':
        if (++depth > kMaxNesting) throw ParseError("document nests too deeply", "");
        break;
      case ']':
      case '}': depth = std::max(0, depth - 1); break;
      case '-':
        if (++dashes_on_line > kMaxNesting) throw ParseError("document nests too deeply", "");
        break;
      case '\n':
        dashes_on_line = 0;
        quote = 0;
        break;
      default: break;
    }
  }
}

std::string scalar(const YAML::Node& node) {
  return node && node.IsScalar() ? node.Scalar() : std::string();
}

std::string strip_fragment(std::string id) {
  if (auto hash = id.find('#'); hash != std::string::npos) id = id.substr(hash + 1);
  if (auto slash = id.rfind('/'); slash != std::string::npos) id = id.substr(slash + 1);
  return id;
}

std::string type_repr(const YAML::Node& type) {
  if (!type || type.IsNull()) return {};
  if (type.IsScalar()) return type.Scalar();
  if (type.IsSequence()) {
    bool optional = false;
    std::vector<std::string> parts;
    for (const auto& member : type) {
      std::string repr = type_repr(member);
      if (repr == "null") optional = true;
      else if (!repr.empty()) parts.push_back(repr);
    }
    std::string joined;
    for (std::size_t i = 0; i < parts.size(); ++i) joined += (i ? "|" : "") + parts[i];
    if (optional) return parts.size() == 1 ? joined + "?" : "(" + joined + ")?";
    return joined;
  }
  if (type.IsMap()) {
    const std::string kind = scalar(type["type"]);
    if (kind == "array") return type_repr(type["items"]) + "[]";
    return kind;
  }
  return {};
}

template <typename Fn>
void for_each_named(const YAML::Node& node, std::string_view what, Fn&& fn) {
  if (!node || node.IsNull()) return;
  if (node.IsMap()) {
    for (auto it = node.begin(); it != node.end(); ++it) fn(strip_fragment(scalar(it->first)), it->second);
  } else if (node.IsSequence()) {
    for (const auto& item : node) {
      if (!item.IsMap() || !item["id"])
        throw Error(ErrorCode::schema_error, "CWL " + std::string(what) + " entry without an id");
      fn(strip_fragment(scalar(item["id"])), item);
    }
  } else {
    throw Error(ErrorCode::schema_error, "CWL " + std::string(what) + " must be a map or a list");
  }
}

std::optional<std::string> edam_format_of(const YAML::Node& format) {
  if (!format) return std::nullopt;
  if (format.IsScalar()) {
    auto id = EdamVocabulary::id_from_reference(format.Scalar());
    if (id && EdamVocabulary::has_syntax(*id, EdamBranch::format)) return id;
    return std::nullopt;
  }
  if (format.IsSequence()) {
    for (const auto& f : format) {
      if (auto id = edam_format_of(f)) return id;
    }
  }
  return std::nullopt;
}

PortDecl port_from(const std::string& id, const YAML::Node& value) {
  PortDecl port;
  port.id = id;
  if (value.IsScalar() || value.IsSequence()) {
    std::string repr = type_repr(value);
    if (!repr.empty()) port.data_type = repr;
    return port;
  }
  if (value.IsMap()) {
    std::string repr = type_repr(value["type"]);
    if (!repr.empty()) port.data_type = repr;
    if (auto label = scalar(value["label"]); !label.empty()) port.label = label;
    port.edam_format = edam_format_of(value["format"]);
  }
  return port;
}

void collect_software_requirements(const YAML::Node& block, std::vector<ToolRef>& out) {
  if (!block) return;
  auto handle = [&](const std::string& cls, const YAML::Node& req) {
    if (cls != "SoftwareRequirement" || !req.IsMap()) return;
    const YAML::Node packages = req["packages"];
    auto add = [&](const std::string& name, const YAML::Node& specs) {
      if (name.empty()) return;
      ToolRef ref;
      ref.raw_id = name;
      ref.display_name = name;
      if (specs && specs.IsSequence()) {
        for (const auto& spec : specs) {
          std::string iri = scalar(spec);
          if (iri.rfind(kBiotoolsBase, 0) == 0) {
            std::string id = iri.substr(kBiotoolsBase.size());
            if (is_valid_biotools_id(id)) ref.biotools_id = text::to_lower(id);
          }
        }
      }
      out.push_back(std::move(ref));
    };
    if (packages && packages.IsSequence()) {
      for (const auto& pkg : packages) {
        if (pkg.IsMap()) add(scalar(pkg["package"]), pkg["specs"]);
        else add(scalar(pkg), YAML::Node());
      }
    } else if (packages && packages.IsMap()) {
      for (auto it = packages.begin(); it != packages.end(); ++it)
        add(scalar(it->first), it->second.IsMap() ? it->second["specs"] : YAML::Node());
    }
  };
  if (block.IsSequence()) {
    for (const auto& req : block) {
      if (req.IsMap()) handle(scalar(req["class"]), req);
    }
  } else if (block.IsMap()) {
    for (auto it = block.begin(); it != block.end(); ++it) handle(scalar(it->first), it->second);
  }
}

StepDecl step_from(const std::string& id, const YAML::Node& value) {
  StepDecl step;
  step.id = id;
  step.label = id;
  if (!value.IsMap()) throw Error(ErrorCode::schema_error, "CWL step `" + id + "` is not a map");
  if (auto label = scalar(value["label"]); !label.empty()) step.label = label;
  const YAML::Node run = value["run"];
  if (run && run.IsScalar()) {
    std::string target = run.Scalar();
    if (auto hash = target.find('#'); hash != std::string::npos && hash > 0)
      target = target.substr(0, hash);
    std::string stem = text::basename(target);
    if (auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    if (!target.empty() && target.front() == '#') stem = strip_fragment(target);
    ToolRef ref;
    ref.raw_id = stem;
    ref.display_name = stem;
    step.tool_ref = ref;
  } else if (run && run.IsMap()) {
    if (scalar(run["class"]) == "Workflow") {
      std::string name = scalar(run["label"]);
      if (name.empty()) name = strip_fragment(scalar(run["id"]));
      step.subworkflow = name.empty() ? "inline" : name;
    } else {
      std::vector<ToolRef> refs;
      collect_software_requirements(run["hints"], refs);
      collect_software_requirements(run["requirements"], refs);
      collect_software_requirements(value["hints"], refs);
      if (!refs.empty()) {
        step.tool_ref = refs.front();
      } else if (const YAML::Node base = run["baseCommand"]; base) {
        std::string cmd = base.IsSequence() && base.size() > 0 ? scalar(base[0]) : scalar(base);
        if (!cmd.empty()) step.tool_ref = ToolRef{cmd, std::nullopt, cmd};
      }
    }
  }
  return step;
}

std::optional<std::string> output_source_step(const YAML::Node& value) {
  if (!value.IsMap()) return std::nullopt;
  YAML::Node src = value["outputSource"];
  if (src && src.IsSequence() && src.size() > 0) src.reset(src[0]);
  std::string s = scalar(src);
  if (!s.empty() && s.front() == '#') s.erase(0, 1);
  auto parts = text::split(s, '/');
  if (parts.size() >= 3) return parts[parts.size() - 2];
  if (parts.size() == 2) return parts[0];
  return std::nullopt;
}

void add_unique(std::vector<std::string>& list, const std::string& id) {
  if (std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
}

void collect_annotations(const YAML::Node& doc, const EdamVocabulary& vocab,
                         WorkflowStructure& out) {
  enum class Target { topics, operations, either };
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key = scalar(it->first);
    Target target;
    if (key == "intent" || key == "edam:has_operation") target = Target::operations;
    else if (key == "edam:has_topic" || (key.size() > 6 && key.substr(key.size() - 6) == ":about"))
      target = Target::topics;
    else if (key.size() > 9 && key.substr(key.size() - 9) == ":keywords") target = Target::either;
    else continue;

    std::vector<std::string> values;
    if (it->second.IsScalar()) values.push_back(it->second.Scalar());
    else if (it->second.IsSequence()) {
      for (const auto& v : it->second) {
        if (v.IsScalar()) values.push_back(v.Scalar());
        else if (v.IsMap()) values.push_back(scalar(v["@id"]).empty() ? scalar(v["id"]) : scalar(v["@id"]));
      }
    }
    // Keywords are often a single comma-separated string.
    if (target == Target::either && values.size() == 1 && values[0].find(',') != std::string::npos) {
      auto pieces = text::split(values[0], ',');
      values.assign(pieces.begin(), pieces.end());
    }
    for (const auto& raw : values) {
      const std::string value(text::trim(raw));
      if (value.empty()) continue;
      std::optional<std::string> topic, operation;
      if (target != Target::operations) topic = vocab.resolve(value, EdamBranch::topic);
      if (target != Target::topics) operation = vocab.resolve(value, EdamBranch::operation);
      if (topic) add_unique(out.edam_topics, *topic);
      else if (operation) add_unique(out.edam_operations, *operation);
    }
  }
}

YAML::Node select_workflow(const YAML::Node& root) {
  const YAML::Node graph = root["$graph"];
  if (!graph) return root;
  if (!graph.IsSequence()) throw Error(ErrorCode::schema_error, "CWL `$graph` must be a list");
  YAML::Node first_workflow;
  bool found = false;
  for (const auto& item : graph) {
    if (!item.IsMap()) continue;
    const std::string id = scalar(item["id"]);
    if (id == "#main" || id == "main") return item;
    if (!found && scalar(item["class"]) == "Workflow") {
      first_workflow.reset(item);
      found = true;
    }
  }
  if (found) return first_workflow;
  throw Error(ErrorCode::not_a_workflow, "packed CWL document has no Workflow process");
}

}  // namespace

WorkflowStructure parse_cwl_abstract(std::string_view content, const EdamVocabulary& vocab,
                                     std::size_t max_bytes) {
  if (content.size() > max_bytes)
    throw Error(ErrorCode::size_limit, "CWL document exceeds the parse size limit");
  check_nesting(content);

  YAML::Node root;
  try {
    root = YAML::Load(std::string(content));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed CWL document: " + e.msg,
                     "line " + std::to_string(e.mark.line + 1) + ", column " +
                         std::to_string(e.mark.column + 1));
  }
  if (!root.IsMap()) throw Error(ErrorCode::not_a_workflow, "CWL document is not a mapping");

  try {
    const YAML::Node doc = select_workflow(root);
    const std::string cls = scalar(doc["class"]);
    if (cls != "Workflow")
      throw Error(ErrorCode::not_a_workflow,
                  "CWL class is `" + (cls.empty() ? std::string("<none>") : cls) + "`, not Workflow");

    WorkflowStructure out;
    if (auto label = scalar(doc["label"]); !label.empty()) out.name = label;
    else if (auto id = strip_fragment(scalar(doc["id"])); !id.empty()) out.name = id;
    if (auto d = scalar(doc["doc"]); !d.empty()) out.description = d;
    if (auto v = scalar(root["cwlVersion"]); !v.empty()) out.language_version = v;

    for_each_named(doc["inputs"], "input",
                   [&](const std::string& id, const YAML::Node& v) { out.inputs.push_back(port_from(id, v)); });
    for_each_named(doc["outputs"], "output", [&](const std::string& id, const YAML::Node& v) {
      PortDecl port = port_from(id, v);
      port.source_step = output_source_step(v);
      out.outputs.push_back(std::move(port));
    });
    for_each_named(doc["steps"], "step",
                   [&](const std::string& id, const YAML::Node& v) { out.steps.push_back(step_from(id, v)); });

    std::set<std::string> step_ids;
    for (const auto& step : out.steps) {
      if (!step_ids.insert(step.id).second)
        throw Error(ErrorCode::schema_error, "duplicate CWL step id `" + step.id + "`");
      if (step.tool_ref) add_unique(out.raw_tool_ids, step.tool_ref->raw_id);
    }
    for (const auto& port : out.outputs) {
      if (port.source_step && !step_ids.count(*port.source_step))
        throw Error(ErrorCode::schema_error, "output `" + port.id + "` references unknown step `" +
                                                 *port.source_step + "`");
    }
    collect_annotations(doc, vocab, out);
    if (root["$graph"]) collect_annotations(root, vocab, out);
    return out;
  } catch (const YAML::Exception& e) {
    throw ParseError("unexpected CWL structure: " + e.msg,
                     "line " + std::to_string(e.mark.line + 1));
  }
}

// ---------------------------------------------------------------------------

void check_structure(const WorkflowStructure& s) {
  auto check_ids = [](const auto& items, std::string_view what) {
    std::set<std::string> seen;
    for (const auto& item : items) {
      if (item.id.empty())
        throw Error(ErrorCode::invalid_structure, "empty " + std::string(what) + " id");
      if (item.id.find_first_of("/#") != std::string::npos)
        throw Error(ErrorCode::invalid_structure,
                    std::string(what) + " id `" + item.id + "` contains `/` or `#`");
      if (!seen.insert(item.id).second)
        throw Error(ErrorCode::invalid_structure,
                    "duplicate " + std::string(what) + " id `" + item.id + "`");
    }
    return seen;
  };
  check_ids(s.inputs, "input");
  check_ids(s.outputs, "output");
  const auto steps = check_ids(s.steps, "step");
  for (const auto& step : s.steps) {
    if (step.tool_ref && step.subworkflow)
      throw Error(ErrorCode::invalid_structure,
                  "step `" + step.id + "` has both a tool and a subworkflow");
  }
  for (const auto& out : s.outputs) {
    if (out.source_step && !steps.count(*out.source_step))
      throw Error(ErrorCode::invalid_structure,
                  "output `" + out.id + "` references unknown step `" + *out.source_step + "`");
  }
}

std::string generate_abstract_cwl(const WorkflowStructure& s) {
  check_structure(s);

  auto empty_map = [](YAML::Emitter& e) { e << YAML::Flow << YAML::BeginMap << YAML::EndMap; };

  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "cwlVersion" << YAML::Value << "v1.2";
  e << YAML::Key << "class" << YAML::Value << "Workflow";
  if (s.name) e << YAML::Key << "label" << YAML::Value << *s.name;
  if (s.description) e << YAML::Key << "doc" << YAML::Value << *s.description;
  if (!s.edam_topics.empty() || !s.edam_operations.empty()) {
    e << YAML::Key << "$namespaces" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "edam" << YAML::Value << std::string(kEdamBase);
    e << YAML::Key << "s" << YAML::Value << "https://schema.org/";
    e << YAML::EndMap;
  }
  if (!s.edam_operations.empty()) {
    e << YAML::Key << "intent" << YAML::Value << YAML::BeginSeq;
    for (const auto& op : s.edam_operations) e << EdamVocabulary::iri(op);
    e << YAML::EndSeq;
  }
  if (!s.edam_topics.empty()) {
    e << YAML::Key << "s:about" << YAML::Value << YAML::BeginSeq;
    for (const auto& topic : s.edam_topics) e << EdamVocabulary::iri(topic);
    e << YAML::EndSeq;
  }

  e << YAML::Key << "inputs" << YAML::Value;
  if (s.inputs.empty()) {
    empty_map(e);
  } else {
    e << YAML::BeginMap;
    for (const auto& in : s.inputs) {
      e << YAML::Key << in.id << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "type" << YAML::Value << in.data_type.value_or("Any");
      if (in.label) e << YAML::Key << "label" << YAML::Value << *in.label;
      if (in.edam_format)
        e << YAML::Key << "format" << YAML::Value << EdamVocabulary::iri(*in.edam_format);
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }

  e << YAML::Key << "outputs" << YAML::Value;
  if (s.outputs.empty()) {
    empty_map(e);
  } else {
    e << YAML::BeginMap;
    for (const auto& out : s.outputs) {
      e << YAML::Key << out.id << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "type" << YAML::Value << out.data_type.value_or("Any");
      if (out.label) e << YAML::Key << "label" << YAML::Value << *out.label;
      if (out.edam_format)
        e << YAML::Key << "format" << YAML::Value << EdamVocabulary::iri(*out.edam_format);
      if (out.source_step)
        e << YAML::Key << "outputSource" << YAML::Value << *out.source_step + "/" + out.id;
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }

  e << YAML::Key << "steps" << YAML::Value;
  if (s.steps.empty()) {
    empty_map(e);
  } else {
    e << YAML::BeginMap;
    for (const auto& step : s.steps) {
      std::vector<std::string> produced;
      for (const auto& out : s.outputs) {
        if (out.source_step == step.id) produced.push_back(out.id);
      }
      e << YAML::Key << step.id << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "label" << YAML::Value << step.label;
      e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
      if (step.subworkflow) {
        e << YAML::Key << "class" << YAML::Value << "Workflow";
        e << YAML::Key << "label" << YAML::Value << *step.subworkflow;
        e << YAML::Key << "inputs" << YAML::Value;
        empty_map(e);
        e << YAML::Key << "outputs" << YAML::Value;
        empty_map(e);
        e << YAML::Key << "steps" << YAML::Value;
        empty_map(e);
      } else {
        e << YAML::Key << "class" << YAML::Value << "Operation";
        e << YAML::Key << "inputs" << YAML::Value;
        empty_map(e);
        e << YAML::Key << "outputs" << YAML::Value;
        if (produced.empty()) {
          empty_map(e);
        } else {
          e << YAML::BeginMap;
          for (const auto& id : produced) {
            e << YAML::Key << id << YAML::Value << YAML::BeginMap << YAML::Key << "type"
              << YAML::Value << "Any" << YAML::EndMap;
          }
          e << YAML::EndMap;
        }
        if (step.tool_ref) {
          e << YAML::Key << "hints" << YAML::Value << YAML::BeginSeq << YAML::BeginMap;
          e << YAML::Key << "class" << YAML::Value << "SoftwareRequirement";
          e << YAML::Key << "packages" << YAML::Value << YAML::BeginSeq << YAML::BeginMap;
          e << YAML::Key << "package" << YAML::Value << step.tool_ref->raw_id;
          if (step.tool_ref->biotools_id) {
            e << YAML::Key << "specs" << YAML::Value << YAML::BeginSeq
              << std::string(kBiotoolsBase) + *step.tool_ref->biotools_id << YAML::EndSeq;
          }
          e << YAML::EndMap << YAML::EndSeq;
          e << YAML::EndMap << YAML::EndSeq;
        }
      }
      e << YAML::EndMap;  // run
      e << YAML::Key << "in" << YAML::Value;
      empty_map(e);
      e << YAML::Key << "out" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& id : produced) e << id;
      e << YAML::EndSeq;
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  if (!e.good()) throw Error(ErrorCode::invalid_structure, "YAML emitter: " + e.GetLastError());
  return std::string(e.c_str()) + "\n";
}

}  // namespace flowhub
