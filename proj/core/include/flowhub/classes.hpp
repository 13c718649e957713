#pragma once

#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/model.hpp"

namespace flowhub {

inline constexpr std::string_view kOtherClass = "other";
inline constexpr std::size_t kDefaultMaxParseBytes = 16u * 1024 * 1024;
inline constexpr std::size_t kProbeWindow = 64u * 1024;

/// Ordered set of workflow classes. Seeded with Galaxy, CWL, Nextflow,
/// Snakemake, Jupyter, Python, Bash, WDL and Other; more can be added at
/// runtime.
class ClassRegistry {
 public:
  static ClassRegistry seeded();

  /// Throws Error(duplicate_item) when the id exists, Error(invalid_argument)
  /// for an uncompilable probe.
  void add(WorkflowClass cls);

  const WorkflowClass* find(std::string_view id) const;
  /// Case-insensitive match on id or display name.
  const WorkflowClass* lookup(std::string_view id_or_name) const;
  const std::vector<WorkflowClass>& all() const { return classes_; }

  /// Tries every content-probe rule (in class order) before any glob-only
  /// rule. Returns nullopt when nothing matches; callers fall back to Other.
  /// Throws Error(size_limit) when content exceeds max_bytes.
  std::optional<ClassId> match(std::string_view filename, std::string_view content,
                               std::size_t max_bytes = kDefaultMaxParseBytes) const;

  /// Glob-only variant used for files too large to probe.
  std::optional<ClassId> match_name(std::string_view filename) const;

 private:
  struct CompiledRule {
    std::size_t class_index;
    std::string glob;
    std::shared_ptr<const std::regex> probe;
  };

  std::vector<WorkflowClass> classes_;
  std::vector<CompiledRule> probe_rules_;
  std::vector<CompiledRule> glob_rules_;
};

/// Deterministic class detection: matching rule, else "other".
ClassId detect_class(const ClassRegistry& classes, std::string_view filename,
                     std::string_view content, std::size_t max_bytes = kDefaultMaxParseBytes);

}  // namespace flowhub
