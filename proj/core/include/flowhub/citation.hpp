#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowhub/model.hpp"

namespace flowhub {

struct CitationAuthor {
  std::string family;
  std::string given;
  /// Bare ORCID id (prefix stripped, check character upper-cased).
  std::optional<std::string> orcid;
  std::optional<std::string> affiliation;

  /// "Given Family", or whichever part is present.
  std::string full_name() const;
  bool operator==(const CitationAuthor&) const = default;
};

struct CitationMetadata {
  std::string title;
  std::vector<CitationAuthor> authors;
  std::optional<std::string> version;
  std::optional<std::string> doi;
  std::optional<std::string> license;
  /// `preferred-citation` rendered as a one-line reference.
  std::optional<std::string> preferred_citation;

  std::vector<Creator> creators() const;
  bool operator==(const CitationMetadata&) const = default;
};

/// Parses a CITATION.cff (YAML). Throws ParseError on YAML syntax errors and
/// Error(schema_error) when `authors` is missing, empty or not a list.
CitationMetadata parse_citation_cff(std::string_view content);

}  // namespace flowhub
