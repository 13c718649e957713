#include "flowhub/citation.hpp"

#include <yaml-cpp/yaml.h>

#include "flowhub/error.hpp"

namespace flowhub {
namespace {

std::optional<std::string> text_field(const YAML::Node& node, const char* key) {
  const YAML::Node value = node[key];
  if (!value || !value.IsScalar()) return std::nullopt;
  std::string s(text::trim(value.Scalar()));
  if (s.empty()) return std::nullopt;
  return s;
}

CitationAuthor read_author(const YAML::Node& node, std::size_t index) {
  if (!node.IsMap())
    throw Error(ErrorCode::schema_error, "author " + std::to_string(index) + " is not a mapping");
  CitationAuthor author;
  author.family = text_field(node, "family-names").value_or("");
  author.given = text_field(node, "given-names").value_or("");
  if (author.family.empty() && author.given.empty()) {
    // Entity authors (organisations, projects) carry a single `name`.
    author.family = text_field(node, "name").value_or("");
  }
  if (author.family.empty() && author.given.empty())
    throw Error(ErrorCode::schema_error, "author " + std::to_string(index) + " has no name");
  if (auto orcid = text_field(node, "orcid")) author.orcid = normalize_orcid(*orcid);
  author.affiliation = text_field(node, "affiliation");
  return author;
}

std::string render_reference(const YAML::Node& ref) {
  if (ref.IsScalar()) return ref.Scalar();
  std::vector<std::string> names;
  if (const YAML::Node authors = ref["authors"]; authors && authors.IsSequence()) {
    for (std::size_t i = 0; i < authors.size(); ++i) {
      try {
        names.push_back(read_author(authors[i], i).full_name());
      } catch (const Error&) {
      }
    }
  }
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  if (auto year = text_field(ref, "year")) out += (out.empty() ? "" : " ") + ("(" + *year + ")");
  if (!out.empty()) out += ".";
  if (auto title = text_field(ref, "title")) out += (out.empty() ? "" : " ") + *title + ".";
  std::optional<std::string> venue = text_field(ref, "journal");
  if (!venue) venue = text_field(ref, "conference");
  if (!venue) {
    if (const YAML::Node conf = ref["conference"]; conf && conf.IsMap()) venue = text_field(conf, "name");
  }
  if (venue) out += " " + *venue + ".";
  if (auto doi = text_field(ref, "doi")) out += " https://doi.org/" + *doi;
  else if (auto url = text_field(ref, "url")) out += " " + *url;
  return std::string(text::trim(out));
}

}  // namespace

std::string CitationAuthor::full_name() const {
  if (given.empty()) return family;
  if (family.empty()) return given;
  return given + " " + family;
}

std::vector<Creator> CitationMetadata::creators() const {
  std::vector<Creator> out;
  out.reserve(authors.size());
  for (const auto& a : authors) out.push_back(Creator{a.full_name(), a.orcid, a.affiliation});
  return out;
}

CitationMetadata parse_citation_cff(std::string_view content) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(content));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed CITATION.cff: " + e.msg,
                     "line " + std::to_string(e.mark.line + 1));
  }
  if (!doc.IsMap()) throw Error(ErrorCode::schema_error, "CITATION.cff is not a mapping");

  try {
    const YAML::Node authors = doc["authors"];
    if (!authors) throw Error(ErrorCode::schema_error, "CITATION.cff has no `authors`");
    if (!authors.IsSequence() || authors.size() == 0)
      throw Error(ErrorCode::schema_error, "CITATION.cff `authors` must be a non-empty list");

    CitationMetadata out;
    out.title = text_field(doc, "title").value_or("");
    for (std::size_t i = 0; i < authors.size(); ++i) out.authors.push_back(read_author(authors[i], i));
    out.version = text_field(doc, "version");
    out.doi = text_field(doc, "doi");
    out.license = text_field(doc, "license");
    if (const YAML::Node preferred = doc["preferred-citation"]; preferred) {
      std::string rendered = render_reference(preferred);
      if (!rendered.empty()) out.preferred_citation = rendered;
    }
    return out;
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::schema_error, "unexpected CITATION.cff structure: " + e.msg);
  }
}

}  // namespace flowhub
