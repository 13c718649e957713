#include "flowhub/config.hpp"

#include <fstream>
#include <sstream>

#include "flowhub/error.hpp"

namespace flowhub {
namespace {

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::invalid_argument, "config line " + std::to_string(line) + ": " + what);
}

std::string unquote(std::string_view v, std::size_t line) {
  if (v.size() >= 2 && v.front() == '"') {
    if (v.back() != '"') bad(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }
  // Unquoted values end at an inline comment.
  auto hash = v.find(" #");
  if (hash != std::string_view::npos) v = text::trim(v.substr(0, hash));
  return std::string(v);
}

bool parse_bool(const std::string& v, std::size_t line) {
  const std::string l = text::to_lower(v);
  if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
  if (l == "false" || l == "no" || l == "off" || l == "0") return false;
  bad(line, "expected a boolean, got `" + v + "`");
}

std::int64_t parse_int(const std::string& v, std::size_t line, std::int64_t min) {
  std::size_t used = 0;
  std::int64_t n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    bad(line, "expected an integer, got `" + v + "`");
  }
  if (used != v.size() || n < min) bad(line, "expected an integer >= " + std::to_string(min) + ", got `" + v + "`");
  return n;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& part : text::split(v, ',')) {
    auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

Config parse_config(std::string_view text) {
  Config config;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad(line_no, "malformed section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(line_no, "expected key = value");
    std::string key(text::trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    const std::string value = unquote(text::trim(line.substr(eq + 1)), line_no);

    if (key == "doi_prefix") {
      if (value.rfind("10.", 0) != 0) bad(line_no, "doi_prefix must start with 10.");
      config.doi_prefix = value;
    } else if (key == "base_url") {
      config.base_url = value;
      while (!config.base_url.empty() && config.base_url.back() == '/') config.base_url.pop_back();
    } else if (key == "publisher") {
      config.publisher = value;
    } else if (key == "max_file_mb") {
      config.max_file_mb = static_cast<std::uint64_t>(parse_int(value, line_no, 1));
    } else if (key == "embargo_hides_listing") {
      config.embargo_hides_listing = parse_bool(value, line_no);
    } else if (key == "store_dir") {
      config.store_dir = value;
    } else if (key == "token_lifetime_s") {
      config.token_lifetime_s = parse_int(value, line_no, 1);
    } else if (key == "port") {
      config.port = static_cast<int>(parse_int(value, line_no, 0));
    } else if (key == "maturity_levels") {
      config.maturity_levels = split_list(value);
      if (config.maturity_levels.empty()) bad(line_no, "maturity_levels is empty");
    } else if (key.rfind("launcher.", 0) == 0) {
      std::string rest = key.substr(9);
      const bool classes = rest.size() > 8 && rest.compare(rest.size() - 8, 8, ".classes") == 0;
      if (classes) rest.resize(rest.size() - 8);
      if (rest.empty() || rest.find('.') != std::string::npos) bad(line_no, "bad launcher key `" + key + "`");
      Launcher& launcher = config.launchers[rest];
      launcher.id = rest;
      if (classes) {
        for (auto& c : split_list(value)) launcher.classes.insert(text::to_lower(c));
      } else {
        launcher.url_template = value;
      }
    } else {
      bad(line_no, "unknown key `" + key + "`");
    }
  }
  for (const auto& [id, launcher] : config.launchers) {
    if (launcher.url_template.empty())
      throw Error(ErrorCode::invalid_argument, "launcher `" + id + "` has no URL template");
  }
  return config;
}

Config load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read config " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string expand_launcher(const Launcher& launcher, std::string_view base_url, EntryId entry, int version) {
  while (!base_url.empty() && base_url.back() == '/') base_url.remove_suffix(1);
  const std::string trs_id = text::url_encode("#workflow/" + std::to_string(entry));
  const std::string trs_url = std::string(base_url) + "/ga4gh/trs/v2/tools/" + trs_id + "/versions/" +
                              std::to_string(version);
  std::string out = launcher.url_template;
  replace_all(out, "{trs_url}", text::url_encode(trs_url));
  replace_all(out, "{trs_id}", trs_id);
  replace_all(out, "{version}", std::to_string(version));
  replace_all(out, "{base_url}", std::string(base_url));
  return out;
}

std::vector<const Launcher*> launchers_for(const Config& config, std::string_view workflow_class) {
  std::vector<const Launcher*> out;
  for (const auto& [id, launcher] : config.launchers) {
    if (launcher.classes.empty() || launcher.classes.count(text::to_lower(workflow_class))) out.push_back(&launcher);
  }
  return out;
}

}  // namespace flowhub
