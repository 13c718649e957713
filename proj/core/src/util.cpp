#include "flowhub/util.hpp"

#include <fnmatch.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <ctime>

#include "flowhub/error.hpp"

namespace flowhub {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::schema_error: return "schema_error";
    case ErrorCode::size_limit: return "size_limit";
    case ErrorCode::not_a_workflow: return "not_a_workflow";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::invalid_structure: return "invalid_structure";
    case ErrorCode::crate_build_error: return "crate_build_error";
    case ErrorCode::not_a_crate: return "not_a_crate";
    case ErrorCode::invalid_crate: return "invalid_crate";
    case ErrorCode::fetch_error: return "fetch_error";
    case ErrorCode::ref_not_found: return "ref_not_found";
    case ErrorCode::registration_rejected: return "registration_rejected";
    case ErrorCode::validation_failed: return "validation_failed";
    case ErrorCode::unauthenticated: return "unauthenticated";
    case ErrorCode::access_denied: return "access_denied";
    case ErrorCode::forbidden: return "forbidden";
    case ErrorCode::frozen_version: return "frozen_version";
    case ErrorCode::unknown_version: return "unknown_version";
    case ErrorCode::attribution_cycle: return "attribution_cycle";
    case ErrorCode::visibility_required: return "visibility_required";
    case ErrorCode::mint_failed: return "mint_failed";
    case ErrorCode::bad_query: return "bad_query";
    case ErrorCode::duplicate_item: return "duplicate_item";
    case ErrorCode::integrity_error: return "integrity_error";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

namespace text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : s) {
    // Bytes >= 0x80 belong to multi-byte UTF-8 sequences; keep them inside
    // tokens so non-ASCII words still match themselves.
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool glob_match(std::string_view pattern, std::string_view path) {
  std::string p(pattern);
  std::string target = pattern.find('/') == std::string_view::npos ? basename(path)
                                                                   : std::string(path);
  return ::fnmatch(p.c_str(), target.c_str(), 0) == 0;
}

std::string basename(std::string_view path) {
  auto pos = path.find_last_of('/');
  return std::string(pos == std::string_view::npos ? path : path.substr(pos + 1));
}

std::string dirname(std::string_view path) {
  auto pos = path.find_last_of('/');
  return pos == std::string_view::npos ? std::string() : std::string(path.substr(0, pos));
}

std::size_t path_depth(std::string_view path) {
  return static_cast<std::size_t>(std::count(path.begin(), path.end(), '/'));
}

std::string sanitize_identifier(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    out.push_back(std::isalnum(c) || c == '_' || c == '.' || c == '-' ? static_cast<char>(c)
                                                                       : '_');
  }
  return out;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
    } else if ((c >> 4) == 0xE) {
      extra = 2;
    } else if ((c >> 3) == 0x1E) {
      extra = 3;
    } else {
      return false;
    }
    if (extra > 0 && i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string url_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

std::string url_decode(std::string_view s) {
  auto hex_value = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

}  // namespace text

namespace timefmt {

std::string to_iso8601(Timestamp t) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  ::gmtime_r(&tt, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  std::string str(text::trim(s));
  std::tm tm{};
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int consumed = 0;
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 || consumed != 10)
    return std::nullopt;
  std::string rest = str.substr(10);
  long offset_seconds = 0;
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
    int n = 0;
    if (std::sscanf(rest.c_str() + 1, "%2d:%2d:%2d%n", &h, &mi, &sec, &n) != 3) return std::nullopt;
    std::string_view tz = std::string_view(rest).substr(1 + static_cast<std::size_t>(n));
    if (!tz.empty() && tz[0] == '.') {
      tz.remove_prefix(1);
      while (!tz.empty() && std::isdigit(static_cast<unsigned char>(tz[0]))) tz.remove_prefix(1);
    }
    if (tz == "Z" || tz.empty()) {
      offset_seconds = 0;
    } else if ((tz[0] == '+' || tz[0] == '-') && tz.size() == 6 && tz[3] == ':') {
      int oh = std::stoi(std::string(tz.substr(1, 2)));
      int om = std::stoi(std::string(tz.substr(4, 2)));
      offset_seconds = (oh * 3600L + om * 60L) * (tz[0] == '+' ? 1 : -1);
    } else {
      return std::nullopt;
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  std::time_t tt = ::timegm(&tm);
  return Timestamp(std::chrono::seconds(static_cast<std::int64_t>(tt) - offset_seconds));
}

int year_of(Timestamp t) {
  auto days = std::chrono::floor<std::chrono::days>(t);
  return static_cast<int>(std::chrono::year_month_day(days).year());
}

Timestamp from_unix(std::int64_t seconds) { return Timestamp(std::chrono::seconds(seconds)); }

std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }

}  // namespace timefmt

namespace digest {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::io_error, "sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace digest

namespace base64 {

std::string encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(bytes.data()),
                          static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string decode(std::string_view input) {
  std::string clean;
  clean.reserve(input.size());
  for (char c : input) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  }
  if (clean.size() % 4 != 0)
    throw Error(ErrorCode::invalid_argument, "base64 input length is not a multiple of 4");
  std::string out(3 * clean.size() / 4, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(clean.data()),
                          static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorCode::invalid_argument, "malformed base64 input");
  // EVP_DecodeBlock counts padding bytes as output.
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace base64

std::string random_hex(std::size_t n) {
  std::string raw(n, '\0');
  if (RAND_bytes(reinterpret_cast<unsigned char*>(raw.data()), static_cast<int>(n)) != 1)
    throw Error(ErrorCode::io_error, "RAND_bytes failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : raw) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 0xF]);
  }
  return out;
}

std::string guess_media_type(std::string_view path) {
  static const std::array<std::pair<std::string_view, std::string_view>, 22> table{{
      {".ga", "application/json"},
      {".json", "application/json"},
      {".cwl", "text/x-cwl"},
      {".yml", "application/yaml"},
      {".yaml", "application/yaml"},
      {".nf", "text/x-nextflow"},
      {".config", "text/plain"},
      {".smk", "text/x-snakemake"},
      {".py", "text/x-python"},
      {".sh", "text/x-sh"},
      {".wdl", "text/x-wdl"},
      {".ipynb", "application/x-ipynb+json"},
      {".md", "text/markdown"},
      {".txt", "text/plain"},
      {".cff", "application/yaml"},
      {".svg", "image/svg+xml"},
      {".png", "image/png"},
      {".jpg", "image/jpeg"},
      {".jpeg", "image/jpeg"},
      {".zip", "application/zip"},
      {".html", "text/html"},
      {".tsv", "text/tab-separated-values"},
  }};
  std::string lower = text::to_lower(text::basename(path));
  if (lower == "snakefile") return "text/x-snakemake";
  for (const auto& [ext, type] : table) {
    if (lower.size() >= ext.size() && lower.compare(lower.size() - ext.size(), ext.size(), ext) == 0)
      return std::string(type);
  }
  return "application/octet-stream";
}

}  // namespace flowhub
