#include "flowhub/model.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "flowhub/error.hpp"

namespace flowhub {

const Membership* User::membership(const TeamId& team) const {
  auto it = std::find_if(memberships.begin(), memberships.end(),
                         [&](const Membership& m) { return m.team_id == team; });
  return it == memberships.end() ? nullptr : &*it;
}

const TeamMember* Team::member(const UserId& user) const {
  auto it = std::find_if(members.begin(), members.end(),
                         [&](const TeamMember& m) { return m.user_id == user; });
  return it == members.end() ? nullptr : &*it;
}

std::string_view source_kind(const VersionSource& source) {
  switch (source.index()) {
    case 0: return "upload";
    case 1: return "crate";
    default: return "git";
  }
}

const WorkflowVersion* WorkflowEntry::find_version(int number) const {
  auto it = std::find_if(versions.begin(), versions.end(),
                         [&](const WorkflowVersion& v) { return v.version == number; });
  return it == versions.end() ? nullptr : &*it;
}

WorkflowVersion* WorkflowEntry::find_version(int number) {
  auto it = std::find_if(versions.begin(), versions.end(),
                         [&](const WorkflowVersion& v) { return v.version == number; });
  return it == versions.end() ? nullptr : &*it;
}

const WorkflowVersion& WorkflowEntry::latest() const {
  if (versions.empty()) throw Error(ErrorCode::integrity_error, "entry has no versions");
  return versions.back();
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<std::string_view, E> (&table)[N],
             std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw Error(ErrorCode::invalid_argument, "unknown " + std::string(what) + ": " + std::string(s));
}

constexpr std::pair<std::string_view, Right> kRights[] = {
    {"view", Right::view}, {"download", Right::download}, {"edit", Right::edit},
    {"manage", Right::manage}};
constexpr std::pair<std::string_view, Visibility> kVisibilities[] = {
    {"public", Visibility::public_access},
    {"registered", Visibility::registered},
    {"embargoed", Visibility::embargoed},
    {"private", Visibility::private_access}};
constexpr std::pair<std::string_view, SubjectKind> kSubjects[] = {
    {"user", SubjectKind::user}, {"team", SubjectKind::team}, {"space", SubjectKind::space}};
constexpr std::pair<std::string_view, Role> kRoles[] = {{"admin", Role::admin},
                                                        {"member", Role::member}};
constexpr std::pair<std::string_view, AssetKind> kAssetKinds[] = {
    {"workflow", AssetKind::workflow},         {"document", AssetKind::document},
    {"sop", AssetKind::sop},                   {"publication", AssetKind::publication},
    {"presentation", AssetKind::presentation}, {"data_file", AssetKind::data_file},
    {"event", AssetKind::event}};
constexpr std::pair<std::string_view, TestStatus> kTestStatuses[] = {
    {"passing", TestStatus::passing}, {"failing", TestStatus::failing},
    {"unknown", TestStatus::unknown}};

template <typename E, std::size_t N>
std::string_view name_of(E value, const std::pair<std::string_view, E> (&table)[N]) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string_view to_string(Right r) { return name_of(r, kRights); }
std::string_view to_string(Visibility v) { return name_of(v, kVisibilities); }
std::string_view to_string(SubjectKind k) { return name_of(k, kSubjects); }
std::string_view to_string(Role r) { return name_of(r, kRoles); }
std::string_view to_string(AssetKind k) { return name_of(k, kAssetKinds); }
std::string_view to_string(TestStatus s) { return name_of(s, kTestStatuses); }

Right parse_right(std::string_view s) { return parse_enum(s, kRights, "right"); }
Visibility parse_visibility(std::string_view s) {
  return parse_enum(s, kVisibilities, "visibility");
}
SubjectKind parse_subject_kind(std::string_view s) {
  return parse_enum(s, kSubjects, "subject kind");
}
Role parse_role(std::string_view s) { return parse_enum(s, kRoles, "role"); }
AssetKind parse_asset_kind(std::string_view s) {
  return parse_enum(s, kAssetKinds, "asset kind");
}
TestStatus parse_test_status(std::string_view s) {
  return parse_enum(s, kTestStatuses, "test status");
}

char orcid_check_digit(std::string_view digits) {
  int total = 0;
  for (char c : digits) {
    total = (total + (c - '0')) * 2;
  }
  const int result = (12 - total % 11) % 11;
  return result == 10 ? 'X' : static_cast<char>('0' + result);
}

bool is_valid_orcid(std::string_view orcid) {
  static const std::regex shape(R"(^\d{4}-\d{4}-\d{4}-\d{3}[0-9X]$)");
  std::string s(orcid);
  if (!std::regex_match(s, shape)) return false;
  std::string digits;
  for (char c : s) {
    if (c != '-') digits.push_back(c);
  }
  return orcid_check_digit(std::string_view(digits).substr(0, 15)) == digits.back();
}

std::string normalize_orcid(std::string_view orcid) {
  std::string_view s = text::trim(orcid);
  for (std::string_view prefix : {"https://orcid.org/", "http://orcid.org/", "orcid.org/"}) {
    if (s.size() >= prefix.size() && text::iequals(s.substr(0, prefix.size()), prefix)) {
      s.remove_prefix(prefix.size());
      break;
    }
  }
  while (!s.empty() && s.back() == '/') s.remove_suffix(1);
  return text::to_upper(s);
}

bool is_valid_biotools_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '~';
  });
}

}  // namespace flowhub
