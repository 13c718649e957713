#include <gtest/gtest.h>

#include "flowhub/access.hpp"

using namespace flowhub;

namespace {

const Timestamp kNow = *timefmt::parse_iso8601("2024-06-01T00:00:00Z");
const Timestamp kUntil = *timefmt::parse_iso8601("2025-01-01T00:00:00Z");

enum class Relation { anonymous, unrelated, grantee, team_member, space_admin };

ProtectedResource resource(Visibility v) {
  ProtectedResource r;
  r.policy.visibility = v;
  if (v == Visibility::embargoed) r.policy.embargo_until = kUntil;
  r.policy.grants.push_back({SubjectKind::user, "grace", Right::download});
  r.owner_team_ids = {"t1"};
  r.owner_space_ids = {"s1"};
  r.submitter = "sub";
  return r;
}

std::optional<ActorContext> actor(Relation rel) {
  ActorContext a;
  switch (rel) {
    case Relation::anonymous: return std::nullopt;
    case Relation::unrelated: a.user_id = "uma"; a.team_ids = {"t9"}; a.space_ids = {"s9"}; break;
    case Relation::grantee: a.user_id = "grace"; break;
    case Relation::team_member: a.user_id = "tom"; a.team_ids = {"t1"}; a.space_ids = {"s1"}; break;
    case Relation::space_admin: a.user_id = "sam"; a.admin_space_ids = {"s1"}; break;
  }
  return a;
}

// Allowed rights per (relation, visibility), as "view download edit manage",
// before the embargo date.
const std::map<std::pair<Relation, Visibility>, std::string> kTable = {
    {{Relation::anonymous, Visibility::public_access}, "1100"},
    {{Relation::anonymous, Visibility::registered}, "0000"},
    {{Relation::anonymous, Visibility::embargoed}, "0000"},
    {{Relation::anonymous, Visibility::private_access}, "0000"},
    {{Relation::unrelated, Visibility::public_access}, "1100"},
    {{Relation::unrelated, Visibility::registered}, "1100"},
    {{Relation::unrelated, Visibility::embargoed}, "0000"},
    {{Relation::unrelated, Visibility::private_access}, "0000"},
    {{Relation::grantee, Visibility::public_access}, "1100"},
    {{Relation::grantee, Visibility::registered}, "1100"},
    {{Relation::grantee, Visibility::embargoed}, "1100"},
    {{Relation::grantee, Visibility::private_access}, "1100"},
    {{Relation::team_member, Visibility::public_access}, "1110"},
    {{Relation::team_member, Visibility::registered}, "1110"},
    {{Relation::team_member, Visibility::embargoed}, "1110"},
    {{Relation::team_member, Visibility::private_access}, "1110"},
    {{Relation::space_admin, Visibility::public_access}, "1111"},
    {{Relation::space_admin, Visibility::registered}, "1111"},
    {{Relation::space_admin, Visibility::embargoed}, "1111"},
    {{Relation::space_admin, Visibility::private_access}, "1111"},
};

}  // namespace

TEST(Access, TruthTableBeforeEmbargo) {
  int cases = 0;
  for (const auto& [key, bits] : kTable) {
    const auto a = actor(key.first);
    const ProtectedResource r = resource(key.second);
    for (int right = 0; right < 4; ++right) {
      const bool got = check_access(a ? &*a : nullptr, r, static_cast<Right>(right), kNow).allowed;
      EXPECT_EQ(got, bits[right] == '1') << "relation " << static_cast<int>(key.first) << " visibility "
                                         << to_string(key.second) << " right " << to_string(static_cast<Right>(right));
      ++cases;
    }
  }
  EXPECT_EQ(cases, 80);
}

TEST(Access, EmbargoLiftsOnItsDate) {
  const ProtectedResource r = resource(Visibility::embargoed);
  const auto bob = actor(Relation::unrelated);
  EXPECT_FALSE(check_access(nullptr, r, Right::view, kUntil - std::chrono::seconds(1)));
  EXPECT_TRUE(check_access(nullptr, r, Right::view, kUntil));
  EXPECT_TRUE(check_access(&*bob, r, Right::download, kUntil + std::chrono::hours(1)));
  EXPECT_FALSE(check_access(&*bob, r, Right::edit, kUntil + std::chrono::hours(1)));
}

TEST(Access, AnonymousPublicViewAllowed) {
  EXPECT_TRUE(check_access(nullptr, resource(Visibility::public_access), Right::view, kNow));
}

TEST(Access, AnonymousPrivateViewDenied) {
  auto d = check_access(nullptr, resource(Visibility::private_access), Right::view, kNow);
  EXPECT_FALSE(d.allowed);
  EXPECT_FALSE(d.reason.empty());
}

TEST(Access, TeamAndSpaceGrants) {
  ProtectedResource r = resource(Visibility::private_access);
  r.policy.grants = {{SubjectKind::team, "partners", Right::view}, {SubjectKind::space, "consortium", Right::edit}};
  ActorContext partner;
  partner.user_id = "pat";
  partner.team_ids = {"partners"};
  EXPECT_TRUE(check_access(&partner, r, Right::view, kNow));
  EXPECT_FALSE(check_access(&partner, r, Right::download, kNow));

  ActorContext consortium;
  consortium.user_id = "cat";
  consortium.space_ids = {"consortium"};
  EXPECT_TRUE(check_access(&consortium, r, Right::edit, kNow));
  EXPECT_FALSE(check_access(&consortium, r, Right::manage, kNow));
}

TEST(Access, SubmitterTeamAdminAndRegistryAdminManage) {
  const ProtectedResource r = resource(Visibility::private_access);
  ActorContext sub;
  sub.user_id = "sub";
  ActorContext team_admin;
  team_admin.user_id = "ada";
  team_admin.team_ids = {"t1"};
  team_admin.admin_team_ids = {"t1"};
  ActorContext root;
  root.user_id = "root";
  root.registry_admin = true;
  for (const ActorContext* a : {&sub, &team_admin, &root}) {
    EXPECT_EQ(held_right(*a, r), Right::manage) << a->user_id;
    EXPECT_TRUE(check_access(a, r, Right::manage, kNow));
  }
}

TEST(Access, RightsAreOrdered) {
  EXPECT_TRUE(at_least(Right::manage, Right::view));
  EXPECT_TRUE(at_least(Right::download, Right::download));
  EXPECT_FALSE(at_least(Right::view, Right::download));
}
