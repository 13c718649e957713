#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowhub/model.hpp"

namespace flowhub {

/// An authenticated actor together with the relations access decisions need.
/// The registry resolves these from its store; the decision itself is pure.
struct ActorContext {
  UserId user_id;
  std::set<TeamId> team_ids;
  std::set<TeamId> admin_team_ids;
  /// Spaces that house the actor's teams.
  std::set<SpaceId> space_ids;
  std::set<SpaceId> admin_space_ids;
  bool registry_admin = false;
};

/// The access-relevant view of a workflow entry or asset.
struct ProtectedResource {
  AccessPolicy policy;
  std::vector<TeamId> owner_team_ids;
  /// Spaces of the owning teams.
  std::set<SpaceId> owner_space_ids;
  UserId submitter;
};

struct AccessDecision {
  bool allowed = false;
  std::string reason;

  explicit operator bool() const noexcept { return allowed; }
};

/// Strongest right the actor holds through explicit grants or ownership:
///  - submitter, admins of an owning team, admins of an owning team's space
///    and registry admins: manage
///  - members of an owning team: edit
///  - explicit grants to the user, one of their teams or spaces: the granted right
std::optional<Right> held_right(const ActorContext& actor, const ProtectedResource& target);

/// `actor == nullptr` means anonymous. Deny is a value, never an error.
AccessDecision check_access(const ActorContext* actor, const ProtectedResource& target,
                            Right right, Timestamp now);

inline bool at_least(Right held, Right wanted) {
  return static_cast<int>(held) >= static_cast<int>(wanted);
}

}  // namespace flowhub
