#include "flowhub/access.hpp"

#include <algorithm>

namespace flowhub {
namespace {

void raise(std::optional<Right>& current, Right candidate) {
  if (!current || static_cast<int>(candidate) > static_cast<int>(*current)) current = candidate;
}

}  // namespace

std::optional<Right> held_right(const ActorContext& actor, const ProtectedResource& target) {
  std::optional<Right> held;
  if (actor.registry_admin || (!target.submitter.empty() && actor.user_id == target.submitter))
    raise(held, Right::manage);
  for (const auto& team : target.owner_team_ids) {
    if (actor.admin_team_ids.count(team)) raise(held, Right::manage);
    if (actor.team_ids.count(team)) raise(held, Right::edit);
  }
  for (const auto& space : target.owner_space_ids) {
    if (actor.admin_space_ids.count(space)) raise(held, Right::manage);
  }
  for (const auto& grant : target.policy.grants) {
    bool applies = false;
    switch (grant.subject_kind) {
      case SubjectKind::user: applies = grant.subject_id == actor.user_id; break;
      case SubjectKind::team: applies = actor.team_ids.count(grant.subject_id) > 0; break;
      case SubjectKind::space:
        applies = actor.space_ids.count(grant.subject_id) > 0 ||
                  actor.admin_space_ids.count(grant.subject_id) > 0;
        break;
    }
    if (applies) raise(held, grant.right);
  }
  return held;
}

AccessDecision check_access(const ActorContext* actor, const ProtectedResource& target,
                            Right right, Timestamp now) {
  std::optional<Right> held;
  if (actor) held = held_right(*actor, target);

  if (right == Right::edit || right == Right::manage) {
    if (!actor) return {false, "authentication required"};
    if (held && at_least(*held, right)) return {true, "grant"};
    return {false, "insufficient rights"};
  }

  if (held && at_least(*held, right)) return {true, "grant"};
  switch (target.policy.visibility) {
    case Visibility::public_access:
      return {true, "public"};
    case Visibility::registered:
      if (actor) return {true, "registered user"};
      return {false, "registered users only"};
    case Visibility::embargoed:
      if (target.policy.embargo_until && now >= *target.policy.embargo_until)
        return {true, "embargo lifted"};
      return {false, "embargoed"};
    case Visibility::private_access:
      return {false, "private"};
  }
  return {false, "unknown visibility"};
}

}  // namespace flowhub
