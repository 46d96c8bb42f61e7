#include "meshweave/configurator.h"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

namespace meshweave {

std::string_view PolicyName(Policy policy) {
  switch (policy) {
    case Policy::kMlh: return "mlh";
    case Policy::kMph: return "mph";
    case Policy::kScampLike: return "scamp-like";
    case Policy::kMlhEx: return "mlh+ex";
    case Policy::kMphEx: return "mph+ex";
    case Policy::kScampLikeEx: return "scamp-like+ex";
  }
  return "?";
}

std::optional<Policy> ParsePolicy(std::string_view name) {
  for (Policy p : kAllPolicies) {
    if (PolicyName(p) == name) return p;
  }
  return std::nullopt;
}

SelectionRule RuleOf(Policy policy) {
  switch (policy) {
    case Policy::kMlh:
    case Policy::kMlhEx:
      return SelectionRule::kMinLogicalHop;
    case Policy::kMph:
    case Policy::kMphEx:
      return SelectionRule::kMinPhysicalHop;
    case Policy::kScampLike:
    case Policy::kScampLikeEx:
      return SelectionRule::kRandom;
  }
  return SelectionRule::kRandom;
}

bool RunsExchanges(Policy policy) {
  return policy == Policy::kMlhEx || policy == Policy::kMphEx ||
         policy == Policy::kScampLikeEx;
}

bool JoinResult::any_admitted() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const ContentOutcome& o) { return o.admitted; });
}

std::vector<ContentId> JoinResult::admitted() const {
  std::vector<ContentId> out;
  for (const auto& o : outcomes) {
    if (o.admitted) out.push_back(o.content);
  }
  return out;
}

void FillReserves(World& world, NodeId i, ContentId k, Rng& rng) {
  const OverlaySets& s = world.sets(i, k);
  const std::size_t budget = world.params().reserve_budget;
  if (s.parents.size() + s.reserves.size() >= budget) return;
  std::size_t need = budget - s.parents.size() - s.reserves.size();

  std::vector<NodeId> pool;
  for (NodeId j : world.holders(k)) {
    if (j != i && !s.parents.contains(j) && !s.reserves.contains(j)) {
      pool.push_back(j);
    }
  }
  while (need > 0 && !pool.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t at = pick(rng);
    world.AddReserve(i, k, pool[at]);
    pool[at] = pool.back();
    pool.pop_back();
    --need;
  }
}

JoinResult InitialConfiguration(World& world, const JoinRequest& request,
                                Policy policy, const OverlayOptions& options,
                                Rng& rng) {
  const NodeId i = request.peer;
  const NodeRecord& me = world.node(i);
  if (me.is_oss() || me.state != NodeState::kWaiting) {
    throw ModelError(fmt::format("node {} is not a waiting peer", i));
  }
  if (request.contents.empty()) throw ModelError("empty content request");

  // Step 1: a waiting peer carries no overlay state.
  for (ContentId k = 0; k < world.content_count(); ++k) {
    if (!world.sets(i, k).empty()) {
      throw ModelError(fmt::format("waiting peer {} has stale overlay sets", i));
    }
  }

  JoinResult result;
  // Step 2: per-content selection.
  for (ContentId k : request.contents) {
    world.SetDemand(i, k, request.view_rate);
    const SelectionOutcome plan = Plan(world, i, k, RuleOf(policy), rng);
    if (plan.admitted) {
      CommitSelection(world, i, k, plan);
    } else {
      world.SetDemand(i, k, Rate::Zero());
    }
    result.outcomes.push_back(ContentOutcome{k, plan.admitted});
  }
  if (options.all_or_nothing && result.any_admitted() &&
      result.admitted().size() != request.contents.size()) {
    for (auto& o : result.outcomes) {
      if (!o.admitted) continue;
      world.RemoveContentFlows(i, o.content);
      world.Release(i, o.content);
      world.SetDemand(i, o.content, Rate::Zero());
      o.admitted = false;
    }
  }
  const std::vector<ContentId> admitted = result.admitted();

  if (RunsExchanges(policy)) {
    // Step 3.
    for (ContentId k : admitted) {
      const Exchange1Result ex = Exchange1(world, i, k);
      result.exchange1_swaps += ex.swaps;
      if (options.after_exchange1) options.after_exchange1(world, i, k, ex);
    }
    // Step 4.
    if (!admitted.empty()) {
      result.exchange2_partner = Exchange2(world, i, options.bandwidth_class).partner;
    }
  }

  // Step 5.
  for (ContentId k : admitted) FillReserves(world, i, k, rng);
  return result;
}

namespace {

// Strict descendants of n for content k, ascending.
std::vector<NodeId> Descendants(const World& world, NodeId n, ContentId k) {
  std::set<NodeId> seen;
  std::vector<NodeId> stack(world.sets(n, k).children.begin(),
                            world.sets(n, k).children.end());
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    for (NodeId c : world.sets(u, k).children) stack.push_back(c);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

std::vector<NodeId> RepairOnDeparture(World& world, NodeId departed, Rng& rng) {
  std::vector<NodeId> cascade;
  std::set<std::pair<NodeId, ContentId>> work;
  std::map<ContentId, std::set<NodeId>> touched;

  auto depart = [&](NodeId n) {
    for (const auto& orphan : world.Detach(n)) work.insert(orphan);
  };
  depart(departed);

  while (!work.empty()) {
    const auto [j, k] = *work.begin();
    work.erase(work.begin());
    if (!world.holds(j, k)) continue;  // already departed in this cascade
    touched[k].insert(j);
    const NodeRecord& rec = world.node(j);
    Rate deficit = rec.demand[k] - rec.received[k];
    if (!deficit.positive()) continue;

    // Cached hops never understate a node's depth: losses are refreshed at
    // the end of the pass, gains right after each re-home. A reserve is
    // usable when it is not below j (no cycle), has hop <= H-1 and, if j
    // moves deeper, j's deepest descendant stays within H.
    const int limit = world.params().hop_limit;
    const std::vector<NodeId> below = Descendants(world, j, k);
    std::vector<NodeId> reserves(world.sets(j, k).reserves.begin(),
                                 world.sets(j, k).reserves.end());
    std::shuffle(reserves.begin(), reserves.end(), rng);
    for (NodeId r : reserves) {
      if (!deficit.positive()) break;
      world.RemoveReserve(j, k, r);
      const LogicalHop rh = world.hop(r, k);
      if (!world.holds(r, k) || !rh || *rh > limit - 1) continue;
      if (std::binary_search(below.begin(), below.end(), r)) continue;
      const Rate room = world.node(r).headroom();
      if (!room.positive()) continue;
      const int own_hop = *world.hop(j, k);
      int new_hop = *rh + 1;
      for (NodeId p : world.sets(j, k).parents) new_hop = std::max(new_hop, *world.hop(p, k) + 1);
      if (new_hop > own_hop) {
        int deepest = own_hop;
        for (NodeId d : below) deepest = std::max(deepest, world.hop(d, k).value_or(0));
        if (deepest + (new_hop - own_hop) > limit) continue;
      }
      const Rate take = min(deficit, room);
      world.AddFlow(r, j, k, take);
      deficit -= take;
      if (new_hop > own_hop) {
        const NodeId seed[] = {j};
        world.RefreshHops(k, seed);
      }
    }

    if (deficit.positive()) {
      cascade.push_back(j);
      depart(j);
    } else {
      FillReserves(world, j, k, rng);
    }
  }

  for (const auto& [k, nodes] : touched) {
    std::vector<NodeId> seeds;
    for (NodeId n : nodes) {
      if (world.holds(n, k)) seeds.push_back(n);
    }
    if (!seeds.empty()) world.RefreshHops(k, seeds);
  }
  return cascade;
}

}  // namespace meshweave
