#include "meshweave/exchange.h"

#include <algorithm>
#include <map>
#include <set>

namespace meshweave {

bool SwapPositions(World& world, NodeId a, NodeId b,
                   std::span<const ContentId> scope) {
  const auto [ua, ub] = world.UploadsAfterRelabel(a, b, scope);
  if (ua > world.node(a).capacity || ub > world.node(b).capacity) return false;
  world.RelabelPositions(a, b, scope);
  return true;
}

namespace {

bool SwapFeasible(const World& world, NodeId a, NodeId b, ContentId k) {
  const ContentId scope[] = {k};
  const auto [ua, ub] = world.UploadsAfterRelabel(a, b, scope);
  return ua <= world.node(a).capacity && ub <= world.node(b).capacity;
}

// S^E restricted to peers, ascending by (M, id).
std::vector<NodeId> ExchangeCandidates(const World& world, NodeId i,
                                       ContentId k) {
  const NodeRecord& me = world.node(i);
  std::vector<NodeId> out;
  for (NodeId l : world.sets(i, k).parents) {
    const NodeRecord& p = world.node(l);
    if (p.is_oss()) continue;
    if (me.capacity > p.capacity && me.upload <= p.upload) out.push_back(l);
  }
  std::sort(out.begin(), out.end(), [&](NodeId x, NodeId y) {
    const Rate mx = world.node(x).capacity, my = world.node(y).capacity;
    return mx != my ? mx < my : x < y;
  });
  return out;
}

}  // namespace

Exchange1Result Exchange1(World& world, NodeId i, ContentId k) {
  Exchange1Result result;
  std::set<NodeId> skipped;
  const ContentId scope[] = {k};
  for (;;) {
    NodeId chosen = 0;
    bool found = false;
    for (NodeId l : ExchangeCandidates(world, i, k)) {
      if (!skipped.contains(l)) {
        chosen = l;
        found = true;
        break;
      }
    }
    if (!found) break;
    if (SwapPositions(world, i, chosen, scope)) {
      ++result.swaps;
      skipped.clear();
    } else {
      skipped.insert(chosen);
      result.infeasible.push_back(chosen);
    }
  }
  return result;
}

std::vector<NodeId> Exchange1Violations(const World& world, NodeId i,
                                        ContentId k) {
  std::vector<NodeId> out;
  for (NodeId l : ExchangeCandidates(world, i, k)) {
    if (SwapFeasible(world, i, l, k)) out.push_back(l);
  }
  return out;
}

std::int64_t TrafficCost(const World& world, NodeId i) {
  std::int64_t z = 0;
  for (ContentId k = 0; k < world.content_count(); ++k) {
    const OverlaySets& s = world.sets(i, k);
    for (NodeId p : s.parents) {
      z += world.distance(p, i) * world.flows().get(p, i, k).kbps();
    }
    for (NodeId c : s.children) {
      z += world.distance(i, c) * world.flows().get(i, c, k).kbps();
    }
  }
  return z;
}

std::vector<ContentId> SharedContents(const World& world, NodeId a, NodeId b) {
  std::vector<ContentId> out;
  for (ContentId k = 0; k < world.content_count(); ++k) {
    if (world.holds(a, k) && world.holds(b, k) &&
        world.node(a).demand[k] == world.node(b).demand[k]) {
      out.push_back(k);
    }
  }
  return out;
}

std::int64_t BandwidthClass(Rate capacity, Rate granularity) {
  if (!granularity.positive()) return capacity.kbps();
  return capacity.kbps() / granularity.kbps();
}

std::vector<NodeId> EqualBandwidthPeers(const World& world, NodeId i,
                                        Rate granularity) {
  const auto cls = BandwidthClass(world.node(i).capacity, granularity);
  std::set<NodeId> out;
  for (ContentId k : world.viewed_contents(i)) {
    for (NodeId j : world.holders(k)) {
      if (j == i || world.node(j).is_oss()) continue;
      if (BandwidthClass(world.node(j).capacity, granularity) != cls) continue;
      if (world.node(j).demand[k] != world.node(i).demand[k]) continue;
      out.insert(j);
    }
  }
  return {out.begin(), out.end()};
}

std::int64_t PairCostAfterSwap(const World& world, NodeId a, NodeId b,
                               std::span<const ContentId> scope) {
  auto sigma = [a, b](NodeId x) { return x == a ? b : (x == b ? a : x); };
  // A link between a and b appears in both Z_a and Z_b.
  auto weight = [a, b](NodeId u, NodeId v) {
    return ((u == a || u == b) ? 1 : 0) + ((v == a || v == b) ? 1 : 0);
  };
  std::int64_t z = TrafficCost(world, a) + TrafficCost(world, b);
  for (ContentId k : scope) {
    std::map<std::pair<NodeId, NodeId>, Rate> edges;
    for (NodeId x : {a, b}) {
      const OverlaySets& s = world.sets(x, k);
      for (NodeId p : s.parents) edges[{p, x}] = world.flows().get(p, x, k);
      for (NodeId c : s.children) edges[{x, c}] = world.flows().get(x, c, k);
    }
    for (const auto& [e, rate] : edges) {
      const auto [u, v] = e;
      const int w = weight(u, v);
      z -= w * world.distance(u, v) * rate.kbps();
      z += w * world.distance(sigma(u), sigma(v)) * rate.kbps();
    }
  }
  return z;
}

Exchange2Result PlanExchange2(const World& world, NodeId i, Rate granularity) {
  Exchange2Result best;
  const std::int64_t zi = TrafficCost(world, i);
  for (NodeId j : EqualBandwidthPeers(world, i, granularity)) {
    const auto scope = SharedContents(world, i, j);
    if (scope.empty()) continue;
    const auto [ui, uj] = world.UploadsAfterRelabel(i, j, scope);
    if (ui > world.node(i).capacity || uj > world.node(j).capacity) continue;
    const std::int64_t before = zi + TrafficCost(world, j);
    const std::int64_t gain = before - PairCostAfterSwap(world, i, j, scope);
    if (gain > best.gain) {
      best.gain = gain;
      best.partner = j;
    }
  }
  return best;
}

Exchange2Result Exchange2(World& world, NodeId i, Rate granularity) {
  Exchange2Result plan = PlanExchange2(world, i, granularity);
  if (plan.partner) {
    const auto scope = SharedContents(world, i, *plan.partner);
    world.RelabelPositions(i, *plan.partner, scope);
  }
  return plan;
}

}  // namespace meshweave
