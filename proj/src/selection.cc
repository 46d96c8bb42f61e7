#include "meshweave/selection.h"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>

namespace meshweave {

std::set<NodeId> SelectionOutcome::parents() const {
  std::set<NodeId> out;
  for (const auto& [src, rate] : flows) out.insert(src);
  return out;
}

Rate SelectionOutcome::total() const {
  Rate sum;
  for (const auto& [src, rate] : flows) sum += rate;
  return sum;
}

namespace {

struct Candidate {
  NodeId id;
  int hop;
  int distance;
  Rate headroom;
};

Rate Demand(const World& world, NodeId i, ContentId k) {
  const NodeRecord& r = world.node(i);
  if (r.is_oss()) throw ModelError("selection requester must be a peer");
  if (world.holds(i, k)) {
    throw ModelError(fmt::format("peer {} already receives content {}", i, k + 1));
  }
  const Rate need = r.demand[k] - r.received[k];
  if (!need.positive()) throw ModelError("selection without outstanding demand");
  return need;
}

std::vector<Candidate> Candidates(const World& world, NodeId i, ContentId k,
                                  Rate min_headroom) {
  const int max_parent_hop = world.params().hop_limit - 1;
  std::vector<Candidate> out;
  for (NodeId j : world.holders(k)) {
    if (j == i) continue;
    const LogicalHop h = world.hop(j, k);
    if (!h || *h > max_parent_hop) continue;
    const Rate room = world.node(j).headroom();
    if (!room.positive() || room < min_headroom) continue;
    out.push_back(Candidate{j, *h, world.distance(j, i), room});
  }
  return out;
}

// Walks the ordered candidates, taking min(remaining, headroom) from each.
SelectionOutcome Greedy(const std::vector<Candidate>& ordered, Rate need) {
  SelectionOutcome out;
  Rate remaining = need;
  for (const Candidate& c : ordered) {
    if (!remaining.positive()) break;
    const Rate take = min(remaining, c.headroom);
    out.flows.emplace_back(c.id, take);
    remaining -= take;
  }
  out.admitted = remaining.zero();
  if (!out.admitted) out.flows.clear();
  return out;
}

}  // namespace

SelectionOutcome PlanMlh(const World& world, NodeId i, ContentId k) {
  const Rate need = Demand(world, i, k);
  auto cands = Candidates(world, i, k, world.node(i).demand[k]);
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.hop, a.distance, a.id) < std::tie(b.hop, b.distance, b.id);
  });
  return Greedy(cands, need);
}

SelectionOutcome PlanMph(const World& world, NodeId i, ContentId k) {
  const Rate need = Demand(world, i, k);
  auto cands = Candidates(world, i, k, world.node(i).demand[k]);
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.hop, a.id) < std::tie(b.distance, b.hop, b.id);
  });
  return Greedy(cands, need);
}

SelectionOutcome PlanRandom(const World& world, NodeId i, ContentId k,
                            Rng& rng) {
  const Rate need = Demand(world, i, k);
  auto pool = Candidates(world, i, k, Rate::FromKbps(1));
  std::sort(pool.begin(), pool.end(),
            [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  // Draw without replacement until the demand is met, the pool runs dry or
  // the parent set reaches D.
  const std::size_t cap = world.params().reserve_budget;
  std::vector<Candidate> drawn;
  Rate remaining = need;
  while (remaining.positive() && !pool.empty() && drawn.size() < cap) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t at = pick(rng);
    drawn.push_back(pool[at]);
    remaining -= min(remaining, pool[at].headroom);
    pool[at] = pool.back();
    pool.pop_back();
  }
  return Greedy(drawn, need);
}

SelectionOutcome Plan(const World& world, NodeId i, ContentId k,
                      SelectionRule rule, Rng& rng) {
  switch (rule) {
    case SelectionRule::kMinLogicalHop:
      return PlanMlh(world, i, k);
    case SelectionRule::kMinPhysicalHop:
      return PlanMph(world, i, k);
    case SelectionRule::kRandom:
      return PlanRandom(world, i, k, rng);
  }
  throw ModelError("unknown selection rule");
}

void CommitSelection(World& world, NodeId i, ContentId k,
                     const SelectionOutcome& outcome) {
  if (!outcome.admitted) return;
  int deepest = -1;
  for (const auto& [src, rate] : outcome.flows) {
    world.AddFlow(src, i, k, rate);
    deepest = std::max(deepest, *world.hop(src, k));
  }
  world.SetHop(i, k, deepest + 1);
  world.Admit(i, k);
}

SelectionOutcome MlhSelect(World& world, NodeId i, ContentId k) {
  auto out = PlanMlh(world, i, k);
  CommitSelection(world, i, k, out);
  return out;
}

SelectionOutcome MphSelect(World& world, NodeId i, ContentId k) {
  auto out = PlanMph(world, i, k);
  CommitSelection(world, i, k, out);
  return out;
}

SelectionOutcome RandomSelect(World& world, NodeId i, ContentId k, Rng& rng) {
  auto out = PlanRandom(world, i, k, rng);
  CommitSelection(world, i, k, out);
  return out;
}

}  // namespace meshweave
