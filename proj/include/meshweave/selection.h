#pragma once

#include <random>
#include <set>
#include <utility>
#include <vector>

#include "meshweave/world.h"

namespace meshweave {

using Rng = std::mt19937_64;

enum class SelectionRule { kMinLogicalHop, kMinPhysicalHop, kRandom };

// Parents chosen for one (peer, content) request, in the order they were
// engaged. `admitted` implies the rates sum to the peer's demand.
struct SelectionOutcome {
  bool admitted = false;
  std::vector<std::pair<NodeId, Rate>> flows;

  std::set<NodeId> parents() const;
  Rate total() const;
};

// Plans never mutate the world. Candidates are holders of k (other than i)
// with logical hop <= H-1, so the resulting hop of i stays within H. MLH and
// MPH additionally require headroom >= N_i^k; the random baseline accepts any
// positive headroom but draws at most D parents. Ties are broken by
// ascending node id.
//
// MLH peels layers of equal logical hop (smallest first) and, inside a layer,
// takes the physically closest node. MPH swaps the two keys.
SelectionOutcome PlanMlh(const World& world, NodeId i, ContentId k);
SelectionOutcome PlanMph(const World& world, NodeId i, ContentId k);
SelectionOutcome PlanRandom(const World& world, NodeId i, ContentId k,
                            Rng& rng);
SelectionOutcome Plan(const World& world, NodeId i, ContentId k,
                      SelectionRule rule, Rng& rng);

// Applies an admitted plan: adds the flows, sets h_i^k and marks i as a
// holder of k. Rejected plans leave the world untouched.
void CommitSelection(World& world, NodeId i, ContentId k,
                     const SelectionOutcome& outcome);

// Plan + commit.
SelectionOutcome MlhSelect(World& world, NodeId i, ContentId k);
SelectionOutcome MphSelect(World& world, NodeId i, ContentId k);
SelectionOutcome RandomSelect(World& world, NodeId i, ContentId k, Rng& rng);

}  // namespace meshweave
