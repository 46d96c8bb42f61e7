#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "meshweave/world.h"

namespace meshweave {

// Swaps the overlay positions of peers a and b for every content in `scope`
// (parents, children, reserves, flow rates and hops move with the position;
// a former a->b link becomes b->a). Returns false and leaves the world
// unchanged when either peer could not carry the other's uploads.
bool SwapPositions(World& world, NodeId a, NodeId b,
                   std::span<const ContentId> scope);

struct Exchange1Result {
  int swaps = 0;
  std::vector<NodeId> infeasible;  // candidates skipped for capacity
};

// Bandwidth-based recursive exchange for content k: while some non-OSS parent
// l has M_i > M_l and m_i <= m_l, swap i with the one of smallest M.
Exchange1Result Exchange1(World& world, NodeId i, ContentId k);

// Parents of i for content k that still satisfy the exchange condition and
// could legally be swapped. Empty at an Exchange1 fixed point.
std::vector<NodeId> Exchange1Violations(const World& world, NodeId i,
                                        ContentId k);

// Z_i: sum over contents of d * x over i's inbound and outbound flows, in
// kbit/s * hops.
std::int64_t TrafficCost(const World& world, NodeId i);

// Contents both peers currently receive.
std::vector<ContentId> SharedContents(const World& world, NodeId a, NodeId b);

// Peers quantize M to `granularity`; equal classes count as equal bandwidth.
std::int64_t BandwidthClass(Rate capacity, Rate granularity);

// S^F(i): viewing peers other than i in i's bandwidth class that share at
// least one content with i, ascending.
std::vector<NodeId> EqualBandwidthPeers(const World& world, NodeId i,
                                        Rate granularity);

// Z'_a + Z'_b if a and b swapped positions for `scope`, without mutating.
std::int64_t PairCostAfterSwap(const World& world, NodeId a, NodeId b,
                               std::span<const ContentId> scope);

struct Exchange2Result {
  std::optional<NodeId> partner;
  std::int64_t gain = 0;  // (Z_i + Z_j) - (Z'_i + Z'_j) of the committed swap
};

// Best single swap for i over S^F(i); committed only on strict improvement.
// Ties in gain go to the smaller node id. Capacity-infeasible partners are
// skipped.
Exchange2Result PlanExchange2(const World& world, NodeId i, Rate granularity);
Exchange2Result Exchange2(World& world, NodeId i, Rate granularity);

}  // namespace meshweave
