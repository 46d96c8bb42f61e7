#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "meshweave/exchange.h"
#include "meshweave/selection.h"
#include "meshweave/world.h"

namespace meshweave {

// "mlh", "mph", "scamp-like" select only; the "+ex" variants also run both
// exchange procedures after selection.
enum class Policy { kMlh, kMph, kScampLike, kMlhEx, kMphEx, kScampLikeEx };

inline constexpr Policy kAllPolicies[] = {Policy::kMlh,      Policy::kMph,
                                          Policy::kScampLike, Policy::kMlhEx,
                                          Policy::kMphEx,    Policy::kScampLikeEx};

std::string_view PolicyName(Policy policy);
std::optional<Policy> ParsePolicy(std::string_view name);
SelectionRule RuleOf(Policy policy);
bool RunsExchanges(Policy policy);

struct OverlayOptions {
  Rate bandwidth_class = Rate::FromMbps(0.5);
  // Reject every content of a request when any one of them is rejected.
  bool all_or_nothing = false;
  // Called after each Exchange1 run with (world, peer, content).
  std::function<void(const World&, NodeId, ContentId, const Exchange1Result&)>
      after_exchange1;
};

struct JoinRequest {
  NodeId peer = 0;
  std::vector<ContentId> contents;  // non-empty, ascending
  Rate view_rate = Rate::FromMbps(2.0);
  double timestamp = 0.0;
};

struct ContentOutcome {
  ContentId content = 0;
  bool admitted = false;
};

struct JoinResult {
  std::vector<ContentOutcome> outcomes;
  int exchange1_swaps = 0;
  std::optional<NodeId> exchange2_partner;

  bool any_admitted() const;
  std::vector<ContentId> admitted() const;
};

// Adds uniformly random holders of k (not i, not already a parent or reserve)
// to B^k(i) until |P| + |B| = D or the pool runs out.
void FillReserves(World& world, NodeId i, ContentId k, Rng& rng);

// Joins a waiting peer: selection per content, exchange 1 per admitted
// content, exchange 2 once, then reserve filling.
JoinResult InitialConfiguration(World& world, const JoinRequest& request,
                                Policy policy, const OverlayOptions& options,
                                Rng& rng);

// Removes `departed` and re-homes its orphaned children from their reserves.
// Children that cannot close their deficit leave as well, recursively.
// Returns those cascade departures (not including `departed`), in the order
// they left.
std::vector<NodeId> RepairOnDeparture(World& world, NodeId departed, Rng& rng);

}  // namespace meshweave
