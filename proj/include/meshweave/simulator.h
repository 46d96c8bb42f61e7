#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshweave/configurator.h"
#include "meshweave/metrics.h"
#include "meshweave/sampling.h"
#include "meshweave/topology.h"
#include "meshweave/world.h"

namespace meshweave {

enum class PlacementRule { kUniform, kRoundRobin };

struct ScenarioConfig {
  std::size_t peer_count = 1000;
  std::size_t as_count = 15;
  std::size_t edges_per_node = 4;  // 15 ASes -> 50 links
  std::size_t oss_per_content = 1;
  double oss_bandwidth_mbps = 30.0;
  double peer_bandwidth_min_mbps = 0.5;
  double peer_bandwidth_max_mbps = 10.0;
  double view_rate_mbps = 2.0;
  int hop_limit = 4;
  std::size_t reserve_budget = 4;
  ContentCatalog catalog = ContentCatalog::TwoContentDefault();
  double mean_viewing_seconds = 3.0 * 3600.0;
  double viewing_cv = 6.0;
  double mean_waiting_seconds = 3600.0;  // 1 / lambda
  Policy policy = Policy::kMlhEx;
  double sim_days = 12.0;
  double warmup_days = 2.0;
  double batch_days = 1.0;
  double day_seconds = 86400.0;
  std::uint64_t seed = 1;
  double bandwidth_class_mbps = 0.5;
  bool all_or_nothing = false;
  PlacementRule placement = PlacementRule::kUniform;
  // Full CheckInvariants every N events; 0 disables.
  std::size_t invariant_check_interval = 0;

  std::size_t content_count() const { return catalog.content_count; }
  std::size_t batch_count() const;
  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
};

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t demands = 0;
  std::uint64_t admitted_pairs = 0;
  std::uint64_t rejected_pairs = 0;
  std::uint64_t completions = 0;
  std::uint64_t cascade_departures = 0;
  std::uint64_t exchange1_swaps = 0;
  std::uint64_t exchange2_swaps = 0;
};

struct RunReport {
  Policy policy = Policy::kMlhEx;
  double lambda_inv_s = 0.0;
  std::uint64_t seed = 0;
  std::vector<BatchResult> batches;
  RunStats stats;
};

enum class EventKind : std::uint8_t { kDemand, kViewingComplete };

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::kDemand;
  NodeId peer = 0;
  // Demand: contents requested and the join outcome. ViewingComplete: the
  // peers that left in the repair cascade.
  std::vector<ContentId> requested;
  JoinResult join;
  std::vector<NodeId> cascade;
};

struct RunHooks {
  std::function<void(const World&, const EventRecord&)> after_event;
  std::function<void(const World&, NodeId, ContentId, const Exchange1Result&)>
      after_exchange1;
};

// Thrown when the periodic invariant check fails. Carries a world snapshot.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(const std::string& what, std::string snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const std::string& snapshot() const { return snapshot_; }

 private:
  std::string snapshot_;
};

// AS graph + node placement for a scenario; a single AS yields an edgeless
// graph.
std::shared_ptr<const Topology> BuildTopology(const ScenarioConfig& config);

// OSS nodes and peers with their sampled capacities, no overlay yet.
World BuildWorld(const ScenarioConfig& config,
                 std::shared_ptr<const Topology> topology);

RunReport Run(const ScenarioConfig& config, const RunHooks& hooks = {});

}  // namespace meshweave
