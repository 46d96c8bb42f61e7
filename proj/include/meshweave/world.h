#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "meshweave/rate.h"
#include "meshweave/topology.h"

namespace meshweave {

// Zero-based content index. Users see content k as k+1.
using ContentId = std::uint32_t;

// Overlay depth of a node for one content. nullopt means the node is not
// connected to that content's origin server.
using LogicalHop = std::optional<int>;

// Broken contract or corrupted model state. Never expected in a correct run.
class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A mutation that would exceed an upload capacity or a viewing demand. The
// world is left untouched when this is thrown.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Role : std::uint8_t { kOss, kPeer };
enum class NodeState : std::uint8_t { kWaiting, kViewing, kServing };

struct NodeRecord {
  NodeId id = 0;
  Role role = Role::kPeer;
  ContentId served_content = 0;  // meaningful for OSS nodes only
  AsId as_id = 0;
  Rate capacity;                 // M
  Rate upload;                   // m
  std::vector<Rate> demand;      // N^k, zero for contents not requested
  std::vector<Rate> received;    // n^k
  NodeState state = NodeState::kWaiting;

  Rate headroom() const { return capacity - upload; }
  bool is_oss() const { return role == Role::kOss; }
  bool fully_served(ContentId k) const {
    return demand[k].positive() && received[k] == demand[k];
  }
};

struct OverlaySets {
  std::set<NodeId> parents;
  std::set<NodeId> reserves;
  std::set<NodeId> children;
  LogicalHop hop;

  bool empty() const {
    return parents.empty() && reserves.empty() && children.empty();
  }
  friend bool operator==(const OverlaySets&, const OverlaySets&) = default;
};

struct FlowKey {
  NodeId src = 0;
  NodeId dst = 0;
  ContentId content = 0;
  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

// Sparse x_{src,dst}^k. Absent entries are zero; stored entries are positive.
class FlowTable {
 public:
  using Map = std::map<FlowKey, Rate>;

  Rate get(NodeId src, NodeId dst, ContentId k) const;
  std::size_t size() const { return entries_.size(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  friend bool operator==(const FlowTable&, const FlowTable&) = default;

 private:
  friend class World;
  Map entries_;
};

struct ModelParams {
  std::size_t content_count = 2;
  int hop_limit = 4;              // H
  std::size_t reserve_budget = 4; // D, upper bound on |P| + |B|
};

// (child, content) pairs that lost inbound rate, ascending.
using OrphanList = std::vector<std::pair<NodeId, ContentId>>;

// Complete overlay state of one simulation: node ledgers, flows and the
// per-content parent/reserve/child sets. All mutations keep the cached
// ledgers (m, n^k) and the parent/child mirrors consistent with the flows.
class World {
 public:
  World(std::shared_ptr<const Topology> topology, ModelParams params);

  // Nodes must be added in id order; ids index into the topology placement.
  NodeId AddOss(ContentId k, Rate capacity);
  NodeId AddPeer(Rate capacity);

  const ModelParams& params() const { return params_; }
  const Topology& topology() const { return *topology_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t content_count() const { return params_.content_count; }

  const NodeRecord& node(NodeId n) const { return nodes_.at(n); }
  const OverlaySets& sets(NodeId n, ContentId k) const {
    return overlay_[index(n, k)];
  }
  const std::set<NodeId>& reserved_by(NodeId n, ContentId k) const {
    return reserved_by_[index(n, k)];
  }
  const FlowTable& flows() const { return flows_; }
  LogicalHop hop(NodeId n, ContentId k) const { return sets(n, k).hop; }
  int distance(NodeId a, NodeId b) const { return topology_->distance(a, b); }

  // Nodes able to transmit content k: its OSS nodes and peers viewing k.
  std::span<const NodeId> holders(ContentId k) const { return holders_[k]; }
  bool holds(NodeId n, ContentId k) const {
    return holder_pos_[index(n, k)] >= 0;
  }
  std::vector<NodeId> oss_nodes(ContentId k) const;
  std::vector<ContentId> viewed_contents(NodeId n) const;

  // Instantaneous metric integrands.
  std::int64_t joined_pairs() const { return joined_pairs_; }
  std::int64_t total_traffic_kbps() const { return total_kbps_; }
  std::int64_t weighted_traffic_kbps() const { return weighted_kbps_; }

  // Ledger mutations ------------------------------------------------------

  // Adds `rate` to x_{src,dst}^k and updates m_src, n_dst^k, P and C.
  void AddFlow(NodeId src, NodeId dst, ContentId k, Rate rate);

  // Drops every flow and set membership of `n` (all contents) and purges `n`
  // from the sets of its counterparties. Returns children left short.
  OrphanList RemoveFlowsOf(NodeId n);

  // Same as RemoveFlowsOf restricted to content k.
  OrphanList RemoveContentFlows(NodeId n, ContentId k);

  // Session bookkeeping ---------------------------------------------------

  void SetDemand(NodeId n, ContentId k, Rate demand);
  // Marks `n` as a holder of k and puts a waiting peer into Viewing.
  void Admit(NodeId n, ContentId k);
  // Removes `n` from the holders of k; drops to Waiting when nothing is left.
  void Release(NodeId n, ContentId k);
  // Full departure: RemoveFlowsOf, Release for all contents, zero demand.
  OrphanList Detach(NodeId n);

  void AddReserve(NodeId owner, ContentId k, NodeId member);
  void RemoveReserve(NodeId owner, ContentId k, NodeId member);

  // Logical hops ---------------------------------------------------------

  void SetHop(NodeId n, ContentId k, LogicalHop hop);
  // Topological recomputation from the origin servers. Throws ModelError if
  // the content's parent graph has a cycle.
  void RecomputeLogicalHops(ContentId k);
  // Recomputes hops for `seeds` and all their descendants only.
  void RefreshHops(ContentId k, std::span<const NodeId> seeds);

  // Position exchange ------------------------------------------------------

  // Upload totals of a and b if their content-`scope` positions were swapped.
  std::pair<Rate, Rate> UploadsAfterRelabel(
      NodeId a, NodeId b, std::span<const ContentId> scope) const;

  // Swaps the positions of peers a and b in each content of `scope`: every
  // flow, parent/child/reserve membership and hop involving a or b is
  // relabelled a<->b. Throws CapacityError (world unchanged) when either
  // node's upload would exceed its capacity.
  void RelabelPositions(NodeId a, NodeId b, std::span<const ContentId> scope);

  // Deterministic debug dump of flows and ledgers.
  void WriteSnapshot(std::ostream& out) const;

  friend bool operator==(const World& a, const World& b);

 private:
  std::size_t index(NodeId n, ContentId k) const {
    return static_cast<std::size_t>(n) * params_.content_count + k;
  }
  NodeId AddNode(NodeRecord record);
  void Link(NodeId src, NodeId dst, ContentId k, Rate rate);
  void Unlink(NodeId src, NodeId dst, ContentId k);
  void AdjustReceived(NodeId dst, ContentId k, Rate delta);
  void AddHolder(NodeId n, ContentId k);
  void RemoveHolder(NodeId n, ContentId k);

  std::shared_ptr<const Topology> topology_;
  ModelParams params_;
  std::vector<NodeRecord> nodes_;
  std::vector<OverlaySets> overlay_;
  std::vector<std::set<NodeId>> reserved_by_;
  FlowTable flows_;
  std::vector<std::vector<NodeId>> holders_;
  std::vector<std::int32_t> holder_pos_;

  std::int64_t joined_pairs_ = 0;
  std::int64_t total_kbps_ = 0;
  std::int64_t weighted_kbps_ = 0;
};

// Hops derived from the flow graph alone, ignoring the cached values.
// Throws ModelError on a cycle.
std::vector<LogicalHop> ComputeLogicalHops(const World& world, ContentId k);

// Recomputes every cached quantity from scratch and lists each mismatch or
// broken rule. Empty when the world is consistent.
std::vector<std::string> CheckInvariants(const World& world);

}  // namespace meshweave
