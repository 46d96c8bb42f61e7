#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace meshweave {

using AsId = std::uint32_t;
using NodeId = std::uint32_t;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Square matrix of AS-to-AS shortest path hop counts.
class HopMatrix {
 public:
  HopMatrix() = default;
  explicit HopMatrix(std::size_t size, int fill = 0)
      : size_(size), cells_(size * size, fill) {}

  std::size_t size() const { return size_; }
  int at(AsId a, AsId b) const { return cells_[a * size_ + b]; }
  int& at(AsId a, AsId b) { return cells_[a * size_ + b]; }
  int diameter() const;

  friend bool operator==(const HopMatrix&, const HopMatrix&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<int> cells_;
};

// Undirected AS-level graph. Edges are stored once with u < v, sorted.
class AsGraph {
 public:
  AsGraph() = default;
  // Throws TopologyError on self loops, duplicate edges or out-of-range ids.
  AsGraph(std::size_t as_count, std::vector<std::pair<AsId, AsId>> edges);

  std::size_t as_count() const { return adjacency_.size(); }
  const std::vector<std::pair<AsId, AsId>>& edges() const { return edges_; }
  const std::vector<AsId>& neighbors(AsId as) const { return adjacency_[as]; }
  std::size_t degree(AsId as) const { return adjacency_[as].size(); }

  friend bool operator==(const AsGraph& a, const AsGraph& b) {
    return a.edges_ == b.edges_ && a.adjacency_.size() == b.adjacency_.size();
  }

 private:
  std::vector<std::pair<AsId, AsId>> edges_;
  std::vector<std::vector<AsId>> adjacency_;
};

// Barabasi-Albert preferential attachment seeded from a complete graph on
// `edges_per_node` vertices. Yields m(m-1)/2 + (n-m)m edges.
AsGraph GenerateBaGraph(std::size_t as_count, std::size_t edges_per_node,
                        std::uint64_t seed);

// BFS from every AS. Throws TopologyError when the graph is disconnected.
HopMatrix AllPairsHops(const AsGraph& graph);

struct Placement {
  std::vector<AsId> node_as;

  std::size_t node_count() const { return node_as.size(); }
  friend bool operator==(const Placement&, const Placement&) = default;
};

// Node ids 0..oss_count-1 are origin servers, the remaining ids are peers.
// Every node lands in a uniformly random AS.
Placement PlaceNodes(const AsGraph& graph, std::size_t oss_count,
                     std::size_t peer_count, std::uint64_t seed);

// Deterministic alternative: node n goes to AS (n mod as_count).
Placement PlaceNodesRoundRobin(const AsGraph& graph, std::size_t oss_count,
                               std::size_t peer_count);

// AS hop count between the nodes' ASes plus one. Throws std::out_of_range for
// nodes without a placement.
int PhysicalDistance(const Placement& placement, const HopMatrix& hops,
                     NodeId i, NodeId j);

// Immutable bundle shared read-only by worlds and replications.
class Topology {
 public:
  Topology(AsGraph graph, Placement placement);

  const AsGraph& graph() const { return graph_; }
  const HopMatrix& hops() const { return hops_; }
  const Placement& placement() const { return placement_; }
  AsId as_of(NodeId n) const { return placement_.node_as.at(n); }

  int distance(NodeId i, NodeId j) const {
    return hops_.at(placement_.node_as[i], placement_.node_as[j]) + 1;
  }

 private:
  AsGraph graph_;
  HopMatrix hops_;
  Placement placement_;
};

// Text format:
//   as_count edge_count
//   u v                 (edge_count lines)
//   node_id as_id       (one line per placed node)
void WriteTopology(std::ostream& out, const AsGraph& graph,
                   const Placement& placement);
std::pair<AsGraph, Placement> ReadTopology(std::istream& in);

}  // namespace meshweave
