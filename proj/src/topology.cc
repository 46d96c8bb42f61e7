#include "meshweave/topology.h"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace meshweave {

namespace {
constexpr int kUnreachable = std::numeric_limits<int>::max();
}  // namespace

int HopMatrix::diameter() const {
  int best = 0;
  for (int v : cells_) best = std::max(best, v);
  return best;
}

AsGraph::AsGraph(std::size_t as_count,
                 std::vector<std::pair<AsId, AsId>> edges)
    : adjacency_(as_count) {
  for (auto& [u, v] : edges) {
    if (u >= as_count || v >= as_count) {
      throw TopologyError(fmt::format("edge ({}, {}) outside {} ASes", u, v,
                                      as_count));
    }
    if (u == v) throw TopologyError(fmt::format("self loop on AS {}", u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw TopologyError("duplicate edge");
  }
  for (const auto& [u, v] : edges) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& n : adjacency_) std::sort(n.begin(), n.end());
  edges_ = std::move(edges);
}

AsGraph GenerateBaGraph(std::size_t as_count, std::size_t edges_per_node,
                        std::uint64_t seed) {
  if (edges_per_node < 1 || as_count <= edges_per_node) {
    throw std::invalid_argument(fmt::format(
        "BA graph needs as_count > edges_per_node >= 1 (got {} and {})",
        as_count, edges_per_node));
  }
  std::mt19937_64 rng(seed);
  const std::size_t m = edges_per_node;
  std::vector<std::pair<AsId, AsId>> edges;
  // Each endpoint appears once per incident edge, so a uniform draw from this
  // list is a degree-proportional draw.
  std::vector<AsId> endpoints;

  for (AsId u = 0; u < m; ++u) {
    for (AsId v = u + 1; v < m; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }

  std::vector<AsId> targets;
  for (AsId node = static_cast<AsId>(m); node < as_count; ++node) {
    targets.clear();
    if (endpoints.empty()) {
      // m == 1: the seed graph is a single isolated vertex.
      targets.push_back(0);
    }
    while (targets.size() < m) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      AsId t = endpoints[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
    for (AsId t : targets) {
      edges.emplace_back(t, node);
      endpoints.push_back(t);
      endpoints.push_back(node);
    }
  }
  return AsGraph(as_count, std::move(edges));
}

HopMatrix AllPairsHops(const AsGraph& graph) {
  const std::size_t n = graph.as_count();
  HopMatrix hops(n, kUnreachable);
  std::queue<AsId> frontier;
  for (AsId src = 0; src < n; ++src) {
    hops.at(src, src) = 0;
    frontier.push(src);
    while (!frontier.empty()) {
      AsId u = frontier.front();
      frontier.pop();
      for (AsId v : graph.neighbors(u)) {
        if (hops.at(src, v) == kUnreachable) {
          hops.at(src, v) = hops.at(src, u) + 1;
          frontier.push(v);
        }
      }
    }
    for (AsId dst = 0; dst < n; ++dst) {
      if (hops.at(src, dst) == kUnreachable) {
        throw TopologyError(
            fmt::format("AS graph disconnected: {} cannot reach {}", src, dst));
      }
    }
  }
  return hops;
}

Placement PlaceNodes(const AsGraph& graph, std::size_t oss_count,
                     std::size_t peer_count, std::uint64_t seed) {
  if (oss_count < 1 || peer_count < 1 || graph.as_count() == 0) {
    throw std::invalid_argument("placement needs >= 1 OSS, peer and AS");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<AsId> pick(
      0, static_cast<AsId>(graph.as_count() - 1));
  Placement p;
  p.node_as.resize(oss_count + peer_count);
  for (auto& as : p.node_as) as = pick(rng);
  return p;
}

Placement PlaceNodesRoundRobin(const AsGraph& graph, std::size_t oss_count,
                               std::size_t peer_count) {
  if (oss_count < 1 || peer_count < 1 || graph.as_count() == 0) {
    throw std::invalid_argument("placement needs >= 1 OSS, peer and AS");
  }
  Placement p;
  p.node_as.resize(oss_count + peer_count);
  for (std::size_t n = 0; n < p.node_as.size(); ++n) {
    p.node_as[n] = static_cast<AsId>(n % graph.as_count());
  }
  return p;
}

int PhysicalDistance(const Placement& placement, const HopMatrix& hops,
                     NodeId i, NodeId j) {
  return hops.at(placement.node_as.at(i), placement.node_as.at(j)) + 1;
}

Topology::Topology(AsGraph graph, Placement placement)
    : graph_(std::move(graph)),
      hops_(AllPairsHops(graph_)),
      placement_(std::move(placement)) {
  for (AsId as : placement_.node_as) {
    if (as >= graph_.as_count()) {
      throw TopologyError(fmt::format("node placed in unknown AS {}", as));
    }
  }
}

void WriteTopology(std::ostream& out, const AsGraph& graph,
                   const Placement& placement) {
  out << graph.as_count() << ' ' << graph.edges().size() << '\n';
  for (const auto& [u, v] : graph.edges()) out << u << ' ' << v << '\n';
  for (std::size_t n = 0; n < placement.node_as.size(); ++n) {
    out << n << ' ' << placement.node_as[n] << '\n';
  }
}

std::pair<AsGraph, Placement> ReadTopology(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&] {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) {
    return TopologyError(fmt::format("topology line {}: {}", line_no, msg));
  };

  if (!next()) throw fail("missing header");
  std::size_t as_count = 0, edge_count = 0;
  {
    std::istringstream s(line);
    if (!(s >> as_count >> edge_count)) throw fail("bad header");
  }
  std::vector<std::pair<AsId, AsId>> edges;
  edges.reserve(edge_count);
  for (std::size_t e = 0; e < edge_count; ++e) {
    if (!next()) throw fail("truncated edge list");
    std::istringstream s(line);
    AsId u, v;
    if (!(s >> u >> v)) throw fail("bad edge");
    edges.emplace_back(u, v);
  }
  Placement placement;
  while (next()) {
    std::istringstream s(line);
    std::size_t node;
    AsId as;
    if (!(s >> node >> as)) throw fail("bad placement");
    if (node != placement.node_as.size()) throw fail("placement out of order");
    if (as >= as_count) throw fail("placement AS out of range");
    placement.node_as.push_back(as);
  }
  return {AsGraph(as_count, std::move(edges)), std::move(placement)};
}

}  // namespace meshweave
