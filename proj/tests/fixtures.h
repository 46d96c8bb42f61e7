#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "meshweave/world.h"

namespace meshweave::testing {

// Hand-built world: `as_edges` over `as_count` ASes, then one node per entry
// of `node_as`. The first `oss.size()` nodes are OSSs (oss[i] = content),
// the rest are peers with `peer_mbps` capacities.
inline World MakeWorld(std::size_t as_count,
                       std::vector<std::pair<AsId, AsId>> as_edges,
                       std::vector<AsId> node_as, std::vector<ContentId> oss,
                       std::vector<double> peer_mbps, ModelParams params = {},
                       double oss_mbps = 30.0) {
  AsGraph graph(as_count, std::move(as_edges));
  auto topo = std::make_shared<const Topology>(std::move(graph),
                                               Placement{std::move(node_as)});
  World w(topo, params);
  for (ContentId k : oss) w.AddOss(k, Rate::FromMbps(oss_mbps));
  for (double m : peer_mbps) w.AddPeer(Rate::FromMbps(m));
  return w;
}

// Makes `peer` a viewer of k fed by `sources` (node, Mbps).
inline void Attach(World& w, NodeId peer, ContentId k,
                   const std::vector<std::pair<NodeId, double>>& sources) {
  Rate total;
  for (const auto& s : sources) total += Rate::FromMbps(s.second);
  w.SetDemand(peer, k, total);
  int deepest = -1;
  for (const auto& [src, mbps] : sources) {
    w.AddFlow(src, peer, k, Rate::FromMbps(mbps));
    deepest = std::max(deepest, *w.hop(src, k));
  }
  w.SetHop(peer, k, deepest + 1);
  w.Admit(peer, k);
}

}  // namespace meshweave::testing

#include <random>

#include "meshweave/configurator.h"

namespace meshweave::testing {

// A world grown by random joins and departures through the configurator,
// over `as_count` ASes on a path, with two contents.
inline World GrowRandomWorld(std::mt19937_64& rng, std::size_t peers,
                             std::size_t as_count, int steps) {
  std::vector<std::pair<AsId, AsId>> edges;
  for (AsId a = 0; a + 1 < as_count; ++a) edges.emplace_back(a, a + 1);
  std::vector<AsId> node_as;
  for (std::size_t i = 0; i < peers + 2; ++i) node_as.push_back(rng() % as_count);
  std::vector<double> caps;
  for (std::size_t i = 0; i < peers; ++i) caps.push_back(0.5 * double(1 + rng() % 20));
  World w = MakeWorld(as_count, edges, node_as, {0, 1}, caps,
                      ModelParams{2, 4, 4}, 2.0 * double(2 + rng() % 4));
  OverlayOptions options;
  Rng overlay(rng());
  const std::vector<std::vector<ContentId>> sets{{0}, {1}, {0, 1}};
  for (int s = 0; s < steps; ++s) {
    const NodeId p = static_cast<NodeId>(2 + rng() % peers);
    if (w.node(p).state == NodeState::kWaiting) {
      JoinRequest req;
      req.peer = p;
      req.contents = sets[rng() % 3];
      const Policy policy = kAllPolicies[rng() % 6];
      InitialConfiguration(w, req, policy, options, overlay);
    } else {
      RepairOnDeparture(w, p, overlay);
    }
  }
  return w;
}

}  // namespace meshweave::testing
