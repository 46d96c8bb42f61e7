#include <random>
#include <sstream>

#include <doctest.h>

#include "fixtures.h"
#include "meshweave/world.h"

namespace meshweave {
namespace {

using testing::Attach;
using testing::MakeWorld;

// Two ASes; OSS for content 1 in AS 0, three peers spread over both.
World SmallWorld() {
  return MakeWorld(2, {{0, 1}}, {0, 0, 1, 1}, {0}, {10.0, 4.0, 6.0},
                   ModelParams{1, 4, 4});
}

TEST_CASE("rate arithmetic is exact") {
  CHECK(Rate::FromMbps(0.5).kbps() == 500);
  CHECK((Rate::FromMbps(0.1) + Rate::FromMbps(0.2)) == Rate::FromMbps(0.3));
  CHECK(Rate::FromMbps(2.0).ToString() == "2.000");
  CHECK(min(Rate::FromMbps(1), Rate::FromMbps(3)) == Rate::FromMbps(1));
}

TEST_CASE("headroom") {
  NodeRecord r;
  r.capacity = Rate::FromMbps(10);
  CHECK(r.headroom() == Rate::FromMbps(10));
  r.capacity = Rate::FromMbps(4);
  r.upload = Rate::FromMbps(4);
  CHECK(r.headroom().zero());
  r.capacity = Rate::FromMbps(30);
  r.upload = Rate::FromMbps(2);
  CHECK(r.headroom() == Rate::FromMbps(28));
}

TEST_CASE("add_flow updates both ledgers") {
  World w = SmallWorld();
  w.SetDemand(1, 0, Rate::FromMbps(2));
  w.AddFlow(0, 1, 0, Rate::FromMbps(2));
  CHECK(w.node(0).upload == Rate::FromMbps(2));
  CHECK(w.node(1).received[0] == Rate::FromMbps(2));
  CHECK(w.flows().get(0, 1, 0) == Rate::FromMbps(2));
  CHECK(w.sets(1, 0).parents == std::set<NodeId>{0});
  CHECK(w.sets(0, 0).children == std::set<NodeId>{1});
  CHECK(w.joined_pairs() == 1);
  CHECK(w.total_traffic_kbps() == 2000);
  CHECK(w.weighted_traffic_kbps() == 2000);
}

TEST_CASE("add_flow beyond headroom leaves the world unchanged") {
  World w = SmallWorld();
  w.SetDemand(3, 0, Rate::FromMbps(5));
  w.SetDemand(1, 0, Rate::FromMbps(2));
  w.AddFlow(0, 1, 0, Rate::FromMbps(2));
  w.SetHop(1, 0, 1);
  w.Admit(1, 0);
  const World before = w;
  CHECK_THROWS_AS(w.AddFlow(2, 3, 0, Rate::FromMbps(5)), CapacityError);
  CHECK(w == before);
  CHECK_THROWS_AS(w.AddFlow(0, 1, 0, Rate::FromMbps(1)), CapacityError);
  CHECK(w == before);
  CHECK_THROWS_AS(w.AddFlow(1, 0, 0, Rate::FromMbps(1)), ModelError);
  CHECK_THROWS_AS(w.AddFlow(0, 3, 0, Rate::Zero()), ModelError);
}

TEST_CASE("two partial flows add up") {
  World w = SmallWorld();
  Attach(w, 1, 0, {{0, 2.0}});
  w.SetDemand(2, 0, Rate::FromMbps(2));
  w.AddFlow(0, 2, 0, Rate::FromMbps(1));
  CHECK(!w.node(2).fully_served(0));
  w.AddFlow(1, 2, 0, Rate::FromMbps(1));
  CHECK(w.node(2).received[0] == Rate::FromMbps(2));
  CHECK(w.node(2).fully_served(0));
  CHECK(w.joined_pairs() == 2);
}

TEST_CASE("remove_flows_of") {
  SUBCASE("isolated node is a no-op") {
    World w = SmallWorld();
    const World before = w;
    CHECK(w.RemoveFlowsOf(3).empty());
    CHECK(w == before);
  }
  SUBCASE("parent of two children") {
    World w = SmallWorld();
    Attach(w, 1, 0, {{0, 2.0}});
    Attach(w, 2, 0, {{1, 2.0}});
    Attach(w, 3, 0, {{1, 2.0}});
    OrphanList orphans = w.RemoveFlowsOf(1);
    CHECK(orphans == OrphanList{{2, 0}, {3, 0}});
    for (NodeId c : {2u, 3u}) {
      CHECK(w.node(c).received[0].zero());
      CHECK(!w.sets(c, 0).parents.contains(1));
    }
    CHECK(w.node(1).upload.zero());
    CHECK(w.node(0).upload.zero());
    CHECK(w.sets(1, 0).empty());
    const World once = w;
    CHECK(w.RemoveFlowsOf(1).empty());
    CHECK(w == once);
  }
  SUBCASE("reserves pointing at the node are purged") {
    World w = SmallWorld();
    Attach(w, 1, 0, {{0, 2.0}});
    Attach(w, 2, 0, {{0, 2.0}});
    w.AddReserve(2, 0, 1);
    w.AddReserve(1, 0, 2);
    w.RemoveFlowsOf(1);
    CHECK(w.sets(2, 0).reserves.empty());
    CHECK(w.reserved_by(1, 0).empty());
    CHECK(w.reserved_by(2, 0).empty());
  }
}

TEST_CASE("logical hops") {
  World w = MakeWorld(1, {}, {0, 0, 0, 0}, {0}, {10, 10, 10}, ModelParams{1, 4, 4});
  Attach(w, 1, 0, {{0, 2.0}});
  Attach(w, 2, 0, {{1, 2.0}});
  Attach(w, 3, 0, {{1, 1.0}, {2, 1.0}});
  CHECK(w.hop(0, 0) == 0);
  CHECK(w.hop(1, 0) == 1);
  CHECK(w.hop(3, 0) == 3);
  auto hops = ComputeLogicalHops(w, 0);
  CHECK(hops[3] == 3);
  w.SetHop(3, 0, 7);
  w.RecomputeLogicalHops(0);
  CHECK(w.hop(3, 0) == 3);
  CHECK(CheckInvariants(w).empty());
}

TEST_CASE("relabel swap is an involution") {
  World w = MakeWorld(2, {{0, 1}}, {0, 0, 1, 1, 0}, {0}, {10, 10, 10, 10},
                      ModelParams{1, 4, 4});
  Attach(w, 1, 0, {{0, 2.0}});
  Attach(w, 2, 0, {{1, 2.0}});
  Attach(w, 3, 0, {{2, 1.0}, {0, 1.0}});
  Attach(w, 4, 0, {{0, 2.0}});
  w.AddReserve(4, 0, 2);
  REQUIRE(CheckInvariants(w).empty());
  const World before = w;
  const ContentId scope[] = {0};
  w.RelabelPositions(1, 2, scope);
  CHECK(CheckInvariants(w).empty());
  CHECK(w.sets(4, 0).reserves == std::set<NodeId>{1});
  w.RelabelPositions(1, 2, scope);
  CHECK(w == before);
}

TEST_CASE("snapshot is deterministic and ordered") {
  World w = SmallWorld();
  Attach(w, 2, 0, {{0, 2.0}});
  Attach(w, 1, 0, {{0, 2.0}});
  std::ostringstream out;
  w.WriteSnapshot(out);
  CHECK(out.str() ==
        "content 1\n0 1 2.000\n0 2 2.000\nledger\n"
        "0 30.000 4.000 0.000\n1 10.000 0.000 2.000\n"
        "2 4.000 0.000 2.000\n3 6.000 0.000 0.000\n");
}

// Random joins and departures through the raw ledger API. Departures cascade
// to every peer left short so that viewers stay fully served.
TEST_CASE("invariants survive random operation sequences") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 30; ++round) {
    const std::size_t peers = 15;
    std::vector<AsId> node_as;
    for (std::size_t i = 0; i < peers + 2; ++i) node_as.push_back(rng() % 3);
    std::vector<double> caps;
    for (std::size_t i = 0; i < peers; ++i) caps.push_back(0.5 + double(rng() % 20) / 2);
    World w = MakeWorld(3, {{0, 1}, {1, 2}}, node_as, {0, 1}, caps,
                        ModelParams{2, 4, 4}, 4.0);
    for (int step = 0; step < 200; ++step) {
      const NodeId p = 2 + rng() % peers;
      const ContentId k = rng() % 2;
      if (w.holds(p, k)) {
        std::vector<NodeId> gone{p};
        while (!gone.empty()) {
          const NodeId v = gone.back();
          gone.pop_back();
          for (auto [c, ck] : w.Detach(v)) {
            if (w.node(c).state != NodeState::kWaiting) gone.push_back(c);
          }
        }
      } else {
        std::vector<std::pair<NodeId, double>> sources;
        Rate need = Rate::FromMbps(2);
        for (NodeId h : std::vector<NodeId>(w.holders(k).begin(), w.holders(k).end())) {
          if (!need.positive()) break;
          if (h == p || !w.hop(h, k) || *w.hop(h, k) >= 4) continue;
          const Rate take = min(need, w.node(h).headroom());
          if (!take.positive()) continue;
          sources.emplace_back(h, take.mbps());
          need -= take;
        }
        if (!need.positive()) Attach(w, p, k, sources);
      }
      const auto bad = CheckInvariants(w);
      REQUIRE_MESSAGE(bad.empty(), bad.front());
    }
  }
}

}  // namespace
}  // namespace meshweave
