#include "meshweave/simulator.h"

#include <cmath>
#include <queue>
#include <sstream>

#include <fmt/format.h>

namespace meshweave {

namespace {

// Salts for the independent random streams of one run.
enum StreamSalt : std::uint64_t {
  kTopologyStream = 1,
  kPlacementStream = 2,
  kBandwidthStream = 3,
  kDemandStream = 4,
  kOverlayStream = 5,
};

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  NodeId peer;
  std::uint32_t epoch;

  bool operator>(const Event& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

}  // namespace

std::size_t ScenarioConfig::batch_count() const {
  return static_cast<std::size_t>(std::llround((sim_days - warmup_days) / batch_days));
}

void ScenarioConfig::Validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(fmt::format("invalid {}", field));
  };
  require(peer_count >= 1, "peer_count");
  require(as_count >= 1, "as_count");
  require(edges_per_node >= 1 && (as_count == 1 || as_count > edges_per_node),
          "edges_per_node");
  require(oss_per_content >= 1, "oss_per_content");
  require(oss_bandwidth_mbps > 0.0, "oss_bandwidth_mbps");
  require(peer_bandwidth_min_mbps > 0.0 &&
              peer_bandwidth_max_mbps >= peer_bandwidth_min_mbps,
          "peer_bandwidth range");
  require(view_rate_mbps > 0.0 && Rate::FromMbps(view_rate_mbps).positive(),
          "view_rate_mbps");
  require(hop_limit >= 1, "hop_limit");
  require(reserve_budget >= 1, "reserve_budget");
  require(mean_viewing_seconds > 0.0, "mean_viewing_seconds");
  require(viewing_cv > 0.0, "viewing_cv");
  require(mean_waiting_seconds > 0.0, "mean_waiting_seconds");
  require(day_seconds > 0.0, "day_seconds");
  require(sim_days > 0.0 && warmup_days >= 0.0 && batch_days > 0.0 &&
              warmup_days < sim_days,
          "sim_days/warmup_days/batch_days");
  const double batches = (sim_days - warmup_days) / batch_days;
  require(std::abs(batches - std::round(batches)) < 1e-9,
          "sim_days: warmup + batches * batch_days must equal sim_days");
  require(bandwidth_class_mbps >= 0.0, "bandwidth_class_mbps");
  try {
    catalog.Validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("invalid request_distribution: {}", e.what()));
  }
}

std::shared_ptr<const Topology> BuildTopology(const ScenarioConfig& config) {
  AsGraph graph =
      config.as_count == 1
          ? AsGraph(1, {})
          : GenerateBaGraph(config.as_count, config.edges_per_node,
                            MixSeed(config.seed, kTopologyStream));
  const std::size_t oss = config.oss_per_content * config.content_count();
  Placement placement =
      config.placement == PlacementRule::kUniform
          ? PlaceNodes(graph, oss, config.peer_count,
                       MixSeed(config.seed, kPlacementStream))
          : PlaceNodesRoundRobin(graph, oss, config.peer_count);
  return std::make_shared<const Topology>(std::move(graph), std::move(placement));
}

World BuildWorld(const ScenarioConfig& config,
                 std::shared_ptr<const Topology> topology) {
  ModelParams params;
  params.content_count = config.content_count();
  params.hop_limit = config.hop_limit;
  params.reserve_budget = config.reserve_budget;
  World world(std::move(topology), params);
  for (ContentId k = 0; k < config.content_count(); ++k) {
    for (std::size_t o = 0; o < config.oss_per_content; ++o) {
      world.AddOss(k, Rate::FromMbps(config.oss_bandwidth_mbps));
    }
  }
  Rng rng(MixSeed(config.seed, kBandwidthStream));
  std::uniform_real_distribution<double> bw(config.peer_bandwidth_min_mbps,
                                            config.peer_bandwidth_max_mbps);
  for (std::size_t p = 0; p < config.peer_count; ++p) {
    world.AddPeer(Rate::FromMbps(bw(rng)));
  }
  return world;
}

RunReport Run(const ScenarioConfig& config, const RunHooks& hooks) {
  config.Validate();
  World world = BuildWorld(config, BuildTopology(config));
  Rng demand_rng(MixSeed(config.seed, kDemandStream));
  Rng overlay_rng(MixSeed(config.seed, kOverlayStream));

  OverlayOptions options;
  options.bandwidth_class = Rate::FromMbps(config.bandwidth_class_mbps);
  options.all_or_nothing = config.all_or_nothing;
  options.after_exchange1 = hooks.after_exchange1;

  const double horizon = config.sim_days * config.day_seconds;
  MetricsAccumulator metrics(config.warmup_days * config.day_seconds,
                             config.batch_days * config.day_seconds,
                             config.batch_count());

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::vector<std::uint32_t> epoch(world.node_count(), 0);
  auto schedule = [&](double at, EventKind kind, NodeId peer) {
    if (at <= horizon) queue.push(Event{at, seq++, kind, peer, epoch[peer]});
  };

  const NodeId first_peer =
      static_cast<NodeId>(config.oss_per_content * config.content_count());
  for (NodeId p = first_peer; p < world.node_count(); ++p) {
    schedule(SampleWaitingTime(config.mean_waiting_seconds, demand_rng),
             EventKind::kDemand, p);
  }

  RunReport report;
  report.policy = config.policy;
  report.lambda_inv_s = config.mean_waiting_seconds;
  report.seed = config.seed;
  RunStats& stats = report.stats;

  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    if (ev.epoch != epoch[ev.peer]) continue;
    metrics.Advance(ev.time, world.joined_pairs(), world.weighted_traffic_kbps(),
                    world.total_traffic_kbps());
    EventRecord record;
    record.time = ev.time;
    record.kind = ev.kind;
    record.peer = ev.peer;

    if (ev.kind == EventKind::kDemand) {
      ++stats.demands;
      JoinRequest req;
      req.peer = ev.peer;
      req.contents = SampleContentSet(config.catalog, demand_rng);
      req.view_rate = Rate::FromMbps(config.view_rate_mbps);
      req.timestamp = ev.time;
      record.requested = req.contents;
      record.join = InitialConfiguration(world, req, config.policy, options,
                                         overlay_rng);
      const auto admitted = record.join.admitted().size();
      stats.admitted_pairs += admitted;
      stats.rejected_pairs += req.contents.size() - admitted;
      stats.exchange1_swaps += record.join.exchange1_swaps;
      stats.exchange2_swaps += record.join.exchange2_partner ? 1 : 0;
      if (admitted > 0) {
        schedule(ev.time + SampleViewingTime(config.mean_viewing_seconds,
                                             config.viewing_cv, demand_rng),
                 EventKind::kViewingComplete, ev.peer);
      } else {
        schedule(ev.time + SampleWaitingTime(config.mean_waiting_seconds, demand_rng),
                 EventKind::kDemand, ev.peer);
      }
    } else {
      ++stats.completions;
      record.cascade = RepairOnDeparture(world, ev.peer, overlay_rng);
      stats.cascade_departures += record.cascade.size();
      ++epoch[ev.peer];
      schedule(ev.time + SampleWaitingTime(config.mean_waiting_seconds, demand_rng),
               EventKind::kDemand, ev.peer);
      for (NodeId v : record.cascade) {
        ++epoch[v];
        schedule(ev.time + SampleWaitingTime(config.mean_waiting_seconds, demand_rng),
                 EventKind::kDemand, v);
      }
    }
    ++stats.events;

    if (config.invariant_check_interval > 0 &&
        stats.events % config.invariant_check_interval == 0) {
      const auto bad = CheckInvariants(world);
      if (!bad.empty()) {
        std::ostringstream snap;
        world.WriteSnapshot(snap);
        throw InvariantViolation(
            fmt::format("invariant violated at t={} after event {}: {}", ev.time,
                        stats.events, bad.front()),
            snap.str());
      }
    }
    if (hooks.after_event) hooks.after_event(world, record);
  }
  metrics.Advance(horizon, world.joined_pairs(), world.weighted_traffic_kbps(),
                  world.total_traffic_kbps());
  report.batches = metrics.Results();
  return report;
}

}  // namespace meshweave
