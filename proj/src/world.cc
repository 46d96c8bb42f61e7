#include "meshweave/world.h"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

namespace meshweave {

std::string Rate::ToString() const {
  const std::int64_t mag = std::llabs(kbps_);
  return fmt::format("{}{}.{:03}", kbps_ < 0 ? "-" : "", mag / 1000, mag % 1000);
}

Rate FlowTable::get(NodeId src, NodeId dst, ContentId k) const {
  auto it = entries_.find(FlowKey{src, dst, k});
  return it == entries_.end() ? Rate::Zero() : it->second;
}

World::World(std::shared_ptr<const Topology> topology, ModelParams params)
    : topology_(std::move(topology)),
      params_(params),
      holders_(params.content_count) {
  if (!topology_) throw ModelError("world needs a topology");
  if (params_.content_count == 0) throw ModelError("content_count must be > 0");
  if (params_.hop_limit < 1) throw ModelError("hop_limit must be >= 1");
}

NodeId World::AddNode(NodeRecord record) {
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (id >= topology_->placement().node_count()) {
    throw ModelError(fmt::format("node {} has no placement", id));
  }
  record.id = id;
  record.as_id = topology_->as_of(id);
  record.demand.assign(params_.content_count, Rate::Zero());
  record.received.assign(params_.content_count, Rate::Zero());
  nodes_.push_back(std::move(record));
  overlay_.resize(overlay_.size() + params_.content_count);
  reserved_by_.resize(reserved_by_.size() + params_.content_count);
  holder_pos_.resize(holder_pos_.size() + params_.content_count, -1);
  return id;
}

NodeId World::AddOss(ContentId k, Rate capacity) {
  if (k >= params_.content_count) throw ModelError("OSS content out of range");
  NodeRecord r;
  r.role = Role::kOss;
  r.served_content = k;
  r.capacity = capacity;
  r.state = NodeState::kServing;
  const NodeId id = AddNode(std::move(r));
  overlay_[index(id, k)].hop = 0;
  AddHolder(id, k);
  return id;
}

NodeId World::AddPeer(Rate capacity) {
  NodeRecord r;
  r.role = Role::kPeer;
  r.capacity = capacity;
  return AddNode(std::move(r));
}

std::vector<NodeId> World::oss_nodes(ContentId k) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.is_oss() && n.served_content == k) out.push_back(n.id);
  }
  return out;
}

std::vector<ContentId> World::viewed_contents(NodeId n) const {
  std::vector<ContentId> out;
  if (nodes_.at(n).is_oss()) return out;
  for (ContentId k = 0; k < params_.content_count; ++k) {
    if (holds(n, k)) out.push_back(k);
  }
  return out;
}

void World::AdjustReceived(NodeId dst, ContentId k, Rate delta) {
  NodeRecord& d = nodes_[dst];
  const bool before = d.fully_served(k);
  d.received[k] += delta;
  const bool after = d.fully_served(k);
  joined_pairs_ += static_cast<int>(after) - static_cast<int>(before);
}

void World::Link(NodeId src, NodeId dst, ContentId k, Rate rate) {
  flows_.entries_[FlowKey{src, dst, k}] += rate;
  nodes_[src].upload += rate;
  AdjustReceived(dst, k, rate);
  overlay_[index(dst, k)].parents.insert(src);
  overlay_[index(src, k)].children.insert(dst);
  total_kbps_ += rate.kbps();
  weighted_kbps_ += rate.kbps() * distance(src, dst);
}

void World::Unlink(NodeId src, NodeId dst, ContentId k) {
  auto it = flows_.entries_.find(FlowKey{src, dst, k});
  if (it == flows_.entries_.end()) {
    throw ModelError(fmt::format("no flow {}->{} for content {}", src, dst, k + 1));
  }
  const Rate rate = it->second;
  flows_.entries_.erase(it);
  nodes_[src].upload -= rate;
  AdjustReceived(dst, k, Rate::Zero() - rate);
  overlay_[index(dst, k)].parents.erase(src);
  overlay_[index(src, k)].children.erase(dst);
  total_kbps_ -= rate.kbps();
  weighted_kbps_ -= rate.kbps() * distance(src, dst);
}

void World::AddFlow(NodeId src, NodeId dst, ContentId k, Rate rate) {
  if (src >= nodes_.size() || dst >= nodes_.size() || src == dst ||
      k >= params_.content_count) {
    throw ModelError(fmt::format("bad flow {}->{} content {}", src, dst, k + 1));
  }
  if (!rate.positive()) throw ModelError("flow rate must be positive");
  const NodeRecord& s = nodes_[src];
  const NodeRecord& d = nodes_[dst];
  if (d.is_oss()) throw ModelError(fmt::format("flow into OSS {}", dst));
  if (s.is_oss() && s.served_content != k) {
    throw ModelError(fmt::format("OSS {} does not serve content {}", src, k + 1));
  }
  if (s.headroom() < rate) {
    throw CapacityError(fmt::format("node {} headroom {} < {}", src,
                                    s.headroom().ToString(), rate.ToString()));
  }
  if (d.received[k] + rate > d.demand[k]) {
    throw CapacityError(fmt::format("node {} would receive beyond demand {}",
                                    dst, d.demand[k].ToString()));
  }
  Link(src, dst, k, rate);
}

OrphanList World::RemoveContentFlows(NodeId n, ContentId k) {
  OrphanList orphans;
  OverlaySets& own = overlay_[index(n, k)];
  const std::vector<NodeId> children(own.children.begin(), own.children.end());
  for (NodeId c : children) {
    Unlink(n, c, k);
    orphans.emplace_back(c, k);
  }
  const std::vector<NodeId> parents(own.parents.begin(), own.parents.end());
  for (NodeId p : parents) Unlink(p, n, k);
  for (NodeId r : own.reserves) reserved_by_[index(r, k)].erase(n);
  own.reserves.clear();
  auto& owners = reserved_by_[index(n, k)];
  for (NodeId o : owners) overlay_[index(o, k)].reserves.erase(n);
  owners.clear();
  if (!(nodes_[n].is_oss() && nodes_[n].served_content == k)) own.hop.reset();
  return orphans;
}

OrphanList World::RemoveFlowsOf(NodeId n) {
  OrphanList orphans;
  for (ContentId k = 0; k < params_.content_count; ++k) {
    auto part = RemoveContentFlows(n, k);
    orphans.insert(orphans.end(), part.begin(), part.end());
  }
  std::sort(orphans.begin(), orphans.end());
  return orphans;
}

void World::SetDemand(NodeId n, ContentId k, Rate demand) {
  NodeRecord& r = nodes_.at(n);
  if (r.is_oss()) throw ModelError("OSS nodes have no viewing demand");
  if (demand < r.received[k]) throw ModelError("demand below received rate");
  const bool before = r.fully_served(k);
  r.demand[k] = demand;
  const bool after = r.fully_served(k);
  joined_pairs_ += static_cast<int>(after) - static_cast<int>(before);
}

void World::AddHolder(NodeId n, ContentId k) {
  auto& pos = holder_pos_[index(n, k)];
  if (pos >= 0) return;
  pos = static_cast<std::int32_t>(holders_[k].size());
  holders_[k].push_back(n);
}

void World::RemoveHolder(NodeId n, ContentId k) {
  auto& pos = holder_pos_[index(n, k)];
  if (pos < 0) return;
  auto& list = holders_[k];
  const NodeId last = list.back();
  list[pos] = last;
  holder_pos_[index(last, k)] = pos;
  list.pop_back();
  pos = -1;
}

void World::Admit(NodeId n, ContentId k) {
  NodeRecord& r = nodes_.at(n);
  if (r.is_oss()) throw ModelError("cannot admit an OSS");
  AddHolder(n, k);
  r.state = NodeState::kViewing;
}

void World::Release(NodeId n, ContentId k) {
  NodeRecord& r = nodes_.at(n);
  if (r.is_oss()) throw ModelError("cannot release an OSS");
  RemoveHolder(n, k);
  for (ContentId c = 0; c < params_.content_count; ++c) {
    if (holds(n, c)) return;
  }
  r.state = NodeState::kWaiting;
}

OrphanList World::Detach(NodeId n) {
  if (nodes_.at(n).is_oss()) throw ModelError("cannot detach an OSS");
  OrphanList orphans = RemoveFlowsOf(n);
  for (ContentId k = 0; k < params_.content_count; ++k) {
    RemoveHolder(n, k);
    SetDemand(n, k, Rate::Zero());
  }
  nodes_[n].state = NodeState::kWaiting;
  return orphans;
}

void World::AddReserve(NodeId owner, ContentId k, NodeId member) {
  OverlaySets& s = overlay_[index(owner, k)];
  if (owner == member) throw ModelError("a node cannot reserve itself");
  if (s.parents.contains(member)) throw ModelError("reserve is already a parent");
  if (s.parents.size() + s.reserves.size() >= params_.reserve_budget &&
      !s.reserves.contains(member)) {
    throw ModelError("reserve budget exceeded");
  }
  s.reserves.insert(member);
  reserved_by_[index(member, k)].insert(owner);
}

void World::RemoveReserve(NodeId owner, ContentId k, NodeId member) {
  overlay_[index(owner, k)].reserves.erase(member);
  reserved_by_[index(member, k)].erase(owner);
}

void World::SetHop(NodeId n, ContentId k, LogicalHop hop) {
  overlay_[index(n, k)].hop = hop;
}

std::vector<LogicalHop> ComputeLogicalHops(const World& world, ContentId k) {
  const std::size_t n = world.node_count();
  std::vector<LogicalHop> hop(n);
  std::vector<std::size_t> pending(n);
  std::vector<int> deepest(n, -1);
  std::vector<char> unset_parent(n, 0);
  std::deque<NodeId> ready;
  for (NodeId v = 0; v < n; ++v) {
    pending[v] = world.sets(v, k).parents.size();
    if (pending[v] == 0) {
      const auto& r = world.node(v);
      if (r.is_oss() && r.served_content == k) hop[v] = 0;
      ready.push_back(v);
    }
  }
  std::size_t processed = 0;
  while (!ready.empty()) {
    const NodeId u = ready.front();
    ready.pop_front();
    ++processed;
    for (NodeId c : world.sets(u, k).children) {
      if (hop[u]) {
        deepest[c] = std::max(deepest[c], *hop[u]);
      } else {
        unset_parent[c] = 1;
      }
      if (--pending[c] == 0) {
        if (!unset_parent[c]) hop[c] = deepest[c] + 1;
        ready.push_back(c);
      }
    }
  }
  if (processed != n) {
    throw ModelError(fmt::format("cycle in parent graph of content {}", k + 1));
  }
  return hop;
}

void World::RecomputeLogicalHops(ContentId k) {
  const auto hops = ComputeLogicalHops(*this, k);
  for (NodeId v = 0; v < nodes_.size(); ++v) overlay_[index(v, k)].hop = hops[v];
}

void World::RefreshHops(ContentId k, std::span<const NodeId> seeds) {
  // Descendants of the seeds, inclusive.
  std::unordered_map<NodeId, std::size_t> pending;
  std::vector<NodeId> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    if (!pending.emplace(u, 0).second) continue;
    for (NodeId c : overlay_[index(u, k)].children) stack.push_back(c);
  }
  std::deque<NodeId> ready;
  for (auto& [v, count] : pending) {
    for (NodeId p : overlay_[index(v, k)].parents) count += pending.contains(p);
  }
  for (const auto& [v, count] : pending) {
    if (count == 0) ready.push_back(v);
  }
  // Order of `ready` only affects processing order among independent nodes.
  std::sort(ready.begin(), ready.end());
  std::size_t processed = 0;
  while (!ready.empty()) {
    const NodeId v = ready.front();
    ready.pop_front();
    ++processed;
    OverlaySets& s = overlay_[index(v, k)];
    if (s.parents.empty()) {
      const auto& r = nodes_[v];
      s.hop = (r.is_oss() && r.served_content == k) ? LogicalHop(0) : std::nullopt;
    } else {
      LogicalHop h = 0;
      for (NodeId p : s.parents) {
        const LogicalHop ph = overlay_[index(p, k)].hop;
        if (!ph) {
          h.reset();
          break;
        }
        h = std::max(*h, *ph + 1);
      }
      s.hop = h;
    }
    for (NodeId c : s.children) {
      if (--pending[c] == 0) ready.push_back(c);
    }
  }
  if (processed != pending.size()) {
    throw ModelError(fmt::format("cycle in parent graph of content {}", k + 1));
  }
}

std::pair<Rate, Rate> World::UploadsAfterRelabel(
    NodeId a, NodeId b, std::span<const ContentId> scope) const {
  Rate ua = nodes_.at(a).upload;
  Rate ub = nodes_.at(b).upload;
  for (ContentId k : scope) {
    Rate out_a, out_b;
    for (NodeId c : sets(a, k).children) out_a += flows_.get(a, c, k);
    for (NodeId c : sets(b, k).children) out_b += flows_.get(b, c, k);
    ua = ua - out_a + out_b;
    ub = ub - out_b + out_a;
  }
  return {ua, ub};
}

void World::RelabelPositions(NodeId a, NodeId b,
                             std::span<const ContentId> scope) {
  if (a == b) throw ModelError("cannot swap a node with itself");
  const NodeRecord& ra = nodes_.at(a);
  const NodeRecord& rb = nodes_.at(b);
  if (ra.is_oss() || rb.is_oss()) throw ModelError("OSS nodes never swap");
  for (ContentId k : scope) {
    if (!holds(a, k) || !holds(b, k)) {
      throw ModelError(fmt::format("swap {}<->{}: both must view content {}", a,
                                   b, k + 1));
    }
    if (ra.demand[k] != rb.demand[k]) {
      throw ModelError("swap between different viewing rates");
    }
  }
  const auto [ua, ub] = UploadsAfterRelabel(a, b, scope);
  if (ua > ra.capacity || ub > rb.capacity) {
    throw CapacityError(fmt::format("swap {}<->{} exceeds upload capacity", a, b));
  }

  auto sigma = [a, b](NodeId x) { return x == a ? b : (x == b ? a : x); };
  for (ContentId k : scope) {
    std::map<std::pair<NodeId, NodeId>, Rate> moved_flows;
    std::set<std::pair<NodeId, NodeId>> moved_reserves;  // (owner, member)
    for (NodeId x : {a, b}) {
      const OverlaySets& s = overlay_[index(x, k)];
      for (NodeId p : s.parents) moved_flows[{p, x}] = flows_.get(p, x, k);
      for (NodeId c : s.children) moved_flows[{x, c}] = flows_.get(x, c, k);
      for (NodeId r : s.reserves) moved_reserves.emplace(x, r);
      for (NodeId o : reserved_by_[index(x, k)]) moved_reserves.emplace(o, x);
    }
    for (const auto& [edge, rate] : moved_flows) Unlink(edge.first, edge.second, k);
    for (const auto& [owner, member] : moved_reserves) {
      overlay_[index(owner, k)].reserves.erase(member);
      reserved_by_[index(member, k)].erase(owner);
    }
    for (const auto& [edge, rate] : moved_flows) {
      Link(sigma(edge.first), sigma(edge.second), k, rate);
    }
    for (const auto& [owner, member] : moved_reserves) {
      overlay_[index(sigma(owner), k)].reserves.insert(sigma(member));
      reserved_by_[index(sigma(member), k)].insert(sigma(owner));
    }
    std::swap(overlay_[index(a, k)].hop, overlay_[index(b, k)].hop);
  }
}

void World::WriteSnapshot(std::ostream& out) const {
  for (ContentId k = 0; k < params_.content_count; ++k) {
    out << "content " << k + 1 << '\n';
    for (const auto& [key, rate] : flows_) {
      if (key.content == k) {
        out << key.src << ' ' << key.dst << ' ' << rate.ToString() << '\n';
      }
    }
  }
  out << "ledger\n";
  for (const auto& n : nodes_) {
    out << n.id << ' ' << n.capacity.ToString() << ' ' << n.upload.ToString();
    for (Rate r : n.received) out << ' ' << r.ToString();
    out << '\n';
  }
}

bool operator==(const World& a, const World& b) {
  auto same_nodes = [&] {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
      const auto& x = a.nodes_[i];
      const auto& y = b.nodes_[i];
      if (x.id != y.id || x.role != y.role ||
          x.served_content != y.served_content || x.as_id != y.as_id ||
          x.capacity != y.capacity || x.upload != y.upload ||
          x.demand != y.demand || x.received != y.received ||
          x.state != y.state) {
        return false;
      }
    }
    return true;
  };
  return a.topology_ == b.topology_ && same_nodes() &&
         a.overlay_ == b.overlay_ && a.reserved_by_ == b.reserved_by_ &&
         a.flows_ == b.flows_ && a.holders_ == b.holders_ &&
         a.holder_pos_ == b.holder_pos_ && a.joined_pairs_ == b.joined_pairs_ &&
         a.total_kbps_ == b.total_kbps_ && a.weighted_kbps_ == b.weighted_kbps_;
}

std::vector<std::string> CheckInvariants(const World& world) {
  std::vector<std::string> bad;
  const std::size_t n = world.node_count();
  const std::size_t kc = world.content_count();
  const auto& params = world.params();

  std::vector<Rate> upload(n);
  std::vector<std::vector<Rate>> received(n, std::vector<Rate>(kc));
  std::int64_t total = 0, weighted = 0;
  std::size_t parent_links = 0, child_links = 0;
  for (const auto& [key, rate] : world.flows()) {
    if (!rate.positive()) bad.push_back(fmt::format("non-positive flow {}->{}", key.src, key.dst));
    if (key.src == key.dst) bad.push_back(fmt::format("self flow at {}", key.src));
    if (world.node(key.dst).is_oss()) bad.push_back(fmt::format("flow into OSS {}", key.dst));
    const auto& s = world.node(key.src);
    if (s.is_oss() && s.served_content != key.content) {
      bad.push_back(fmt::format("OSS {} sends foreign content", key.src));
    }
    if (!world.sets(key.dst, key.content).parents.contains(key.src) ||
        !world.sets(key.src, key.content).children.contains(key.dst)) {
      bad.push_back(fmt::format("flow {}->{} k={} missing from P/C sets",
                                key.src, key.dst, key.content + 1));
    }
    upload[key.src] += rate;
    received[key.dst][key.content] += rate;
    total += rate.kbps();
    weighted += rate.kbps() * world.distance(key.src, key.dst);
  }

  std::int64_t joined = 0;
  for (NodeId v = 0; v < n; ++v) {
    const NodeRecord& r = world.node(v);
    if (r.upload != upload[v]) {
      bad.push_back(fmt::format("node {} cached m={} but flows give {}", v,
                                r.upload.ToString(), upload[v].ToString()));
    }
    if (r.upload < Rate::Zero() || r.upload > r.capacity) {
      bad.push_back(fmt::format("node {} m={} outside [0, {}]", v,
                                r.upload.ToString(), r.capacity.ToString()));
    }
    bool any_held = false;
    for (ContentId k = 0; k < kc; ++k) {
      const OverlaySets& s = world.sets(v, k);
      parent_links += s.parents.size();
      child_links += s.children.size();
      if (r.received[k] != received[v][k]) {
        bad.push_back(fmt::format("node {} k={} cached n={} but flows give {}",
                                  v, k + 1, r.received[k].ToString(),
                                  received[v][k].ToString()));
      }
      if (r.received[k] < Rate::Zero() || r.received[k] > r.demand[k]) {
        bad.push_back(fmt::format("node {} k={} n outside [0, N]", v, k + 1));
      }
      if (r.fully_served(k)) ++joined;
      for (NodeId p : s.parents) {
        if (!world.sets(p, k).children.contains(v)) {
          bad.push_back(fmt::format("P/C mirror broken {}->{} k={}", p, v, k + 1));
        }
      }
      if (s.reserves.contains(v)) bad.push_back(fmt::format("node {} reserves itself", v));
      for (NodeId m : s.reserves) {
        if (s.parents.contains(m)) {
          bad.push_back(fmt::format("node {} k={} reserve {} is a parent", v, k + 1, m));
        }
        if (!world.reserved_by(m, k).contains(v)) {
          bad.push_back(fmt::format("reserve mirror broken {}:{}", v, m));
        }
      }
      for (NodeId o : world.reserved_by(v, k)) {
        if (!world.sets(o, k).reserves.contains(v)) {
          bad.push_back(fmt::format("reserve mirror broken {}:{}", o, v));
        }
      }
      if (s.parents.size() + s.reserves.size() > params.reserve_budget) {
        bad.push_back(fmt::format("node {} k={} |P|+|B| > D", v, k + 1));
      }
      if (r.is_oss()) continue;
      if (world.holds(v, k)) {
        any_held = true;
        if (!r.fully_served(k)) {
          bad.push_back(fmt::format("viewing peer {} k={} not fully served", v, k + 1));
        }
        if (!s.hop || *s.hop > params.hop_limit) {
          bad.push_back(fmt::format("peer {} k={} hop outside [1, H]", v, k + 1));
        }
      } else if (!s.empty() || r.received[k].positive()) {
        bad.push_back(fmt::format("non-viewing peer {} k={} has overlay state", v, k + 1));
      }
    }
    if (r.is_oss()) {
      if (r.state != NodeState::kServing || !world.holds(v, r.served_content)) {
        bad.push_back(fmt::format("OSS {} not serving", v));
      }
    } else if ((r.state == NodeState::kViewing) != any_held) {
      bad.push_back(fmt::format("peer {} state disagrees with held contents", v));
    }
  }
  if (parent_links != world.flows().size() || child_links != world.flows().size()) {
    bad.push_back("P/C set sizes disagree with the flow table");
  }

  for (ContentId k = 0; k < kc; ++k) {
    const auto holders = world.holders(k);
    std::set<NodeId> unique(holders.begin(), holders.end());
    if (unique.size() != holders.size()) bad.push_back("duplicate holder entry");
    for (NodeId v : holders) {
      if (!world.holds(v, k)) bad.push_back("holder index out of sync");
    }
    try {
      const auto hops = ComputeLogicalHops(world, k);
      for (NodeId v = 0; v < n; ++v) {
        if (hops[v] != world.hop(v, k)) {
          bad.push_back(fmt::format("node {} k={} cached hop differs from flows", v, k + 1));
        }
      }
    } catch (const ModelError& e) {
      bad.push_back(e.what());
    }
  }

  if (joined != world.joined_pairs()) bad.push_back("joined pair counter drifted");
  if (total != world.total_traffic_kbps()) bad.push_back("traffic counter drifted");
  if (weighted != world.weighted_traffic_kbps()) {
    bad.push_back("weighted traffic counter drifted");
  }
  return bad;
}

}  // namespace meshweave
