#include "holesim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>

namespace holesim {

std::string_view to_string(ProtocolKind k) { return k == ProtocolKind::Proposed ? "proposed" : "baseline"; }

std::string_view to_string(CoverMethod m) {
  switch (m) {
    case CoverMethod::Pending: return "pending";
    case CoverMethod::RangeIncrease: return "range_increase";
    case CoverMethod::LocalMobile: return "local_mobile";
    case CoverMethod::ClusterMobile: return "cluster_mobile";
    case CoverMethod::NeighborClusterMobile: return "neighbor_cluster_mobile";
    case CoverMethod::Unrecovered: return "unrecovered";
  }
  return "?";
}

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Hello: return "hello";
    case MessageKind::HeadAnnounce: return "head_announce";
    case MessageKind::QlBroadcast: return "ql_broadcast";
    case MessageKind::EnergyReport: return "energy_report";
    case MessageKind::CrisisAlert: return "crisis_alert";
    case MessageKind::HoleDetected: return "hole_detected";
    case MessageKind::HelpRequest: return "help_request";
    case MessageKind::MobileDispatch: return "mobile_dispatch";
    case MessageKind::SinkReport: return "sink_report";
    case MessageKind::DataPacket: return "data_packet";
  }
  return "?";
}

std::string_view to_string(MobileSelection s) { return s == MobileSelection::Nearest ? "nearest" : "farthest"; }

// ---------------------------------------------------------------------------
// Pure decision rules

int elect_head(std::span<const HeadCandidate> candidates) {
  int best = -1;
  double best_residual = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (c.residual > best_residual || (c.residual == best_residual && c.id < best)) {
      best = c.id;
      best_residual = c.residual;
    }
  }
  return best;
}

double coverage_timer_delay(std::size_t q_hat_size, double t_base) {
  if (q_hat_size == 0) throw std::domain_error("coverage_timer_delay: empty hole");
  return t_base / (1.0 + static_cast<double>(q_hat_size));
}

double baseline_timer_delay(double residual, double initial, double t_base) {
  if (!(initial > 0.0)) return t_base;
  return t_base * std::clamp(1.0 - residual / initial, 0.0, 1.0);
}

int select_mobile(std::span<MobileCandidate> candidates, Point target, MobileSelection rule) {
  MobileCandidate* best = nullptr;
  double best_d = 0.0;
  for (auto& c : candidates) {
    if (c.flag) continue;
    const double d = distance(c.pos, target);
    bool better = false;
    if (!best) {
      better = true;
    } else if (d == best_d) {
      better = c.id < best->id;
    } else {
      better = rule == MobileSelection::Nearest ? d < best_d : d > best_d;
    }
    if (better) {
      best = &c;
      best_d = d;
    }
  }
  if (!best) throw NoMobileAvailable();
  best->flag = true;
  return best->id;
}

std::vector<int> crisis_zones(std::span<const double> zone_residuals, double threshold) {
  const double total = std::accumulate(zone_residuals.begin(), zone_residuals.end(), 0.0);
  std::vector<int> out;
  for (std::size_t i = 0; i < zone_residuals.size(); ++i) {
    if (zone_energy_ratio(zone_residuals[i], total) < threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> rank_high_load_clusters(std::span<const std::int64_t> counters, std::size_t free_mobiles) {
  std::vector<int> out;
  if (counters.empty()) return out;
  const double mean = static_cast<double>(std::accumulate(counters.begin(), counters.end(), std::int64_t{0})) /
                      static_cast<double>(counters.size());
  for (std::size_t i = 0; i < counters.size(); ++i)
    if (counters[i] > 0 && static_cast<double>(counters[i]) > mean) out.push_back(static_cast<int>(i));
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return counters[a] > counters[b]; });
  if (out.size() > free_mobiles) out.resize(free_mobiles);
  return out;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(GridSpec grid, ProtocolConfig config, std::vector<SensorNode> nodes, Scheduler& scheduler,
                 bool record_trace)
    : grid_(std::move(grid)),
      config_(std::move(config)),
      nodes_(std::move(nodes)),
      coverage_(grid_),
      scheduler_(scheduler),
      record_trace_(record_trace) {
  for (int sy = 0; sy < grid_.subregion_rows(); ++sy) {
    for (int sx = 0; sx < grid_.subregion_cols(); ++sx) {
      Cluster c;
      c.id = sy * grid_.subregion_cols() + sx;
      c.x0 = sx * grid_.subregion_side();
      c.y0 = sy * grid_.subregion_side();
      c.x1 = std::min(grid_.width(), c.x0 + grid_.subregion_side());
      c.y1 = std::min(grid_.height(), c.y0 + grid_.subregion_side());
      clusters_.push_back(std::move(c));
    }
  }
  const double start = scheduler_.now();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    SensorNode& n = nodes_[i];
    if (n.id != static_cast<int>(i)) throw std::invalid_argument("Network: node ids must be 0..n-1 in order");
    if (n.r_c <= 0.0) n.r_c = 2.0 * n.r_s;
    if (n.r_l_current < n.r_l_base) n.r_l_current = n.r_l_base;
    n.settled_at = start;
    if (!n.ledger.alive()) n.state = NodeState::Dead;
    if (n.active()) coverage_.add(n.pos, n.r_l_current);
    n.coverage = compute_coverage_sets(n.pos, n.r_l_current, n.r_s, grid_);
    if (n.kind == NodeKind::Mobile && mobile_r_base_ == 0.0) mobile_r_base_ = n.r_l_base;
  }
  if (mobile_r_base_ == 0.0 && !nodes_.empty()) mobile_r_base_ = nodes_.front().r_l_base;
  rebuild_membership();
}

void Network::record(double now, std::string event, int node, int hole, int cluster, double value,
                     std::string detail) {
  if (!record_trace_) return;
  trace_.push_back(TraceEntry{now, std::move(event), node, hole, cluster, value, std::move(detail)});
}

double Network::power_draw(const SensorNode& n) const {
  switch (n.state) {
    case NodeState::Dead: return 0.0;
    case NodeState::Asleep: return config_.power.sleep_w;
    case NodeState::Travelling: return config_.power.idle_w;
    case NodeState::Active: {
      if (config_.power.range_power_exp == 0.0 || n.r_l_base <= 0.0) return config_.power.idle_w;
      return config_.power.idle_w * std::pow(n.r_l_current / n.r_l_base, config_.power.range_power_exp);
    }
  }
  return 0.0;
}

void Network::settle(SensorNode& n, double now) {
  if (!n.alive()) {
    n.settled_at = now;
    return;
  }
  const double dt = now - n.settled_at;
  if (dt > 0.0) {
    const double p = power_draw(n);
    if (p > 0.0) {
      const double before = n.ledger.residual();
      if (!n.ledger.charge(EnergyCategory::Idle, p * dt)) {
        const double when = n.settled_at + before / p;
        n.settled_at = now;
        handle_death(n, now, DeathCause::Energy, when);
        return;
      }
    }
  }
  n.settled_at = now;
}

void Network::settle_all(double now) {
  for (SensorNode& n : nodes_) settle(n, now);
}

void Network::charge(SensorNode& n, EnergyCategory cat, double amount, double now) {
  if (!n.alive() || amount <= 0.0) return;
  if (!n.ledger.charge(cat, amount)) handle_death(n, now, DeathCause::Energy, now);
}

void Network::handle_death(SensorNode& n, double now, DeathCause cause, double when) {
  if (!n.alive()) return;
  const bool was_active = n.active();
  if (was_active) coverage_.remove(n.pos, n.r_l_current);
  if (n.state == NodeState::Travelling) {
    if (auto it = travels_.find(n.id); it != travels_.end()) {
      if (it->second.hole >= 0) holes_[it->second.hole].mobile_in_flight = -1;
      if (it->second.zone_key >= 0) zone_in_flight_.erase(it->second.zone_key);
      travels_.erase(it);
    }
  }
  n.state = NodeState::Dead;
  n.ledger.kill();
  n.death_time = when;
  n.death_cause = cause;
  n.range_holds.clear();
  for (Cluster& c : clusters_) {
    if (c.head_id == n.id) {
      c.head_id = -1;
      c.pending_data = false;
    }
  }
  record(now, cause == DeathCause::Failure ? "node_failed" : "node_died", n.id, -1, n.cluster_id, when);
  if (was_active) refresh_holes(now, std::nullopt);
}

void Network::kill(double now, std::span<const int> ids, DeathCause cause) {
  for (int id : ids) {
    SensorNode& n = node(id);
    settle(n, now);
    handle_death(n, now, cause, now);
  }
}

// ---------------------------------------------------------------------------
// Messaging

bool Network::unicast(double now, int src, int dst, MessageKind kind, int bytes) {
  SensorNode& s = node(src);
  if (!s.alive()) return false;
  SensorNode& d = node(dst);
  const std::int64_t bits = static_cast<std::int64_t>(bytes) * 8;
  ++stats_.sent[static_cast<std::size_t>(kind)];
  charge(s, EnergyCategory::Tx, tx_energy(config_.radio, bits, distance(s.pos, d.pos)), now);
  if (!s.alive()) return false;
  if (d.alive()) {
    const double rx = rx_energy(config_.radio, bits);
    stats_.expected_rx_j += rx;
    ++stats_.deliveries;
    charge(d, EnergyCategory::Rx, rx, now);
  }
  return true;
}

bool Network::to_sink(double now, int src, MessageKind kind, int bytes) {
  SensorNode& s = node(src);
  if (!s.alive()) return false;
  const std::int64_t bits = static_cast<std::int64_t>(bytes) * 8;
  ++stats_.sent[static_cast<std::size_t>(kind)];
  charge(s, EnergyCategory::Tx, tx_energy(config_.radio, bits, distance(s.pos, config_.sink_pos)), now);
  return s.alive();
}

void Network::from_sink(double now, int dst, MessageKind kind, int bytes) {
  SensorNode& d = node(dst);
  ++stats_.sent[static_cast<std::size_t>(kind)];
  if (!d.alive()) return;
  const double rx = rx_energy(config_.radio, static_cast<std::int64_t>(bytes) * 8);
  stats_.expected_rx_j += rx;
  ++stats_.deliveries;
  charge(d, EnergyCategory::Rx, rx, now);
}

bool Network::broadcast(double now, int src, MessageKind kind, int bytes, double range,
                        std::vector<int>* receivers) {
  SensorNode& s = node(src);
  if (!s.alive()) return false;
  const std::int64_t bits = static_cast<std::int64_t>(bytes) * 8;
  ++stats_.sent[static_cast<std::size_t>(kind)];
  charge(s, EnergyCategory::Tx, tx_energy(config_.radio, bits, range), now);
  if (!s.alive()) return false;
  const double rx = rx_energy(config_.radio, bits);
  const Point origin = s.pos;
  for (SensorNode& r : nodes_) {
    if (r.id == src || !r.awake()) continue;
    if (distance(origin, r.pos) > range) continue;
    stats_.expected_rx_j += rx;
    ++stats_.deliveries;
    charge(r, EnergyCategory::Rx, rx, now);
    if (receivers && r.active()) receivers->push_back(r.id);
  }
  return true;
}

int Network::ql_bytes(const SensorNode& n) const {
  return config_.sizes.ql_base + config_.sizes.ql_per_cell * static_cast<int>(n.coverage.q_l.size());
}

// ---------------------------------------------------------------------------
// Clusters

void Network::assign_cluster(SensorNode& n) { n.cluster_id = grid_.subregion_of(n.pos); }

void Network::rebuild_membership() {
  for (Cluster& c : clusters_) c.member_ids.clear();
  for (SensorNode& n : nodes_) {
    assign_cluster(n);
    if (n.alive()) clusters_[n.cluster_id].member_ids.push_back(n.id);
  }
}

std::vector<int> Network::neighbor_clusters(int cluster_id) const {
  std::vector<int> out;
  const int cols = grid_.subregion_cols();
  const int rows = grid_.subregion_rows();
  const int cx = cluster_id % cols;
  const int cy = cluster_id / cols;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int x = cx + dx;
      const int y = cy + dy;
      if (x < 0 || y < 0 || x >= cols || y >= rows) continue;
      out.push_back(y * cols + x);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Network::zone_of(const Cluster& c, Point p) const {
  const int zps = std::max(1, config_.zones_per_side);
  const double zw = (c.x1 - c.x0) / zps;
  const double zh = (c.y1 - c.y0) / zps;
  const int zx = std::clamp(static_cast<int>(std::floor((p.x - c.x0) / zw)), 0, zps - 1);
  const int zy = std::clamp(static_cast<int>(std::floor((p.y - c.y0) / zh)), 0, zps - 1);
  return zy * zps + zx;
}

void Network::elect_heads(double now) {
  rebuild_membership();
  for (Cluster& c : clusters_) {
    std::vector<HeadCandidate> candidates;
    for (int id : c.member_ids) {
      const SensorNode& n = nodes_[id];
      if (n.kind == NodeKind::Static && n.active()) candidates.push_back({n.id, n.ledger.residual()});
    }
    const int head = elect_head(candidates);
    if (head != c.head_id) {
      if (head < 0) {
        record(now, "cluster_headless", -1, -1, c.id);
      } else {
        record(now, "head_elected", head, -1, c.id);
      }
      if (c.head_id >= 0) c.pending_data = false;
    }
    c.head_id = head;
    if (head >= 0) broadcast(now, head, MessageKind::HeadAnnounce, config_.sizes.head_announce, node(head).r_c);
    // The announcement can drain the head.
    if (head >= 0 && !node(head).alive()) c.head_id = -1;
  }
}

// ---------------------------------------------------------------------------
// Update and detection

void Network::phase_update(double now) {
  std::vector<std::shared_ptr<const CellSet>> snapshot(nodes_.size());
  for (SensorNode& n : nodes_) {
    n.neighbor_table.clear();
    if (!n.active()) continue;
    n.coverage = compute_coverage_sets(n.pos, n.r_l_current, n.r_s, grid_);
    snapshot[n.id] = std::make_shared<const CellSet>(n.coverage.q_l);
  }
  std::vector<int> receivers;
  for (SensorNode& n : nodes_) {
    if (!n.active()) continue;
    receivers.clear();
    if (!broadcast(now, n.id, MessageKind::QlBroadcast, ql_bytes(n), n.r_c, &receivers)) continue;
    for (int r : receivers) nodes_[r].neighbor_table.push_back({n.id, n.pos, snapshot[n.id]});
  }
  if (!proposed()) {
    // Baseline hole-detection probe: every node announces itself over its
    // communication diameter.
    for (SensorNode& n : nodes_) {
      if (n.active()) broadcast(now, n.id, MessageKind::Hello, config_.sizes.hello, n.r_c);
    }
  }
}

std::vector<int> Network::phase_detect(double now) {
  std::vector<int> detectors;
  std::vector<const CellSet*> neighbor_sets;
  for (SensorNode& n : nodes_) {
    n.coverage.q_hat.clear();
    if (!n.active()) continue;
    neighbor_sets.clear();
    for (const NeighborEntry& e : n.neighbor_table)
      if (e.q_l) neighbor_sets.push_back(e.q_l.get());
    n.coverage.q_hat = hole_cells(n.coverage.q_l_minus_s, neighbor_sets);
    if (!n.coverage.q_hat.empty()) detectors.push_back(n.id);
  }

  std::vector<int> owner(grid_.cell_count(), -1);
  for (int idx : live_holes_) {
    const HoleRecord& h = holes_[idx];
    if (h.covered_at) continue;
    for (const Cell& c : h.cells) owner[grid_.index(c)] = idx;
  }
  std::vector<char> fresh(grid_.cell_count(), 0);
  for (int d : detectors)
    for (const Cell& c : nodes_[d].coverage.q_hat)
      if (owner[grid_.index(c)] < 0) fresh[grid_.index(c)] = 1;

  // Split the new hole cells into 8-connected components.
  std::vector<int> created;
  std::vector<char> seen(grid_.cell_count(), 0);
  for (std::size_t start = 0; start < fresh.size(); ++start) {
    if (!fresh[start] || seen[start]) continue;
    CellSet comp;
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const Cell c = grid_.cell_at(queue.front());
      queue.pop_front();
      comp.push_back(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const Cell nb{c.ix + dx, c.iy + dy};
          if (!grid_.contains(nb)) continue;
          const std::size_t k = grid_.index(nb);
          if (fresh[k] && !seen[k]) {
            seen[k] = 1;
            queue.push_back(k);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());

    HoleRecord h;
    h.hole_id = static_cast<int>(holes_.size());
    h.cells = std::move(comp);
    h.detected_at = now;
    std::size_t best_overlap = 0;
    for (int d : detectors) {
      const std::size_t overlap = set_intersection(nodes_[d].coverage.q_hat, h.cells).size();
      if (overlap > best_overlap) {
        best_overlap = overlap;
        h.detecting_node = d;
      }
    }
    for (const Cell& c : h.cells) owner[grid_.index(c)] = h.hole_id;
    record(now, "hole_detected", h.detecting_node, h.hole_id, nodes_[h.detecting_node].cluster_id,
           static_cast<double>(h.cells.size()));
    live_holes_.push_back(h.hole_id);
    created.push_back(h.hole_id);
    holes_.push_back(std::move(h));
  }

  if (proposed()) {
    for (int id : created) {
      const int d = holes_[id].detecting_node;
      const Cluster& c = clusters_[nodes_[d].cluster_id];
      if (c.head_id >= 0 && c.head_id != d)
        unicast(now, d, c.head_id, MessageKind::HoleDetected, config_.sizes.hole_detected);
    }
  }

  for (int d : detectors) {
    SensorNode& n = nodes_[d];
    if (!n.active()) continue;
    std::set<int> touched;
    for (const Cell& c : n.coverage.q_hat) {
      const int o = owner[grid_.index(c)];
      if (o >= 0) touched.insert(o);
    }
    const double delay = proposed()
                             ? coverage_timer_delay(n.coverage.q_hat.size(), config_.t_base_s)
                             : baseline_timer_delay(n.ledger.residual(), n.ledger.initial(), config_.t_base_s);
    for (int hid : touched) {
      HoleRecord& h = holes_[hid];
      if (std::find(h.detectors.begin(), h.detectors.end(), d) == h.detectors.end()) h.detectors.push_back(d);
      arm_timer(now, d, hid, delay);
    }
  }
  return created;
}

void Network::arm_timer(double now, int node_id, int hole_id, double delay) {
  const auto key = std::make_pair(node_id, hole_id);
  if (timers_.count(key)) return;
  const std::uint64_t token = next_token_++;
  timers_[key] = token;
  scheduler_.schedule(now + delay, EventKind::TimerExpiry, EventPayload{node_id, hole_id, token, delay});
  record(now, "timer_armed", node_id, hole_id, nodes_[node_id].cluster_id, delay);
}

// ---------------------------------------------------------------------------
// Prevention and global update

void Network::phase_prevention(double now) {
  const int zps = std::max(1, config_.zones_per_side);
  const int zone_count = zps * zps;
  for (Cluster& c : clusters_) {
    const std::vector<int> previous = std::move(c.crisis_zones);
    c.crisis_zones.clear();
    if (c.head_id < 0) continue;
    std::vector<double> zone_residual(zone_count, 0.0);
    std::vector<std::pair<int, double>> reports;
    for (int id : c.member_ids) {
      const SensorNode& n = nodes_[id];
      if (n.active()) reports.emplace_back(id, n.ledger.residual());
    }
    for (const auto& [id, residual] : reports) {
      if (c.head_id < 0) break;
      if (id != c.head_id &&
          !unicast(now, id, c.head_id, MessageKind::EnergyReport, config_.sizes.energy_report))
        continue;
      zone_residual[zone_of(c, nodes_[id].pos)] += residual;
    }
    if (c.head_id < 0 || !node(c.head_id).alive()) continue;
    c.crisis_zones = crisis_zones(zone_residual, config_.crisis_threshold);
    for (int z : c.crisis_zones) {
      if (c.head_id < 0) break;
      const int key = c.id * zone_count + z;
      if (zone_in_flight_.count(key)) continue;
      const double zw = (c.x1 - c.x0) / zps;
      const double zh = (c.y1 - c.y0) / zps;
      const Point target{c.x0 + (z % zps + 0.5) * zw, c.y0 + (z / zps + 0.5) * zh};
      record(now, "crisis_zone", c.head_id, -1, c.id, zone_residual[z], std::to_string(z));

      auto pick = pick_mobile(free_mobiles_in(c.id), target);
      int commander = c.head_id;
      const bool ongoing = std::find(previous.begin(), previous.end(), z) != previous.end();
      if (!pick && !ongoing) {
        std::vector<MobileCandidate> pool;
        for (int nc : neighbor_clusters(c.id)) {
          const int nh = clusters_[nc].head_id;
          if (nh < 0 || c.head_id < 0) continue;
          unicast(now, c.head_id, nh, MessageKind::CrisisAlert, config_.sizes.crisis_alert);
          auto more = free_mobiles_in(nc);
          pool.insert(pool.end(), more.begin(), more.end());
        }
        pick = pick_mobile(std::move(pool), target);
        if (pick) commander = clusters_[nodes_[*pick].cluster_id].head_id;
      }
      if (!pick) {
        record(now, "crisis_unserved", c.head_id, -1, c.id, 0.0, std::to_string(z));
        continue;
      }
      record(now, "crisis_dispatch", *pick, -1, c.id, 0.0, std::to_string(z));
      dispatch_mobile(now, *pick, commander, target, -1, CoverMethod::ClusterMobile, key);
    }
  }
}

void Network::on_global_update(double now) {
  if (!proposed()) return;
  std::vector<std::int64_t> counters(clusters_.size(), 0);
  for (Cluster& c : clusters_) {
    if (c.head_id >= 0 && to_sink(now, c.head_id, MessageKind::SinkReport, config_.sizes.sink_report))
      counters[c.id] = c.event_counter;
  }
  std::size_t free_count = 0;
  for (const SensorNode& n : nodes_)
    if (n.kind == NodeKind::Mobile && n.asleep() && !n.flag) ++free_count;
  for (int cid : rank_high_load_clusters(counters, free_count)) {
    std::vector<MobileCandidate> pool;
    for (const SensorNode& n : nodes_)
      if (n.kind == NodeKind::Mobile && n.asleep() && !n.flag) pool.push_back({n.id, n.pos, false});
    auto pick = pick_mobile(std::move(pool), clusters_[cid].centroid());
    if (!pick) break;
    record(now, "sink_dispatch", *pick, -1, cid, static_cast<double>(counters[cid]));
    dispatch_mobile(now, *pick, -1, clusters_[cid].centroid(), -1, CoverMethod::ClusterMobile, -1);
  }
  for (Cluster& c : clusters_) c.event_counter = 0;
}

// ---------------------------------------------------------------------------
// Mobile handling

std::vector<MobileCandidate> Network::free_mobiles_in(int cluster_id) const {
  std::vector<MobileCandidate> out;
  for (const SensorNode& n : nodes_) {
    if (n.kind == NodeKind::Mobile && n.asleep() && !n.flag && n.cluster_id == cluster_id)
      out.push_back({n.id, n.pos, n.flag});
  }
  return out;
}

std::optional<int> Network::pick_mobile(std::vector<MobileCandidate> candidates, Point target) {
  try {
    return select_mobile(candidates, target, config_.selection);
  } catch (const NoMobileAvailable&) {
    return std::nullopt;
  }
}

void Network::dispatch_mobile(double now, int mobile_id, int commander, Point target, int hole_id,
                              CoverMethod level, int zone_key) {
  SensorNode& m = node(mobile_id);
  m.flag = true;
  if (commander >= 0) {
    unicast(now, commander, mobile_id, MessageKind::MobileDispatch, config_.sizes.mobile_dispatch);
  } else {
    from_sink(now, mobile_id, MessageKind::MobileDispatch, config_.sizes.mobile_dispatch);
  }
  settle(m, now);
  if (!m.alive()) return;
  m.state = NodeState::Travelling;
  const double trip = distance(m.pos, target);
  const double eta = config_.mobile_speed_mps > 0.0 ? trip / config_.mobile_speed_mps : 0.0;
  const std::uint64_t token = next_token_++;
  travels_[mobile_id] = Travel{token, target, hole_id, level, zone_key};
  if (zone_key >= 0) zone_in_flight_[zone_key] = mobile_id;
  if (hole_id >= 0) {
    holes_[hole_id].mobile_in_flight = mobile_id;
    holes_[hole_id].pending_level = level;
  }
  scheduler_.schedule(now + eta, EventKind::MobileArrival, EventPayload{mobile_id, hole_id, token, trip});
  record(now, "mobile_dispatch", mobile_id, hole_id, m.cluster_id, trip, std::string(to_string(level)));
}

void Network::on_mobile_arrival(double now, int mobile, std::uint64_t token) {
  auto it = travels_.find(mobile);
  if (it == travels_.end() || it->second.token != token) return;
  const Travel trip = it->second;
  travels_.erase(it);
  if (trip.zone_key >= 0) zone_in_flight_.erase(trip.zone_key);
  if (trip.hole >= 0 && holes_[trip.hole].mobile_in_flight == mobile) holes_[trip.hole].mobile_in_flight = -1;

  SensorNode& m = node(mobile);
  if (!m.alive()) return;
  settle(m, now);
  charge(m, EnergyCategory::Move, config_.power.move_j_per_m * distance(m.pos, trip.target), now);
  if (!m.alive()) return;
  m.pos = trip.target;
  m.state = NodeState::Active;
  m.r_l_current = held_radius(m);
  coverage_.add(m.pos, m.r_l_current);
  assign_cluster(m);
  m.coverage = compute_coverage_sets(m.pos, m.r_l_current, m.r_s, grid_);
  record(now, "mobile_arrival", mobile, trip.hole, m.cluster_id, 0.0, std::string(to_string(trip.level)));
  broadcast(now, mobile, MessageKind::QlBroadcast, ql_bytes(m), m.r_c);

  refresh_holes(now, trip.level);
  if (trip.hole < 0) return;
  HoleRecord& h = holes_[trip.hole];
  ++h.mobiles_used;
  if (h.reopened_at || h.covered_by == CoverMethod::Unrecovered) return;
  if (needed_cells(h).empty()) {
    release_responders(now, h);
  } else {
    request_mobile(now, h, h.requester);
  }
}

CellSet Network::needed_cells(const HoleRecord& h) const {
  // Coverage each hole cell would have if responders dropped the extension
  // they hold for this hole.
  std::vector<int> count(h.cells.size());
  std::vector<int> slot(grid_.cell_count(), -1);
  for (std::size_t i = 0; i < h.cells.size(); ++i) {
    count[i] = coverage_.count(h.cells[i]);
    slot[grid_.index(h.cells[i])] = static_cast<int>(i);
  }
  for (int rid : h.responders) {
    const SensorNode& r = nodes_[rid];
    if (!r.active() || !r.range_holds.count(h.hole_id)) continue;
    double without = r.r_l_base;
    for (const auto& [other, radius] : r.range_holds)
      if (other != h.hole_id) without = std::max(without, radius);
    for (const Cell& c : cells_in_radius(r.pos, r.r_l_current, grid_)) {
      const int i = slot[grid_.index(c)];
      if (i >= 0 && distance(r.pos, grid_.center(c)) > without) --count[i];
    }
  }
  CellSet out;
  for (std::size_t i = 0; i < h.cells.size(); ++i)
    if (count[i] <= 0) out.push_back(h.cells[i]);
  return out;
}

Point Network::best_mobile_target(const CellSet& needed) const {
  const double radius = mobile_r_base_;
  const int reach = static_cast<int>(std::ceil(radius / grid_.cell_side())) + 1;
  std::vector<char> mark(grid_.cell_count(), 0);
  for (const Cell& c : needed) mark[grid_.index(c)] = coverage_.covered(c) ? 1 : 2;

  Cell best = needed.front();
  std::pair<int, int> best_score{-1, -1};
  for (const Cell& cand : needed) {
    const Point p = grid_.center(cand);
    int uncovered = 0;
    int total = 0;
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const Cell c{cand.ix + dx, cand.iy + dy};
        if (!grid_.contains(c)) continue;
        const char m = mark[grid_.index(c)];
        if (m == 0 || distance(p, grid_.center(c)) > radius) continue;
        ++total;
        if (m == 2) ++uncovered;
      }
    }
    const std::pair<int, int> score{uncovered, total};
    if (score > best_score) {
      best_score = score;
      best = cand;
    }
  }
  return grid_.center(best);
}

void Network::request_mobile(double now, HoleRecord& h, int requester) {
  if (requester < 0) return;
  SensorNode& req = node(requester);
  if (!req.alive()) return;
  h.requester = requester;
  const CellSet needed = needed_cells(h);
  if (needed.empty()) {
    release_responders(now, h);
    return;
  }
  const Point target = best_mobile_target(needed);
  const int cid = req.cluster_id;
  const Cluster& c = clusters_[cid];

  // Free mobiles in the cluster within radio reach of the requester.
  std::vector<MobileCandidate> local;
  for (const MobileCandidate& m : free_mobiles_in(cid))
    if (distance(m.pos, req.pos) <= req.r_c) local.push_back(m);
  if (auto pick = pick_mobile(local, target)) {
    record(now, "mobile_request", requester, h.hole_id, cid, 0.0, "local");
    dispatch_mobile(now, *pick, requester, target, h.hole_id, CoverMethod::LocalMobile, -1);
    return;
  }

  const int head = c.head_id;
  if (head < 0) {
    record(now, "no_mobile_available", requester, h.hole_id, cid, 0.0, "headless cluster");
    return;
  }
  if (head != requester) {
    record(now, "help_request", requester, h.hole_id, cid, 0.0, "to_head");
    if (!unicast(now, requester, head, MessageKind::HelpRequest, config_.sizes.help_request)) return;
  }
  if (auto pick = pick_mobile(free_mobiles_in(cid), target)) {
    dispatch_mobile(now, *pick, head, target, h.hole_id, CoverMethod::ClusterMobile, -1);
    return;
  }

  std::vector<MobileCandidate> pool;
  for (int nc : neighbor_clusters(cid)) {
    const int nh = clusters_[nc].head_id;
    if (nh < 0) continue;
    record(now, "help_request", head, h.hole_id, cid, static_cast<double>(nc), "to_neighbor_cluster");
    if (!unicast(now, head, nh, MessageKind::HelpRequest, config_.sizes.help_request)) break;
    auto more = free_mobiles_in(nc);
    pool.insert(pool.end(), more.begin(), more.end());
  }
  if (auto pick = pick_mobile(std::move(pool), target)) {
    const int commander = clusters_[nodes_[*pick].cluster_id].head_id;
    dispatch_mobile(now, *pick, commander, target, h.hole_id, CoverMethod::NeighborClusterMobile, -1);
    return;
  }
  record(now, "no_mobile_available", requester, h.hole_id, cid);
}

void Network::release_responders(double now, HoleRecord& h) {
  std::vector<int> responders;
  responders.swap(h.responders);
  for (int rid : responders) {
    SensorNode& r = node(rid);
    if (!r.alive() || !r.range_holds.erase(h.hole_id)) continue;
    const double before = r.r_l_current;
    apply_range(r, now);
    record(now, "range_restore", rid, h.hole_id, r.cluster_id, r.r_l_current, std::to_string(before));
  }
  refresh_holes(now, std::nullopt);
}

// ---------------------------------------------------------------------------
// Range changes and hole status

double Network::held_radius(const SensorNode& n) const {
  double r = n.r_l_base;
  for (const auto& [hole, radius] : n.range_holds) r = std::max(r, radius);
  return std::min(r, n.r_s);
}

void Network::apply_range(SensorNode& n, double now) {
  const double r = held_radius(n);
  if (r == n.r_l_current) return;
  settle(n, now);
  if (!n.alive()) return;
  if (n.active()) {
    coverage_.remove(n.pos, n.r_l_current);
    coverage_.add(n.pos, r);
  }
  n.r_l_current = r;
  n.coverage = compute_coverage_sets(n.pos, n.r_l_current, n.r_s, grid_);
  if (n.active()) broadcast(now, n.id, MessageKind::QlBroadcast, ql_bytes(n), n.r_c);
}

bool Network::raise_range_for(double now, SensorNode& n, HoleRecord& h) {
  const CellSet remaining = coverage_.uncovered(h.cells);
  if (remaining.empty()) return false;
  const double r = std::min(n.r_s, farthest_uncovered_distance(n.pos, remaining, grid_));
  if (r <= n.r_l_current) return false;
  double& hold = n.range_holds[h.hole_id];
  hold = std::max(hold, r);
  if (std::find(h.responders.begin(), h.responders.end(), n.id) == h.responders.end())
    h.responders.push_back(n.id);
  apply_range(n, now);
  record(now, "range_increase", n.id, h.hole_id, n.cluster_id, n.r_l_current);
  std::vector<int> open;
  for (int idx : live_holes_)
    if (idx != h.hole_id && !holes_[idx].covered_at) open.push_back(idx);
  refresh_holes(now, CoverMethod::RangeIncrease);
  // Other holes closed by the same extension keep it alive too.
  for (int idx : open) {
    HoleRecord& other = holes_[idx];
    if (!other.covered_at || *other.covered_at != now) continue;
    n.range_holds[idx] = n.r_l_current;
    if (std::find(other.responders.begin(), other.responders.end(), n.id) == other.responders.end())
      other.responders.push_back(n.id);
  }
  return true;
}

void Network::refresh_holes(double now, std::optional<CoverMethod> cause) {
  std::vector<int> still_live;
  still_live.reserve(live_holes_.size());
  for (int idx : live_holes_) {
    HoleRecord& h = holes_[idx];
    const bool full = coverage_.all_covered(h.cells);
    if (!h.covered_at) {
      if (full && cause) {
        h.covered_at = now;
        h.covered_by = *cause;
        record(now, "hole_covered", h.detecting_node, h.hole_id, -1, now - h.detected_at,
               std::string(to_string(*cause)));
      }
      still_live.push_back(idx);
    } else if (!full) {
      h.reopened_at = now;
      record(now, "hole_reopened", h.detecting_node, h.hole_id, -1, now - *h.covered_at);
    } else {
      still_live.push_back(idx);
    }
  }
  live_holes_.swap(still_live);
}

// ---------------------------------------------------------------------------
// Event handlers

void Network::on_timer(double now, int node_id, int hole_id, std::uint64_t token) {
  auto it = timers_.find({node_id, hole_id});
  if (it == timers_.end() || it->second != token) return;
  timers_.erase(it);
  SensorNode& n = node(node_id);
  HoleRecord& h = holes_.at(static_cast<std::size_t>(hole_id));
  if (!n.active() || h.reopened_at || h.covered_by == CoverMethod::Unrecovered) return;
  if (h.covered_at) {
    record(now, "timer_cancelled", node_id, hole_id, n.cluster_id, 0.0, "hole covered");
    return;
  }
  if (proposed() && h.mobile_in_flight >= 0) {
    record(now, "timer_cancelled", node_id, hole_id, n.cluster_id, 0.0, "mobile en route");
    return;
  }
  record(now, "timer_fired", node_id, hole_id, n.cluster_id, n.ledger.residual());
  raise_range_for(now, n, h);
  if (h.covered_at || !proposed()) return;
  request_mobile(now, h, node_id);
}

void Network::on_target_sample(double now, std::span<const Point> targets) {
  for (const Point& t : targets) {
    for (SensorNode& n : nodes_) {
      if (!n.active() || distance(n.pos, t) > n.r_l_current) continue;
      charge(n, EnergyCategory::Sense, config_.power.sense_j_per_event, now);
      if (!n.alive()) continue;
      Cluster& c = clusters_[n.cluster_id];
      ++c.event_counter;
      if (!proposed() || c.head_id < 0) {
        to_sink(now, n.id, MessageKind::DataPacket, config_.sizes.data);
      } else if (c.head_id == n.id) {
        c.pending_data = true;
      } else if (unicast(now, n.id, c.head_id, MessageKind::DataPacket, config_.sizes.data) &&
                 c.head_id >= 0 && node(c.head_id).alive()) {
        c.pending_data = true;
      }
    }
  }
}

void Network::on_round(double now) {
  settle_all(now);
  if (proposed()) {
    // Heads forward one aggregated packet for the previous round's data.
    for (Cluster& c : clusters_) {
      if (c.pending_data && c.head_id >= 0) to_sink(now, c.head_id, MessageKind::DataPacket, config_.sizes.data);
      c.pending_data = false;
    }
    elect_heads(now);
  } else {
    rebuild_membership();
  }
  phase_update(now);
  if (proposed()) phase_prevention(now);
  phase_detect(now);
}

void Network::finish(double now) {
  settle_all(now);
  for (int idx : live_holes_) {
    HoleRecord& h = holes_[idx];
    if (!h.covered_at) h.covered_by = CoverMethod::Unrecovered;
  }
}

double Network::reported_coverage_ratio() const {
  if (grid_.cell_count() == 0) return 0.0;
  if (!proposed()) return coverage_.ratio();
  std::size_t covered = coverage_.covered_cells();
  const double side = grid_.cell_side();
  for (const Cluster& c : clusters_) {
    if (!c.headless()) continue;
    const int ix0 = static_cast<int>(std::lround(c.x0 / side));
    const int ix1 = std::min(grid_.cols(), static_cast<int>(std::lround(c.x1 / side)));
    const int iy0 = static_cast<int>(std::lround(c.y0 / side));
    const int iy1 = std::min(grid_.rows(), static_cast<int>(std::lround(c.y1 / side)));
    for (int iy = iy0; iy < iy1; ++iy)
      for (int ix = ix0; ix < ix1; ++ix)
        if (coverage_.covered({ix, iy})) --covered;
  }
  return static_cast<double>(covered) / static_cast<double>(grid_.cell_count());
}

}  // namespace holesim
