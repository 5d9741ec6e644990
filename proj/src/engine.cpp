#include "holesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace holesim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string join(const std::vector<std::string>& items) {
  std::string out = "invalid scenario:";
  for (const auto& s : items) out += "\n  - " + s;
  return out;
}

Point random_point(const GridSpec& grid, Rng& rng) {
  return {rng.uniform(0.0, grid.width()), rng.uniform(0.0, grid.height())};
}

}  // namespace

Rng Rng::stream(std::uint64_t master_seed, std::string_view name) {
  return Rng(splitmix64(master_seed ^ fnv1a(name)));
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

double Scenario::failure_percent_total() const {
  double total = 0.0;
  for (const auto& f : failure_plan) total += f.percent;
  return total;
}

std::vector<std::string> Scenario::violations() const {
  std::vector<std::string> out = grid.violations();
  auto bad = [&](bool cond, std::string msg) {
    if (cond) out.push_back(std::move(msg));
  };
  bad(!(duration_s > 0.0), "scenario.duration_s must be > 0");
  bad(nodes.count < 0, "nodes.count must be >= 0");
  bad(!(nodes.mobile_fraction >= 0.0 && nodes.mobile_fraction <= 1.0), "nodes.mobile_fraction must be in [0, 1]");
  bad(!(nodes.initial_energy_j > 0.0), "nodes.initial_energy_j must be > 0");
  bad(!(nodes.r_l > 0.0), "nodes.r_l must be > 0");
  bad(!(nodes.r_l < nodes.r_s), "nodes.r_l must be smaller than nodes.r_s");
  bad(!(protocol.round_s > 0.0), "protocol.round_s must be > 0");
  bad(!(protocol.t_base_s > 0.0), "cover.t_base_s must be > 0");
  bad(protocol.zones_per_side < 1, "prevention.zones_per_side must be >= 1");
  bad(!(protocol.crisis_threshold >= 0.0 && protocol.crisis_threshold <= 1.0),
      "prevention.threshold must be in [0, 1]");
  bad(!(protocol.mobile_speed_mps > 0.0), "mobile.speed_mps must be > 0");
  bad(!(protocol.sink_update_period_s > 0.0), "sink.update_period_s must be > 0");
  for (auto& v : protocol.radio.violations()) out.push_back(std::move(v));
  const PowerParams& p = protocol.power;
  bad(!(p.idle_w >= 0.0), "energy.idle_w must be >= 0");
  bad(!(p.sleep_w >= 0.0), "energy.sleep_w must be >= 0");
  bad(!(p.move_j_per_m >= 0.0), "energy.move_j_per_m must be >= 0");
  bad(!(p.sense_j_per_event >= 0.0), "energy.sense_j_per_event must be >= 0");
  bad(!(p.range_power_exp >= 0.0), "energy.range_power_exp must be >= 0");
  const MessageSizes& s = protocol.sizes;
  for (int bytes : {s.hello, s.head_announce, s.ql_base, s.ql_per_cell, s.energy_report, s.crisis_alert,
                    s.hole_detected, s.help_request, s.mobile_dispatch, s.sink_report, s.data})
    if (bytes < 0) {
      out.push_back("messages.* sizes must be >= 0");
      break;
    }
  bad(!(mobility.sample_s > 0.0), "mobility.sample_s must be > 0");
  bad(!(mobility.speed_min > 0.0 && mobility.speed_min <= mobility.speed_max),
      "mobility speeds must satisfy 0 < speed_min <= speed_max");
  bad(!(mobility.pause_s >= 0.0), "mobility.pause_s must be >= 0");
  bad(mobility.target_count < 0, "mobility.target_count must be >= 0");
  for (const auto& f : failure_plan) {
    bad(!(f.percent >= 0.0 && f.percent <= 100.0), "failures.plan percent must be in [0, 100]");
    bad(!(f.time_s >= 0.0 && f.time_s <= duration_s), "failures.plan time must be within [0, duration_s]");
  }
  bad(!grid.contains(protocol.sink_pos), "sink.pos must lie inside the area");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!grid.contains(layout[i].pos)) {
      std::ostringstream os;
      os << "node " << i << " at (" << layout[i].pos.x << ", " << layout[i].pos.y << ") is outside the area";
      out.push_back(os.str());
    }
  }
  return out;
}

std::vector<SensorNode> place_nodes(const Scenario& scenario, Rng& rng) {
  const int n = scenario.nodes.count;
  const int mobiles = static_cast<int>(std::floor(n * scenario.nodes.mobile_fraction + 1e-9));
  std::vector<SensorNode> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n)));
  for (int i = 0; i < n; ++i) {
    SensorNode node;
    node.id = i;
    node.pos = random_point(scenario.grid, rng);
    node.kind = i >= n - mobiles ? NodeKind::Mobile : NodeKind::Static;
    node.state = node.kind == NodeKind::Mobile ? NodeState::Asleep : NodeState::Active;
    node.ledger = EnergyLedger(scenario.nodes.initial_energy_j);
    node.r_l_base = node.r_l_current = scenario.nodes.r_l;
    node.r_s = scenario.nodes.r_s;
    node.r_c = 2.0 * node.r_s;
    out.push_back(std::move(node));
  }
  return out;
}

namespace {

std::vector<SensorNode> layout_nodes(const Scenario& scenario) {
  std::vector<SensorNode> out;
  for (std::size_t i = 0; i < scenario.layout.size(); ++i) {
    const NodeSpec& spec = scenario.layout[i];
    SensorNode node;
    node.id = static_cast<int>(i);
    node.pos = spec.pos;
    node.kind = spec.kind;
    node.state = spec.kind == NodeKind::Mobile ? NodeState::Asleep : NodeState::Active;
    node.ledger = EnergyLedger(spec.initial_energy_j.value_or(scenario.nodes.initial_energy_j));
    if (spec.residual_j) {
      const double drained = node.ledger.initial() - *spec.residual_j;
      if (drained > 0.0) node.ledger.charge(EnergyCategory::Idle, drained);
    }
    node.r_l_base = node.r_l_current = scenario.nodes.r_l;
    node.r_s = scenario.nodes.r_s;
    node.r_c = 2.0 * node.r_s;
    out.push_back(std::move(node));
  }
  return out;
}

}  // namespace

TargetState spawn_target(const GridSpec& grid, const MobilityParams& params, Rng& rng) {
  TargetState t;
  t.pos = random_point(grid, rng);
  t.waypoint = random_point(grid, rng);
  t.speed = rng.uniform(params.speed_min, params.speed_max);
  return t;
}

TargetState target_step(TargetState target, double now, double dt, const GridSpec& grid,
                        const MobilityParams& params, Rng& rng) {
  if (!(dt > 0.0)) throw std::domain_error("target_step: dt must be > 0");
  double t = now;
  double remaining = dt;
  for (int guard = 0; remaining > 0.0 && guard < 100000; ++guard) {
    if (t < target.pause_until) {
      const double wait = std::min(remaining, target.pause_until - t);
      t += wait;
      remaining -= wait;
      continue;
    }
    const double d = distance(target.pos, target.waypoint);
    const double travel = d / target.speed;
    if (travel <= remaining) {
      target.pos = target.waypoint;
      t += travel;
      remaining -= travel;
      target.pause_until = t + params.pause_s;
      target.waypoint = random_point(grid, rng);
      target.speed = rng.uniform(params.speed_min, params.speed_max);
    } else {
      const double f = remaining * target.speed / d;
      target.pos.x += (target.waypoint.x - target.pos.x) * f;
      target.pos.y += (target.waypoint.y - target.pos.y) * f;
      remaining = 0.0;
    }
  }
  target.pos.x = std::clamp(target.pos.x, 0.0, grid.width());
  target.pos.y = std::clamp(target.pos.y, 0.0, grid.height());
  return target;
}

std::vector<int> inject_failures(std::span<const int> alive_static, double percent, Rng& rng) {
  if (!(percent >= 0.0 && percent <= 100.0)) throw std::domain_error("inject_failures: percent out of range");
  const std::size_t n = alive_static.size();
  const auto k = static_cast<std::size_t>(std::floor(percent * static_cast<double>(n) / 100.0 + 1e-9));
  std::vector<int> pool(alive_static.begin(), alive_static.end());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

RunResult run(const Scenario& scenario) {
  if (auto problems = scenario.violations(); !problems.empty()) throw ValidationError(std::move(problems));

  Rng placement = Rng::stream(scenario.seed, "placement");
  Rng mobility = Rng::stream(scenario.seed, "mobility");
  Rng failures = Rng::stream(scenario.seed, "failures");

  std::vector<SensorNode> nodes = scenario.layout.empty() ? place_nodes(scenario, placement) : layout_nodes(scenario);

  EventQueue queue;
  Network net(scenario.grid, scenario.protocol, std::move(nodes), queue, scenario.record_trace);

  std::vector<TargetState> targets;
  for (int i = 0; i < scenario.mobility.target_count; ++i)
    targets.push_back(spawn_target(scenario.grid, scenario.mobility, mobility));

  RunResult result;
  result.scenario_id = scenario.id;
  result.seed = scenario.seed;
  result.protocol = scenario.protocol.kind;
  result.n_nodes = scenario.node_count();
  result.failure_pct = scenario.failure_percent_total();
  result.duration_s = scenario.duration_s;

  const double end = scenario.duration_s;
  queue.schedule(0.0, EventKind::RoundStart);
  if (!targets.empty()) queue.schedule(0.0, EventKind::TargetSample);
  if (scenario.protocol.kind == ProtocolKind::Proposed && scenario.protocol.sink_update_period_s < end)
    queue.schedule(scenario.protocol.sink_update_period_s, EventKind::GlobalUpdate);
  for (std::size_t i = 0; i < scenario.failure_plan.size(); ++i)
    queue.schedule(scenario.failure_plan[i].time_s, EventKind::FailureInjection,
                   EventPayload{-1, -1, i, scenario.failure_plan[i].percent});
  queue.schedule(end, EventKind::SimEnd);

  std::vector<Point> positions;
  while (!queue.empty()) {
    const SimEvent ev = queue.pop();
    ++result.events_processed;
    const double now = ev.time;
    switch (ev.kind) {
      case EventKind::RoundStart: {
        net.on_round(now);
        result.coverage_series.emplace_back(now, net.reported_coverage_ratio());
        if (now + scenario.protocol.round_s < end) queue.schedule(now + scenario.protocol.round_s, EventKind::RoundStart);
        break;
      }
      case EventKind::TimerExpiry:
        net.on_timer(now, ev.payload.node, ev.payload.hole, ev.payload.token);
        break;
      case EventKind::MobileArrival:
        net.on_mobile_arrival(now, ev.payload.node, ev.payload.token);
        break;
      case EventKind::TargetSample: {
        if (now > 0.0) {
          for (auto& t : targets)
            t = target_step(t, now - scenario.mobility.sample_s, scenario.mobility.sample_s, scenario.grid,
                            scenario.mobility, mobility);
        }
        positions.clear();
        for (const auto& t : targets) positions.push_back(t.pos);
        result.target_track.push_back(positions.front());
        net.on_target_sample(now, positions);
        if (now + scenario.mobility.sample_s < end)
          queue.schedule(now + scenario.mobility.sample_s, EventKind::TargetSample);
        break;
      }
      case EventKind::GlobalUpdate:
        net.on_global_update(now);
        if (now + scenario.protocol.sink_update_period_s < end)
          queue.schedule(now + scenario.protocol.sink_update_period_s, EventKind::GlobalUpdate);
        break;
      case EventKind::FailureInjection: {
        net.settle_all(now);
        std::vector<int> alive_static;
        for (const SensorNode& n : net.nodes())
          if (n.kind == NodeKind::Static && n.alive()) alive_static.push_back(n.id);
        const std::vector<int> victims = inject_failures(alive_static, ev.payload.value, failures);
        net.kill(now, victims, DeathCause::Failure);
        break;
      }
      case EventKind::SimEnd:
        net.finish(now);
        break;
    }
    if (ev.kind == EventKind::SimEnd) break;
  }
  if (result.coverage_series.empty() || result.coverage_series.back().first != end)
    result.coverage_series.emplace_back(end, net.reported_coverage_ratio());

  for (const SensorNode& n : net.nodes()) {
    result.nodes.push_back(NodeReport{n.id, n.kind, n.ledger, n.alive(), n.flag, n.death_time, n.death_cause,
                                      n.r_l_base, n.r_l_current});
  }
  result.holes = net.holes();
  result.trace = net.trace();
  result.messages = net.message_stats();
  return result;
}

}  // namespace holesim
