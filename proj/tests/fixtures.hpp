#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "holesim/engine.hpp"

namespace fixtures {

using namespace holesim;

// Full-grid scan: every cell whose center is within r of p.
inline CellSet brute_disk(Point p, double r, const GridSpec& g) {
  CellSet out;
  for (int iy = 0; iy < g.rows(); ++iy)
    for (int ix = 0; ix < g.cols(); ++ix) {
      const Point c{(ix + 0.5) * g.cell_side(), (iy + 0.5) * g.cell_side()};
      if (std::hypot(c.x - p.x, c.y - p.y) <= r) out.push_back({ix, iy});
    }
  return out;
}

inline CellSet brute_annulus(Point p, double r_l, double r_s, const GridSpec& g) {
  CellSet out;
  for (int iy = 0; iy < g.rows(); ++iy)
    for (int ix = 0; ix < g.cols(); ++ix) {
      const Point c{(ix + 0.5) * g.cell_side(), (iy + 0.5) * g.cell_side()};
      const double d = std::hypot(c.x - p.x, c.y - p.y);
      if (d > r_l && d <= r_s) out.push_back({ix, iy});
    }
  return out;
}

// Annulus cells of `self` that no other active node within 2 r_s covers
// with its current radius.
inline CellSet brute_q_hat(const std::vector<SensorNode>& nodes, int self, const GridSpec& g) {
  const SensorNode& n = nodes[self];
  CellSet out;
  for (const Cell& c : brute_annulus(n.pos, n.r_l_current, n.r_s, g)) {
    const Point cc{(c.ix + 0.5) * g.cell_side(), (c.iy + 0.5) * g.cell_side()};
    bool covered = false;
    for (const SensorNode& m : nodes) {
      if (m.id == self || !m.active()) continue;
      if (std::hypot(m.pos.x - n.pos.x, m.pos.y - n.pos.y) > 2.0 * n.r_s) continue;
      if (std::hypot(cc.x - m.pos.x, cc.y - m.pos.y) <= m.r_l_current) covered = true;
    }
    if (!covered) out.push_back(c);
  }
  return out;
}

inline SensorNode make_node(int id, Point pos, double r_l, double r_s, double energy = 10.0,
                            NodeKind kind = NodeKind::Static) {
  SensorNode n;
  n.id = id;
  n.kind = kind;
  n.pos = pos;
  n.ledger = EnergyLedger(energy);
  n.r_l_base = n.r_l_current = r_l;
  n.r_s = r_s;
  n.r_c = 2.0 * r_s;
  n.state = kind == NodeKind::Mobile ? NodeState::Asleep : NodeState::Active;
  return n;
}

// Small hand-built network: r_l 20, r_s 25, 10 m cells, no crisis
// handling, no targets, one round.
inline Scenario layout_scenario(double width, double height, double subregion, double duration,
                                std::vector<NodeSpec> layout) {
  Scenario s;
  s.id = "fixture";
  s.seed = 1;
  s.duration_s = duration;
  s.grid = GridSpec(width, height, 10.0, subregion);
  s.nodes.r_l = 20.0;
  s.nodes.r_s = 25.0;
  s.nodes.initial_energy_j = 10.0;
  s.protocol.crisis_threshold = 0.0;
  s.protocol.round_s = 100.0;
  s.protocol.sink_pos = {width / 2.0, height / 2.0};
  s.protocol.sink_update_period_s = 1000.0;
  s.mobility.target_count = 0;
  s.layout = std::move(layout);
  s.record_trace = true;
  return s;
}

inline NodeSpec static_at(double x, double y) { return NodeSpec{{x, y}, NodeKind::Static, {}, {}}; }
inline NodeSpec mobile_at(double x, double y) { return NodeSpec{{x, y}, NodeKind::Mobile, {}, {}}; }

inline std::vector<TraceEntry> events(const RunResult& r, std::string_view name, int hole = -2) {
  std::vector<TraceEntry> out;
  for (const TraceEntry& t : r.trace)
    if (t.event == name && (hole == -2 || t.hole == hole)) out.push_back(t);
  return out;
}

inline double consumed(const NodeReport& n) { return n.ledger.total_consumed(); }

}  // namespace fixtures
