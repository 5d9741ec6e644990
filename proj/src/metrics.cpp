#include "holesim/metrics.hpp"

#include <algorithm>

namespace holesim {

std::optional<double> avg_energy(std::span<const double> consumed) {
  if (consumed.empty()) return std::nullopt;
  double sum = 0.0;
  for (double c : consumed) sum += c;
  return sum / static_cast<double>(consumed.size());
}

std::optional<double> load_balance(std::span<const double> consumed) {
  if (consumed.empty()) return std::nullopt;
  double sum = 0.0, sq = 0.0;
  for (double c : consumed) {
    sum += c;
    sq += c * c;
  }
  if (sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(consumed.size()) * sq);
}

std::optional<double> hole_coverage_lifetime(std::span<const HoleRecord> holes, double end) {
  if (holes.empty()) return std::nullopt;
  double total = 0.0;
  for (const HoleRecord& h : holes) {
    if (!h.covered_at) continue;
    const double stop = h.reopened_at.value_or(end);
    total += std::max(0.0, stop - *h.covered_at);
  }
  return total / static_cast<double>(holes.size());
}

std::optional<double> recovery_time(std::span<const HoleRecord> holes) {
  double total = 0.0;
  int n = 0;
  for (const HoleRecord& h : holes) {
    if (auto r = h.recovery_time()) {
      total += *r;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return total / n;
}

double network_lifetime(std::span<const NodeReport> nodes, double duration) {
  double first = duration;
  for (const NodeReport& n : nodes)
    if (n.kind == NodeKind::Static && n.death_cause == DeathCause::Energy && n.death_time)
      first = std::min(first, *n.death_time);
  return first;
}

RunMetrics compute_metrics(const RunResult& result) {
  std::vector<double> consumed;
  consumed.reserve(result.nodes.size());
  for (const NodeReport& n : result.nodes) consumed.push_back(n.ledger.total_consumed());

  RunMetrics m;
  m.avg_energy_consumed = avg_energy(consumed);
  m.load_balance = load_balance(consumed);
  m.hole_coverage_lifetime = hole_coverage_lifetime(result.holes, result.duration_s);
  m.mean_recovery_time = recovery_time(result.holes);
  m.network_lifetime = network_lifetime(result.nodes, result.duration_s);
  m.coverage_ratio_series = result.coverage_series;
  m.holes_total = static_cast<int>(result.holes.size());
  for (const HoleRecord& h : result.holes)
    if (!h.recovered()) ++m.holes_unrecovered;
  m.final_coverage_ratio = result.coverage_series.empty() ? 0.0 : result.coverage_series.back().second;
  return m;
}

}  // namespace holesim
