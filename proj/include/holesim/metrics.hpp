#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "holesim/engine.hpp"

namespace holesim {

/// Mean consumed energy per node. Absent for zero nodes.
std::optional<double> avg_energy(std::span<const double> consumed);

/// Jain's fairness index (sum c)^2 / (n * sum c^2). All-zero consumption is
/// perfectly balanced and yields 1. Absent for zero nodes.
std::optional<double> load_balance(std::span<const double> consumed);

/// Mean over all holes of how long each stayed covered: from covered_at to
/// reopened_at, or to `end` when it never reopened. Unrecovered holes add 0.
/// Absent when there are no holes.
std::optional<double> hole_coverage_lifetime(std::span<const HoleRecord> holes, double end);

/// Mean detection-to-coverage latency over recovered holes.
std::optional<double> recovery_time(std::span<const HoleRecord> holes);

/// First energy death of a static node; `duration` if none died.
double network_lifetime(std::span<const NodeReport> nodes, double duration);

struct RunMetrics {
  std::optional<double> avg_energy_consumed;
  std::optional<double> load_balance;
  std::optional<double> hole_coverage_lifetime;
  std::optional<double> mean_recovery_time;
  double network_lifetime = 0.0;
  std::vector<std::pair<double, double>> coverage_ratio_series;
  int holes_total = 0;
  int holes_unrecovered = 0;
  double final_coverage_ratio = 0.0;
};

RunMetrics compute_metrics(const RunResult& result);

}  // namespace holesim
