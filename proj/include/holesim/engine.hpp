#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "holesim/protocol.hpp"

namespace holesim {

/// Deterministic 64-bit stream. Each named stream is an mt19937_64 seeded
/// with splitmix64(master_seed ^ fnv1a(name)), so streams are independent
/// of each other and of how many draws the others make.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64-fnv1a";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng stream(std::uint64_t master_seed, std::string_view name);

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

struct NodeParams {
  int count = 0;
  double mobile_fraction = 0.2;
  double initial_energy_j = 4.0;
  double r_l = 20.0;
  double r_s = 40.0;
};

/// Explicit node placement, used instead of random placement when given.
struct NodeSpec {
  Point pos;
  NodeKind kind = NodeKind::Static;
  std::optional<double> initial_energy_j;
  /// Residual at t = 0, for fixtures that start partly drained.
  std::optional<double> residual_j;
};

struct MobilityParams {
  double sample_s = 1.0;
  double speed_min = 1.0;
  double speed_max = 10.0;
  double pause_s = 0.0;
  int target_count = 1;
};

struct FailureStep {
  double time_s = 0.0;
  double percent = 0.0;
};

struct Scenario {
  std::string id = "scenario";
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  GridSpec grid;
  NodeParams nodes;
  std::vector<NodeSpec> layout;
  ProtocolConfig protocol;
  MobilityParams mobility;
  std::vector<FailureStep> failure_plan;
  bool record_trace = false;

  int node_count() const { return layout.empty() ? nodes.count : static_cast<int>(layout.size()); }
  double failure_percent_total() const;
  /// Every violated constraint, human readable; empty when valid.
  std::vector<std::string> violations() const;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct TargetState {
  Point pos;
  Point waypoint;
  double speed = 1.0;
  double pause_until = 0.0;
};

/// Uniform i.i.d. placement over the area; the last floor(n * fraction)
/// ids are mobile nodes, asleep at start.
std::vector<SensorNode> place_nodes(const Scenario& scenario, Rng& rng);

/// Fresh random-waypoint target at a uniform position.
TargetState spawn_target(const GridSpec& grid, const MobilityParams& params, Rng& rng);

/// Advances a random-waypoint target by `dt` seconds starting at time `now`.
/// Throws std::domain_error for dt <= 0.
TargetState target_step(TargetState target, double now, double dt, const GridSpec& grid,
                        const MobilityParams& params, Rng& rng);

/// Uniformly samples floor(percent/100 * |alive_static|) ids without
/// replacement. Result is sorted.
std::vector<int> inject_failures(std::span<const int> alive_static, double percent, Rng& rng);

struct NodeReport {
  int id = -1;
  NodeKind kind = NodeKind::Static;
  EnergyLedger ledger;
  bool alive = true;
  bool flag = false;
  std::optional<double> death_time;
  DeathCause death_cause = DeathCause::None;
  double r_l_base = 0.0;
  double r_l_current = 0.0;
};

struct RunResult {
  std::string scenario_id;
  std::uint64_t seed = 0;
  ProtocolKind protocol = ProtocolKind::Proposed;
  int n_nodes = 0;
  double failure_pct = 0.0;
  double duration_s = 0.0;

  std::vector<NodeReport> nodes;
  std::vector<HoleRecord> holes;
  std::vector<std::pair<double, double>> coverage_series;  // (time, p)
  std::vector<Point> target_track;                         // first target, every sample
  std::vector<TraceEntry> trace;
  MessageStats messages;
  std::uint64_t events_processed = 0;
};

/// Runs one scenario to completion. Throws ValidationError on an invalid
/// scenario. Pure function of the scenario; safe to call concurrently.
RunResult run(const Scenario& scenario);

}  // namespace holesim
