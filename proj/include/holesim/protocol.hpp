#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "holesim/energy.hpp"
#include "holesim/events.hpp"
#include "holesim/geometry.hpp"

namespace holesim {

enum class ProtocolKind { Proposed, Baseline };
enum class NodeKind { Static, Mobile };
/// Asleep and Travelling only apply to mobile nodes.
enum class NodeState { Active, Asleep, Travelling, Dead };
enum class DeathCause { None, Energy, Failure };
enum class MobileSelection { Nearest, Farthest };

enum class CoverMethod { Pending, RangeIncrease, LocalMobile, ClusterMobile, NeighborClusterMobile, Unrecovered };

enum class MessageKind {
  Hello,
  HeadAnnounce,
  QlBroadcast,
  EnergyReport,
  CrisisAlert,
  HoleDetected,
  HelpRequest,
  MobileDispatch,
  SinkReport,
  DataPacket,
};
inline constexpr std::size_t kMessageKindCount = 10;

std::string_view to_string(ProtocolKind k);
std::string_view to_string(CoverMethod m);
std::string_view to_string(MessageKind k);
std::string_view to_string(MobileSelection s);

/// Control and data message sizes, in bytes.
struct MessageSizes {
  int hello = 64;
  int head_announce = 64;
  int ql_base = 64;
  int ql_per_cell = 2;
  int energy_report = 64;
  int crisis_alert = 64;
  int hole_detected = 64;
  int help_request = 64;
  int mobile_dispatch = 64;
  int sink_report = 128;
  int data = 512;
};

/// Background power draw and per-action costs outside the radio.
struct PowerParams {
  double idle_w = 1e-4;
  double sleep_w = 1e-5;
  double move_j_per_m = 0.0;
  double sense_j_per_event = 0.0;
  /// Active power is idle_w * (r_current / r_base)^range_power_exp.
  double range_power_exp = 2.0;
};

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::Proposed;
  RadioModel radio;
  PowerParams power;
  MessageSizes sizes;
  double round_s = 10.0;
  double t_base_s = 1.0;
  int zones_per_side = 2;
  double crisis_threshold = 0.1;
  MobileSelection selection = MobileSelection::Nearest;
  double mobile_speed_mps = 5.0;
  Point sink_pos;
  double sink_update_period_s = 100.0;
};

struct NeighborEntry {
  int id = -1;
  Point pos;
  std::shared_ptr<const CellSet> q_l;
};

struct SensorNode {
  int id = -1;
  NodeKind kind = NodeKind::Static;
  Point pos;
  EnergyLedger ledger;
  double r_l_base = 0.0;
  double r_l_current = 0.0;
  double r_s = 0.0;
  double r_c = 0.0;
  NodeState state = NodeState::Active;
  int cluster_id = -1;
  bool flag = false;  // mobile already used
  CoverageSets coverage;
  std::vector<NeighborEntry> neighbor_table;

  // Range extensions currently held, keyed by hole id.
  std::map<int, double> range_holds;
  double settled_at = 0.0;
  std::optional<double> death_time;
  DeathCause death_cause = DeathCause::None;

  bool alive() const { return state != NodeState::Dead; }
  bool asleep() const { return state == NodeState::Asleep; }
  bool active() const { return state == NodeState::Active; }
  bool awake() const { return state == NodeState::Active || state == NodeState::Travelling; }
};

struct Cluster {
  int id = -1;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int head_id = -1;
  std::vector<int> member_ids;
  std::int64_t event_counter = 0;
  std::vector<int> crisis_zones;
  bool pending_data = false;

  Point centroid() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
  bool headless() const { return head_id < 0; }
};

struct HoleRecord {
  int hole_id = -1;
  int detecting_node = -1;
  CellSet cells;
  double detected_at = 0.0;
  std::optional<double> covered_at;
  CoverMethod covered_by = CoverMethod::Pending;
  /// Set when the covered hole is exposed again; ends its lifetime window.
  std::optional<double> reopened_at;

  std::vector<int> detectors;
  std::vector<int> responders;  // nodes that raised their range for this hole
  int requester = -1;           // node that asked for a mobile
  int mobile_in_flight = -1;
  CoverMethod pending_level = CoverMethod::Pending;
  int mobiles_used = 0;

  bool recovered() const { return covered_at.has_value(); }
  std::optional<double> recovery_time() const {
    if (!covered_at) return std::nullopt;
    return *covered_at - detected_at;
  }
};

struct TraceEntry {
  double time = 0.0;
  std::string event;
  int node = -1;
  int hole = -1;
  int cluster = -1;
  double value = 0.0;
  std::string detail;
};

class NoMobileAvailable : public std::runtime_error {
 public:
  NoMobileAvailable() : std::runtime_error("no free mobile node available") {}
};

struct HeadCandidate {
  int id;
  double residual;
};

struct MobileCandidate {
  int id;
  Point pos;
  bool flag;
};

/// Alive static member with the most residual energy, lowest id on ties.
/// Returns -1 for an empty candidate list.
int elect_head(std::span<const HeadCandidate> candidates);

/// Hole-response timer: larger holes fire sooner. Throws on an empty hole.
double coverage_timer_delay(std::size_t q_hat_size, double t_base);

/// Baseline response timer: more residual energy fires sooner.
double baseline_timer_delay(double residual, double initial, double t_base);

/// Picks the free (flag == false) candidate closest to (or, with Farthest,
/// farthest from) `target`, lowest id on ties, and sets its flag. Throws
/// NoMobileAvailable when every candidate is already in use.
int select_mobile(std::span<MobileCandidate> candidates, Point target, MobileSelection rule);

/// Indices of zones whose share of the cluster residual is strictly below
/// `threshold`.
std::vector<int> crisis_zones(std::span<const double> zone_residuals, double threshold);

/// Clusters the sink should send a mobile to, best first: those whose event
/// count is above the mean over all clusters, by descending count (lowest
/// id on ties), truncated to `free_mobiles`.
std::vector<int> rank_high_load_clusters(std::span<const std::int64_t> counters, std::size_t free_mobiles);

struct MessageStats {
  std::array<std::uint64_t, kMessageKindCount> sent{};
  std::uint64_t deliveries = 0;
  double expected_rx_j = 0.0;
};

/// Node and cluster-head state machines for both protocols. Driven by the
/// simulator through the on_* handlers; schedules its own timers and
/// arrivals on the given Scheduler.
class Network {
 public:
  Network(GridSpec grid, ProtocolConfig config, std::vector<SensorNode> nodes, Scheduler& scheduler,
          bool record_trace);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  // Event handlers.
  void on_round(double now);
  void on_timer(double now, int node, int hole, std::uint64_t token);
  void on_mobile_arrival(double now, int mobile, std::uint64_t token);
  void on_target_sample(double now, std::span<const Point> targets);
  void on_global_update(double now);
  void kill(double now, std::span<const int> ids, DeathCause cause);
  /// Settles every node's background energy up to `now` and marks open
  /// holes as unrecovered.
  void finish(double now);

  // Individual phases, exposed for targeted tests.
  void settle_all(double now);
  void elect_heads(double now);
  void phase_update(double now);
  void phase_prevention(double now);
  /// Computes q_hat for every active node, files new holes and arms timers.
  /// Returns the ids of newly created holes.
  std::vector<int> phase_detect(double now);

  const GridSpec& grid() const { return grid_; }
  const ProtocolConfig& config() const { return config_; }
  const std::vector<SensorNode>& nodes() const { return nodes_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const std::vector<HoleRecord>& holes() const { return holes_; }
  const CoverageMap& coverage() const { return coverage_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  const MessageStats& message_stats() const { return stats_; }
  /// Coverage ratio where, under the proposed protocol, cells of headless
  /// clusters count as uncovered.
  double reported_coverage_ratio() const;
  /// Background power currently drawn by a node.
  double power_draw(const SensorNode& n) const;

 private:
  SensorNode& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }
  bool proposed() const { return config_.kind == ProtocolKind::Proposed; }

  void record(double now, std::string event, int node = -1, int hole = -1, int cluster = -1,
              double value = 0.0, std::string detail = {});

  // Energy.
  void settle(SensorNode& n, double now);
  void charge(SensorNode& n, EnergyCategory cat, double amount, double now);
  void handle_death(SensorNode& n, double now, DeathCause cause, double when);

  // Messaging. Return whether the message left the sender.
  bool unicast(double now, int src, int dst, MessageKind kind, int bytes);
  bool to_sink(double now, int src, MessageKind kind, int bytes);
  void from_sink(double now, int dst, MessageKind kind, int bytes);
  bool broadcast(double now, int src, MessageKind kind, int bytes, double range,
                 std::vector<int>* receivers = nullptr);
  int ql_bytes(const SensorNode& n) const;

  // Coverage changes.
  double held_radius(const SensorNode& n) const;
  void apply_range(SensorNode& n, double now);
  void refresh_holes(double now, std::optional<CoverMethod> cause);
  void assign_cluster(SensorNode& n);
  void rebuild_membership();

  // Hole response.
  void arm_timer(double now, int node_id, int hole_id, double delay);
  bool raise_range_for(double now, SensorNode& n, HoleRecord& h);
  void request_mobile(double now, HoleRecord& h, int requester);
  CellSet needed_cells(const HoleRecord& h) const;
  Point best_mobile_target(const CellSet& needed) const;
  void release_responders(double now, HoleRecord& h);
  std::vector<int> neighbor_clusters(int cluster_id) const;
  std::vector<MobileCandidate> free_mobiles_in(int cluster_id) const;
  std::optional<int> pick_mobile(std::vector<MobileCandidate> candidates, Point target);
  void dispatch_mobile(double now, int mobile_id, int commander, Point target, int hole_id,
                       CoverMethod level, int zone_key);
  int zone_of(const Cluster& c, Point p) const;

  GridSpec grid_;
  ProtocolConfig config_;
  std::vector<SensorNode> nodes_;
  std::vector<Cluster> clusters_;
  std::vector<HoleRecord> holes_;
  CoverageMap coverage_;
  Scheduler& scheduler_;
  bool record_trace_;
  double mobile_r_base_ = 0.0;
  std::vector<TraceEntry> trace_;
  MessageStats stats_;

  std::vector<int> live_holes_;  // holes not yet reopened or finalised
  std::map<std::pair<int, int>, std::uint64_t> timers_;  // (node, hole) -> token
  std::uint64_t next_token_ = 1;

  struct Travel {
    std::uint64_t token = 0;
    Point target;
    int hole = -1;
    CoverMethod level = CoverMethod::Pending;
    int zone_key = -1;
  };
  std::map<int, Travel> travels_;        // mobile id -> trip
  std::map<int, int> zone_in_flight_;    // cluster*zones + zone -> mobile id
};

}  // namespace holesim
