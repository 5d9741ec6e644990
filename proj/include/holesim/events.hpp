#pragma once

#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

namespace holesim {

enum class EventKind {
  RoundStart,
  TimerExpiry,
  MobileArrival,
  TargetSample,
  GlobalUpdate,
  FailureInjection,
  SimEnd,
};

std::string_view to_string(EventKind kind);

struct EventPayload {
  int node = -1;
  int hole = -1;
  std::uint64_t token = 0;
  double value = 0.0;
};

struct SimEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::SimEnd;
  EventPayload payload;
};

/// Anything that can accept future events. Handlers never block; a delay is
/// always expressed as a scheduled event.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual double now() const = 0;
  /// Throws std::logic_error when `time` is earlier than now().
  virtual std::uint64_t schedule(double time, EventKind kind, EventPayload payload = {}) = 0;
};

/// Priority queue ordered by (time, seq); seq is assigned on insertion.
class EventQueue final : public Scheduler {
 public:
  double now() const override { return now_; }
  std::uint64_t schedule(double time, EventKind kind, EventPayload payload = {}) override;

  bool empty() const { return queue_.empty(); }
  std::size_t size() const { return queue_.size(); }
  /// Removes the earliest event and advances the clock to its time.
  SimEvent pop();

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace holesim
