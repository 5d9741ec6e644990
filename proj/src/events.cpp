#include "holesim/events.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace holesim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::RoundStart: return "round_start";
    case EventKind::TimerExpiry: return "timer_expiry";
    case EventKind::MobileArrival: return "mobile_arrival";
    case EventKind::TargetSample: return "target_sample";
    case EventKind::GlobalUpdate: return "global_update";
    case EventKind::FailureInjection: return "failure_injection";
    case EventKind::SimEnd: return "sim_end";
  }
  return "?";
}

std::uint64_t EventQueue::schedule(double time, EventKind kind, EventPayload payload) {
  if (!std::isfinite(time) || time < now_)
    throw std::logic_error("EventQueue: event '" + std::string(to_string(kind)) +
                           "' scheduled in the past");
  const std::uint64_t seq = next_seq_++;
  queue_.push(SimEvent{time, seq, kind, payload});
  return seq;
}

SimEvent EventQueue::pop() {
  if (queue_.empty()) throw std::logic_error("EventQueue::pop on empty queue");
  SimEvent ev = queue_.top();
  queue_.pop();
  now_ = ev.time;
  return ev;
}

}  // namespace holesim
