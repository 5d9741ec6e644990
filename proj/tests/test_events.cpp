#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "holesim/events.hpp"

using namespace holesim;

TEST_CASE("events pop in time order, insertion order within a time") {
  EventQueue q;
  q.schedule(5.0, EventKind::SimEnd);
  q.schedule(1.0, EventKind::TimerExpiry, {1, -1, 0, 0.0});
  q.schedule(1.0, EventKind::TimerExpiry, {2, -1, 0, 0.0});
  q.schedule(0.5, EventKind::RoundStart);
  CHECK(q.pop().kind == EventKind::RoundStart);
  CHECK(q.now() == 0.5);
  CHECK(q.pop().payload.node == 1);
  CHECK(q.pop().payload.node == 2);
  CHECK(q.pop().kind == EventKind::SimEnd);
  CHECK(q.empty());
}

TEST_CASE("scheduling in the past throws") {
  EventQueue q;
  q.schedule(2.0, EventKind::RoundStart);
  q.pop();
  CHECK_NOTHROW(q.schedule(2.0, EventKind::RoundStart));
  CHECK_THROWS_AS(q.schedule(1.999, EventKind::RoundStart), std::logic_error);
  CHECK_THROWS_AS(q.schedule(NAN, EventKind::RoundStart), std::logic_error);
}

TEST_CASE("pop on an empty queue throws") {
  EventQueue q;
  CHECK_THROWS_AS(q.pop(), std::logic_error);
}
