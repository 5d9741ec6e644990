#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "holesim/metrics.hpp"

using namespace holesim;
using namespace fixtures;

namespace {

HoleRecord hole(double detected, std::optional<double> covered, std::optional<double> reopened = {}) {
  HoleRecord h;
  h.detected_at = detected;
  h.covered_at = covered;
  h.reopened_at = reopened;
  h.covered_by = covered ? CoverMethod::RangeIncrease : CoverMethod::Unrecovered;
  return h;
}

NodeReport report(int id, NodeKind kind, std::optional<double> died, DeathCause cause) {
  NodeReport n;
  n.id = id;
  n.kind = kind;
  n.death_time = died;
  n.death_cause = cause;
  n.alive = !died;
  return n;
}

}  // namespace

TEST_CASE("average energy") {
  CHECK_FALSE(avg_energy({}));
  const double zeros[] = {0, 0, 0};
  CHECK(*avg_energy(zeros) == 0.0);
  const double two[] = {1, 3};
  CHECK(*avg_energy(two) == 2.0);
}

TEST_CASE("Jain index") {
  const double equal[] = {2, 2, 2, 2, 2};
  CHECK(*load_balance(equal) == doctest::Approx(1.0));
  const double single[] = {0, 0, 7, 0};
  CHECK(*load_balance(single) == doctest::Approx(0.25));
  const double three[] = {1, 2, 3};
  CHECK(*load_balance(three) == doctest::Approx(36.0 / 42.0).epsilon(1e-15));
  CHECK(*load_balance(three) == doctest::Approx(0.857142857142857));
  const double zeros[] = {0, 0};
  CHECK(*load_balance(zeros) == 1.0);
  CHECK_FALSE(load_balance({}));
}

TEST_CASE("Jain index is scale invariant and bounded") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(1 + trial % 17);
    for (double& x : c) x = u(rng);
    c[0] += 1e-3;
    const double j = *load_balance(c);
    CHECK(j <= 1.0 + 1e-12);
    CHECK(j >= 1.0 / c.size() - 1e-12);
    std::vector<double> scaled = c;
    const double k = 0.01 + 100 * u(rng);
    for (double& x : scaled) x *= k;
    CHECK(*load_balance(scaled) == doctest::Approx(j).epsilon(1e-12));
  }
}

TEST_CASE("hole coverage lifetime") {
  const HoleRecord once[] = {hole(90, 100.0)};
  CHECK(*hole_coverage_lifetime(once, 1000) == 900.0);
  CHECK_FALSE(hole_coverage_lifetime({}, 1000));
  const HoleRecord mixed[] = {hole(90, 100.0), hole(50, {}), hole(10, 20.0, 220.0)};
  CHECK(*hole_coverage_lifetime(mixed, 1000) == doctest::Approx((900.0 + 0.0 + 200.0) / 3.0));
}

TEST_CASE("recovery time") {
  const HoleRecord one[] = {hole(50, 53.0)};
  CHECK(*recovery_time(one) == doctest::Approx(3.0));
  const HoleRecord two[] = {hole(10, 12.0), hole(20, 24.0), hole(5, {})};
  CHECK(*recovery_time(two) == doctest::Approx(3.0));
  const HoleRecord none[] = {hole(5, {})};
  CHECK_FALSE(recovery_time(none));
}

TEST_CASE("network lifetime is the first static energy death") {
  const NodeReport nodes[] = {report(0, NodeKind::Static, 300.0, DeathCause::Failure),
                              report(1, NodeKind::Mobile, 100.0, DeathCause::Energy),
                              report(2, NodeKind::Static, 700.0, DeathCause::Energy),
                              report(3, NodeKind::Static, 500.0, DeathCause::Energy),
                              report(4, NodeKind::Static, {}, DeathCause::None)};
  CHECK(network_lifetime(nodes, 1000) == 500.0);
  CHECK(network_lifetime(std::span(nodes, 2), 1000) == 1000.0);
}

TEST_CASE("range-increase recoveries take exactly the timer delay") {
  const RunResult r = run(layout_scenario(100, 100, 100, 20, {static_at(55, 55)}));
  const auto armed = events(r, "timer_armed");
  REQUIRE_FALSE(armed.empty());
  for (const HoleRecord& h : r.holes) {
    REQUIRE(h.covered_by == CoverMethod::RangeIncrease);
    CHECK(*h.recovery_time() == doctest::Approx(armed.front().value).epsilon(1e-12));
  }
  CHECK(*compute_metrics(r).mean_recovery_time == doctest::Approx(armed.front().value).epsilon(1e-12));
}

TEST_CASE("metrics of a real run are consistent with the ledgers") {
  Scenario s;
  s.seed = 3;
  s.duration_s = 300;
  s.grid = GridSpec(300, 300, 10, 100);
  s.nodes.count = 30;
  s.nodes.r_l = 30;
  s.nodes.r_s = 50;
  s.nodes.initial_energy_j = 0.05;
  s.protocol.sink_pos = {150, 150};
  const RunResult r = run(s);
  const RunMetrics m = compute_metrics(r);
  double total = 0.0, residual = 0.0, initial = 0.0;
  for (const NodeReport& n : r.nodes) {
    total += n.ledger.total_consumed();
    residual += n.ledger.residual();
    initial += n.ledger.initial();
  }
  CHECK(*m.avg_energy_consumed == doctest::Approx(total / r.nodes.size()));
  CHECK(*m.avg_energy_consumed == doctest::Approx((initial - residual) / r.nodes.size()));
  CHECK(*m.avg_energy_consumed >= 0.0);
  // Every node dies here, so the mean sits on the bound up to rounding.
  CHECK(*m.avg_energy_consumed <= s.nodes.initial_energy_j * (1 + 1e-12));
  CHECK(m.network_lifetime >= 0.0);
  CHECK(m.network_lifetime <= s.duration_s);
  CHECK(m.holes_total == static_cast<int>(r.holes.size()));
  for (const auto& [t, p] : m.coverage_ratio_series) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}
