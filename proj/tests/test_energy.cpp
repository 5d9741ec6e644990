#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "holesim/energy.hpp"

using namespace holesim;

namespace {

RadioModel simple_table1() {
  RadioModel m;
  m.kind = RadioKind::Simple;
  m.e_trans = 0.02;
  m.e_amp = 0.01;
  m.e_recv = 0.01;
  return m;
}

}  // namespace

TEST_CASE("tx_energy examples") {
  RadioModel two;
  CHECK(tx_energy(two, 0, 123.0) == 0.0);
  CHECK(tx_energy(simple_table1(), 1, 0.0) == doctest::Approx(0.02));
  CHECK_THROWS_AS(tx_energy(two, -1, 1.0), std::domain_error);
  CHECK_THROWS_AS(tx_energy(two, 1, -1.0), std::domain_error);
}

TEST_CASE("two-regime branch selection at d0") {
  RadioModel m;
  m.d0 = 50.0;
  const double below = 1000 * m.e_elec + 1000 * m.eps_fs * 49.0 * 49.0;
  const double at = 1000 * m.e_elec + 1000 * m.eps_mp * std::pow(50.0, 4);
  CHECK(tx_energy(m, 1000, 49.0) == doctest::Approx(below).epsilon(1e-12));
  CHECK(tx_energy(m, 1000, 50.0) == doctest::Approx(at).epsilon(1e-12));
  RadioModel derived;
  CHECK(derived.effective_d0() == doctest::Approx(std::sqrt(10e-12 / 0.0013e-12)));
}

TEST_CASE("simple model charges the amplifier once per message unless per-bit") {
  RadioModel m = simple_table1();
  CHECK(tx_energy(m, 100, 3.0) == doctest::Approx(100 * 0.02 + 0.01 * 9.0));
  m.amp_per_bit = true;
  CHECK(tx_energy(m, 100, 3.0) == doctest::Approx(100 * (0.02 + 0.01 * 9.0)));
}

TEST_CASE("tx_energy strictly increases with distance") {
  for (RadioModel m : {RadioModel{}, simple_table1()}) {
    double prev = tx_energy(m, 512, 0.0);
    for (double d = 1.0; d < 300.0; d += 1.0) {
      const double e = tx_energy(m, 512, d);
      CHECK(e > prev);
      prev = e;
    }
  }
}

TEST_CASE("rx_energy examples") {
  CHECK(rx_energy(RadioModel{}, 0) == 0.0);
  CHECK(rx_energy(simple_table1(), 4096) == doctest::Approx(40.96));
  for (std::int64_t b : {1, 7, 4096}) CHECK(rx_energy(RadioModel{}, 2 * b) == doctest::Approx(2 * rx_energy(RadioModel{}, b)));
}

TEST_CASE("ledger charge examples") {
  EnergyLedger fresh(4.0);
  CHECK(fresh.charge(EnergyCategory::Tx, 1.0));
  CHECK(fresh.residual() == 3.0);

  EnergyLedger low(4.0);
  low.charge(EnergyCategory::Tx, 3.5);
  CHECK_FALSE(low.charge(EnergyCategory::Rx, 0.5));
  CHECK(low.residual() == 0.0);
  CHECK_FALSE(low.alive());
  CHECK_FALSE(low.charge(EnergyCategory::Idle, 1.0));
  CHECK(low.total_consumed() == 4.0);
  CHECK(low.ignored_charges() == 1);
}

TEST_CASE("ledger conservation over random charge sequences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amount(0.0, 0.3);
  std::uniform_int_distribution<int> cat(0, kEnergyCategoryCount - 1);
  for (int trial = 0; trial < 200; ++trial) {
    EnergyLedger l(4.0);
    for (int i = 0; i < 40; ++i) {
      l.charge(static_cast<EnergyCategory>(cat(rng)), amount(rng));
      double sum = 0.0;
      for (std::size_t c = 0; c < kEnergyCategoryCount; ++c) sum += l.consumed(static_cast<EnergyCategory>(c));
      CHECK(std::abs(l.initial() - (l.residual() + sum)) <= 1e-9 * l.initial());
    }
  }
}

TEST_CASE("zone_energy_ratio") {
  CHECK(zone_energy_ratio(0.0, 10.0) == 0.0);
  CHECK(zone_energy_ratio(2.5, 10.0) == 0.25);
  CHECK(zone_energy_ratio(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(zone_energy_ratio(11.0, 10.0), std::domain_error);
}
