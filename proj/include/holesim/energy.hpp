#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace holesim {

enum class RadioKind { TwoRegime, Simple };

std::string_view to_string(RadioKind kind);

/// Radio constants for both supported energy models.
///
/// TwoRegime is the first-order model with free-space (d^2) and multipath
/// (d^4) amplifier regimes split at `d0`. Simple charges a per-bit transmit
/// cost plus an amplifier term E_amp * d^2 that, unless `amp_per_bit` is
/// set, is charged once per message rather than per bit.
struct RadioModel {
  RadioKind kind = RadioKind::TwoRegime;
  double e_elec = 50e-9;     // J/bit
  double eps_fs = 10e-12;    // J/bit/m^2
  double eps_mp = 0.0013e-12;  // J/bit/m^4
  double d0 = 0.0;           // m; 0 means sqrt(eps_fs / eps_mp)
  double e_trans = 0.02;     // J/bit
  double e_amp = 0.01;       // J/m^2 (J/bit/m^2 with amp_per_bit)
  double e_recv = 0.01;      // J/bit
  bool amp_per_bit = false;

  /// Crossover distance actually used by the TwoRegime model.
  double effective_d0() const;
  std::vector<std::string> violations() const;
};

/// Energy to send `bits` over distance `d`. Throws std::domain_error on
/// negative input.
double tx_energy(const RadioModel& model, std::int64_t bits, double d);
/// Energy to receive `bits`. Throws std::domain_error on negative input.
double rx_energy(const RadioModel& model, std::int64_t bits);

enum class EnergyCategory : std::size_t { Tx = 0, Rx, Idle, Sense, Move };
inline constexpr std::size_t kEnergyCategoryCount = 5;

std::string_view to_string(EnergyCategory c);

/// Per-node energy account. Charges are capped at the residual so that
/// initial == residual + sum(consumed) holds exactly; the node dies when the
/// residual reaches zero and the ledger is frozen from then on.
class EnergyLedger {
 public:
  EnergyLedger() = default;
  explicit EnergyLedger(double initial);

  /// Returns whether the node is still alive after the charge.
  bool charge(EnergyCategory category, double amount);

  double initial() const { return initial_; }
  double consumed(EnergyCategory c) const { return consumed_[static_cast<std::size_t>(c)]; }
  double total_consumed() const;
  double residual() const;
  bool alive() const { return alive_; }
  /// Freezes the ledger without touching the counters (external failure).
  void kill() { alive_ = false; }
  std::size_t ignored_charges() const { return ignored_charges_; }

 private:
  double initial_ = 0.0;
  std::array<double, kEnergyCategoryCount> consumed_{};
  bool alive_ = true;
  std::size_t ignored_charges_ = 0;
};

/// Share of a cluster's residual energy held by one zone. 0 when the
/// cluster is drained. Throws std::domain_error when zone > cluster or
/// either is negative.
double zone_energy_ratio(double zone_residual, double cluster_residual);

}  // namespace holesim
