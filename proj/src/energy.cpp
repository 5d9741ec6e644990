#include "holesim/energy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace holesim {

std::string_view to_string(RadioKind kind) {
  return kind == RadioKind::TwoRegime ? "two_regime" : "simple";
}

std::string_view to_string(EnergyCategory c) {
  switch (c) {
    case EnergyCategory::Tx: return "tx";
    case EnergyCategory::Rx: return "rx";
    case EnergyCategory::Idle: return "idle";
    case EnergyCategory::Sense: return "sense";
    case EnergyCategory::Move: return "move";
  }
  return "?";
}

double RadioModel::effective_d0() const {
  if (d0 > 0.0) return d0;
  if (eps_mp > 0.0) return std::sqrt(eps_fs / eps_mp);
  return INFINITY;
}

std::vector<std::string> RadioModel::violations() const {
  std::vector<std::string> out;
  const std::pair<const char*, double> constants[] = {
      {"energy.e_elec", e_elec}, {"energy.eps_fs", eps_fs}, {"energy.eps_mp", eps_mp},
      {"energy.d0", d0},         {"energy.e_trans", e_trans}, {"energy.e_amp", e_amp},
      {"energy.e_recv", e_recv}};
  for (const auto& [name, value] : constants) {
    if (!(value >= 0.0) || !std::isfinite(value)) out.push_back(std::string(name) + " must be >= 0");
  }
  if (kind == RadioKind::TwoRegime && d0 == 0.0 && eps_mp == 0.0 && eps_fs > 0.0)
    out.push_back("energy.d0 is unset and cannot be derived with energy.eps_mp = 0");
  return out;
}

double tx_energy(const RadioModel& model, std::int64_t bits, double d) {
  if (bits < 0 || d < 0.0) throw std::domain_error("tx_energy: negative input");
  const double b = static_cast<double>(bits);
  if (model.kind == RadioKind::TwoRegime) {
    if (d < model.effective_d0()) return b * model.e_elec + b * model.eps_fs * d * d;
    return b * model.e_elec + b * model.eps_mp * d * d * d * d;
  }
  const double amp = model.e_amp * d * d;
  return model.e_trans * b + (model.amp_per_bit ? b * amp : amp);
}

double rx_energy(const RadioModel& model, std::int64_t bits) {
  if (bits < 0) throw std::domain_error("rx_energy: negative input");
  const double b = static_cast<double>(bits);
  return model.kind == RadioKind::TwoRegime ? b * model.e_elec : b * model.e_recv;
}

EnergyLedger::EnergyLedger(double initial) : initial_(initial), alive_(initial > 0.0) {
  if (!(initial >= 0.0)) throw std::domain_error("EnergyLedger: negative initial energy");
}

bool EnergyLedger::charge(EnergyCategory category, double amount) {
  if (amount < 0.0) throw std::domain_error("EnergyLedger::charge: negative amount");
  if (!alive_) {
    if (ignored_charges_++ == 0)
      std::clog << "holesim: ignoring " << to_string(category) << " charge on a dead node\n";
    return false;
  }
  const double left = residual();
  double& slot = consumed_[static_cast<std::size_t>(category)];
  if (amount >= left) {
    slot += left;
    alive_ = false;
  } else {
    slot += amount;
  }
  return alive_;
}

double EnergyLedger::total_consumed() const {
  return std::accumulate(consumed_.begin(), consumed_.end(), 0.0);
}

double EnergyLedger::residual() const { return std::max(0.0, initial_ - total_consumed()); }

double zone_energy_ratio(double zone_residual, double cluster_residual) {
  if (zone_residual < 0.0 || cluster_residual < 0.0)
    throw std::domain_error("zone_energy_ratio: negative energy");
  if (zone_residual > cluster_residual)
    throw std::domain_error("zone_energy_ratio: zone exceeds cluster");
  if (cluster_residual == 0.0) return 0.0;
  return zone_residual / cluster_residual;
}

}  // namespace holesim
