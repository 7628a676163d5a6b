#include "qtraj/units.hpp"

#include <cmath>
#include <string>

#include "qtraj/error.hpp"

namespace qtraj {

QuantityKind parse_quantity_kind(std::string_view name) {
  if (name == "length") return QuantityKind::kLength;
  if (name == "time") return QuantityKind::kTime;
  if (name == "energy") return QuantityKind::kEnergy;
  if (name == "momentum") return QuantityKind::kMomentum;
  throw ValidationError("quantity_kind", "unrecognized kind '" + std::string(name) + "'");
}

UnitSystem::UnitSystem(double energy_unit_ev, double mass_kg) : energy_ev_(energy_unit_ev) {
  if (!(energy_unit_ev > 0.0) || !(mass_kg > 0.0)) {
    throw ValidationError("units", "energy unit and mass must be positive");
  }
  const double energy_j = energy_unit_ev * codata::kElementaryCharge;
  const double time_s = codata::kHbar / energy_j;
  const double length_m = codata::kHbar / std::sqrt(mass_kg * energy_j);
  time_fs_ = time_s * 1e15;
  length_nm_ = length_m * 1e9;

  // E * t = hbar and m * L^2 / t^2 = E must both hold.
  const double action = energy_j * time_s;
  const double kinetic = mass_kg * length_m * length_m / (time_s * time_s);
  if (std::abs(action / codata::kHbar - 1.0) > 1e-12 ||
      std::abs(kinetic / energy_j - 1.0) > 1e-12) {
    throw ValidationError("units", "inconsistent natural unit system");
  }
}

double UnitSystem::scale(QuantityKind kind) const noexcept {
  switch (kind) {
    case QuantityKind::kLength: return length_nm_;
    case QuantityKind::kTime: return time_fs_;
    case QuantityKind::kEnergy: return energy_ev_;
    case QuantityKind::kMomentum: return 1.0 / length_nm_;
  }
  return 1.0;
}

double convert(double value, QuantityKind kind, const UnitSystem& units) {
  return value * units.scale(kind);
}

double convert_back(double value, QuantityKind kind, const UnitSystem& units) {
  return value / units.scale(kind);
}

}  // namespace qtraj
