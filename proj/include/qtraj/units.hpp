#pragma once

#include <string_view>

namespace qtraj {

// CODATA 2018 exact / recommended values.
namespace codata {
inline constexpr double kHbar = 1.054571817e-34;           // J s
inline constexpr double kElectronMass = 9.1093837015e-31;  // kg
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C (J per eV)
}  // namespace codata

enum class QuantityKind { kLength, kTime, kEnergy, kMomentum };

[[nodiscard]] QuantityKind parse_quantity_kind(std::string_view name);

// Natural units hbar = m = V0 = 1. Lengths come out in units of hbar/sqrt(m V0),
// which equals 1/k0 when the kinetic energy is V0/2.
//
// Physical values are reported in nm (length), fs (time), eV (energy) and
// nm^-1 (momentum, expressed as a wavenumber p/hbar).
class UnitSystem {
 public:
  // Defaults: free electron, V0 = 0.3 eV.
  UnitSystem() : UnitSystem(0.3, codata::kElectronMass) {}
  UnitSystem(double energy_unit_ev, double mass_kg);

  static constexpr double hbar = 1.0;
  static constexpr double mass = 1.0;
  static constexpr double v0 = 1.0;

  [[nodiscard]] double length_unit_nm() const noexcept { return length_nm_; }
  [[nodiscard]] double time_unit_fs() const noexcept { return time_fs_; }
  [[nodiscard]] double energy_unit_ev() const noexcept { return energy_ev_; }
  [[nodiscard]] double momentum_unit_per_nm() const noexcept { return 1.0 / length_nm_; }

  [[nodiscard]] double scale(QuantityKind kind) const noexcept;

 private:
  double energy_ev_;
  double length_nm_;
  double time_fs_;
};

// Natural -> physical (nm, fs, eV, nm^-1).
[[nodiscard]] double convert(double value, QuantityKind kind, const UnitSystem& units);
// Physical -> natural.
[[nodiscard]] double convert_back(double value, QuantityKind kind, const UnitSystem& units);

}  // namespace qtraj
