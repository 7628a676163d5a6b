#pragma once

#include "qtraj/random.hpp"

namespace qtraj {

struct PhaseSpacePoint {
  double q = 0.0;
  double p = 0.0;

  friend bool operator==(const PhaseSpacePoint&, const PhaseSpacePoint&) = default;
};

// Minimum-uncertainty Gaussian packet: sigma_x * delta_k = 1/2.
struct PacketSpec {
  double x0 = 0.0;
  double k0 = 1.0;
  double sigma_x = 1.0;
  double delta_k = 0.5;

  static PacketSpec from_width(double x0, double k0, double sigma_x) {
    return {x0, k0, sigma_x, 1.0 / (2.0 * sigma_x)};
  }
  static PacketSpec from_spread(double x0, double k0, double delta_k) {
    return {x0, k0, 1.0 / (2.0 * delta_k), delta_k};
  }

  void validate() const;

  friend bool operator==(const PacketSpec&, const PacketSpec&) = default;
};

// V(q) = v0 exp(-(q - d)^2 / sigma^2)
struct BarrierSpec {
  double v0 = 1.0;
  double d = 0.0;
  double sigma = 1.0;

  void validate() const;

  friend bool operator==(const BarrierSpec&, const BarrierSpec&) = default;
};

[[nodiscard]] double potential(double q, const BarrierSpec& barrier) noexcept;

// F = -dV/dq
[[nodiscard]] double force(double q, const BarrierSpec& barrier) noexcept;

// Wigner function of the initial packet, normalized to unit phase-space integral.
[[nodiscard]] double initial_wigner(double q, double p, const PacketSpec& packet) noexcept;

// |psi(x, 0)|^2
[[nodiscard]] double initial_density(double x, const PacketSpec& packet) noexcept;

// Exact draw from initial_wigner: independent Gaussians in q and p.
[[nodiscard]] PhaseSpacePoint sample_initial(const PacketSpec& packet, Rng& rng);

}  // namespace qtraj
