#include "qtraj/model.hpp"

#include <cmath>
#include <numbers>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

// exp() of very negative arguments returns 0 or a subnormal; both are treated
// as an exact zero so callers never see denormal arithmetic.
double gaussian_factor(double exponent) noexcept {
  if (exponent < -700.0) return 0.0;
  return std::exp(exponent);
}

}  // namespace

void PacketSpec::validate() const {
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) {
    throw ValidationError("packet.sigma_x", "must be positive and finite");
  }
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    throw ValidationError("packet.k0", "must be positive and finite");
  }
  if (!std::isfinite(x0)) throw ValidationError("packet.x0", "must be finite");
  if (std::abs(sigma_x * delta_k - 0.5) > 1e-12) {
    throw ValidationError("packet.delta_k", "sigma_x must equal 1/(2 delta_k)");
  }
}

void BarrierSpec::validate() const {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) {
    throw ValidationError("barrier.v0", "must be non-negative and finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("barrier.sigma", "must be positive and finite");
  }
  if (!std::isfinite(d)) throw ValidationError("barrier.d", "must be finite");
}

double potential(double q, const BarrierSpec& barrier) noexcept {
  const double u = (q - barrier.d) / barrier.sigma;
  return barrier.v0 * gaussian_factor(-u * u);
}

double force(double q, const BarrierSpec& barrier) noexcept {
  const double u = (q - barrier.d) / barrier.sigma;
  return 2.0 * barrier.v0 * u / barrier.sigma * gaussian_factor(-u * u);
}

double initial_wigner(double q, double p, const PacketSpec& packet) noexcept {
  const double dq = q - packet.x0;
  const double dp = p - packet.k0;
  const double s2 = packet.sigma_x * packet.sigma_x;
  return std::numbers::inv_pi *
         gaussian_factor(-dq * dq / (2.0 * s2) - 2.0 * s2 * dp * dp);
}

double initial_density(double x, const PacketSpec& packet) noexcept {
  const double dx = x - packet.x0;
  const double s2 = packet.sigma_x * packet.sigma_x;
  return gaussian_factor(-dx * dx / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
}

PhaseSpacePoint sample_initial(const PacketSpec& packet, Rng& rng) {
  const double q = rng.normal(packet.x0, packet.sigma_x);
  const double p = rng.normal(packet.k0, packet.delta_k);
  return {q, p};
}

}  // namespace qtraj
