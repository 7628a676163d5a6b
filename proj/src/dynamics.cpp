#include "qtraj/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace qtraj {

PhaseSpacePoint step(PhaseSpacePoint point, double dt, const BarrierSpec& barrier) {
  const double p_half = point.p + 0.5 * dt * force(point.q, barrier);
  const double q_new = point.q + dt * p_half;
  const double p_new = p_half + 0.5 * dt * force(q_new, barrier);
  return {q_new, p_new};
}

PhaseSpacePoint propagate(PhaseSpacePoint point, double duration, double dt,
                          const BarrierSpec& barrier) {
  if (duration == 0.0) return point;
  const double h = std::abs(dt);
  const double direction = duration < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(duration);
  if (barrier.v0 == 0.0) return free_flight(point, duration);
  // Tolerate representation error so that e.g. 85.2 / 0.05 counts as 1704 steps.
  const auto substeps = static_cast<long>(std::max(1.0, std::ceil(span / h - 1e-9)));
  for (long i = 0; i + 1 < substeps; ++i) point = step(point, direction * h, barrier);
  const double last = span - static_cast<double>(substeps - 1) * h;
  return step(point, direction * last, barrier);
}

double energy(PhaseSpacePoint point, const BarrierSpec& barrier) noexcept {
  return 0.5 * point.p * point.p + potential(point.q, barrier);
}

}  // namespace qtraj
