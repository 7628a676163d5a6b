#pragma once

#include "qtraj/model.hpp"

namespace qtraj {

// One velocity-Verlet step with m = 1. A negative dt steps backwards in time.
[[nodiscard]] PhaseSpacePoint step(PhaseSpacePoint point, double dt, const BarrierSpec& barrier);

// Integrates Hamilton's equations over `duration` using ceil(|duration|/dt) - 1
// full steps plus one final fractional step. A negative duration integrates
// backwards.
[[nodiscard]] PhaseSpacePoint propagate(PhaseSpacePoint point, double duration, double dt,
                                        const BarrierSpec& barrier);

// Force-free flight.
[[nodiscard]] inline PhaseSpacePoint free_flight(PhaseSpacePoint point, double duration) noexcept {
  return {point.q + point.p * duration, point.p};
}

[[nodiscard]] double energy(PhaseSpacePoint point, const BarrierSpec& barrier) noexcept;

}  // namespace qtraj
