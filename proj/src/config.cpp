#include "qtraj/config.hpp"

#include <cmath>

#include "qtraj/error.hpp"

namespace qtraj {

std::vector<double> ScenarioConfig::snapshot_times() const {
  std::vector<double> times(static_cast<std::size_t>(n_snapshots));
  if (n_snapshots == 1) {
    times[0] = t_final;
    return times;
  }
  for (int i = 0; i < n_snapshots; ++i) {
    times[static_cast<std::size_t>(i)] = t_final * i / (n_snapshots - 1);
  }
  return times;
}

void ScenarioConfig::validate() const {
  packet.validate();
  barrier.validate();
  const auto require = [](bool ok, const char* invariant, const char* message) {
    if (!ok) throw ValidationError(invariant, message);
  };
  require(std::isfinite(dt) && dt > 0.0, "numerics.dt", "must be positive");
  require(std::isfinite(t_final) && t_final > 0.0, "numerics.t_final", "must be positive");
  require(n_snapshots >= 2, "numerics.n_snapshots", "need at least 2 snapshots");
  require(ensemble_size >= 1, "numerics.ensemble_size", "must be at least 1");
  require(std::isfinite(bandwidth) && bandwidth > 0.0, "observables.bandwidth",
          "must be positive");
  require(std::isfinite(epsilon_dprime) && epsilon_dprime > 0.0, "numerics.epsilon_dprime",
          "must be positive");
  // Rejected attempts are compensated by 1 / (1 - nu / rate); the attempt rate
  // must strictly dominate nu.
  require(std::isfinite(jump_attempt_bias) && jump_attempt_bias > 1.0,
          "numerics.jump_attempt_bias", "must exceed 1");
  require(kernel_half_width >= 0.0, "numerics.kernel_half_width", "must be non-negative");
  require(max_jumps >= 0, "numerics.max_jumps", "must be non-negative");
  require(replicas >= 2, "numerics.replicas", "need at least 2 replicas for error bars");
  require(estimator != Estimator::kPopulation || mode != Mode::kQuantum || ensemble_size >= replicas,
          "numerics.ensemble_size", "must be at least the replica count");
  require(cell_dq > 0.0 && cell_dp > 0.0, "numerics.cell", "annihilation cells must be positive");
  require(annihilation_interval > 0.0, "numerics.annihilation_interval", "must be positive");
  require(population_limit >= 2.0, "numerics.population_limit", "must be at least 2");
  require(threads >= 0, "numerics.threads", "must be non-negative");
  for (double x : detectors) {
    require(std::isfinite(x), "detectors", "positions must be finite");
  }
  require(std::isfinite(transmission_boundary), "observables.transmission_boundary",
          "must be finite");
  for (double t : momentum_times) {
    require(std::isfinite(t) && t >= 0.0 && t <= t_final, "observables.momentum_times",
            "must lie in [0, t_final]");
  }
  require(momentum_bins >= 1, "observables.momentum_bins", "must be positive");
  require(momentum_min < momentum_max, "observables.momentum_range", "min must be below max");
  require(oracle_points >= 16 && (oracle_points & (oracle_points - 1)) == 0,
          "oracle.points", "must be a power of two");
  require(oracle_half_domain > 0.0, "oracle.half_domain", "must be positive");
  require(oracle_dt > 0.0, "oracle.dt", "must be positive");
}

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::kClassical ? "classical" : "quantum";
}

std::string_view to_string(Estimator estimator) noexcept {
  return estimator == Estimator::kWeighted ? "weighted" : "population";
}

std::string_view to_string(Characteristics characteristics) noexcept {
  return characteristics == Characteristics::kHamiltonian ? "hamiltonian" : "free";
}

Mode parse_mode(std::string_view text) {
  if (text == "classical") return Mode::kClassical;
  if (text == "quantum") return Mode::kQuantum;
  throw ValidationError("mode", "expected classical or quantum");
}

Estimator parse_estimator(std::string_view text) {
  if (text == "weighted") return Estimator::kWeighted;
  if (text == "population") return Estimator::kPopulation;
  throw ValidationError("numerics.estimator", "expected weighted or population");
}

Characteristics parse_characteristics(std::string_view text) {
  if (text == "free") return Characteristics::kFreeStreaming;
  if (text == "hamiltonian") return Characteristics::kHamiltonian;
  throw ValidationError("numerics.characteristics", "expected free or hamiltonian");
}

}  // namespace qtraj
