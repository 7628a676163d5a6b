#pragma once

#include <cstdint>
#include <vector>

#include "qtraj/config.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

// One independent replica of the signed-particle realization of the series.
//
// Each particle follows a characteristic. At rate nu(q)/2 it emits a pair:
// s is drawn from |w(s, q)| / nu(q) and children of signs +-sign(w(s, q)) are
// placed at p + s and p - s. The parent continues unchanged. Periodically,
// opposite-sign particles sharing a phase-space cell cancel in pairs; the net
// signed count of every cell, and so the represented Wigner function at cell
// resolution, is preserved. All particles of a replica share one weight
// magnitude, raised whenever the population is thinned.
class SignedParticlePopulation {
 public:
  SignedParticlePopulation(const TrajectoryContext& context, std::int64_t initial_count, Rng rng);

  // Evolve from the current time to t, annihilating on the configured cadence.
  void advance(const TrajectoryContext& context, double t);
  void annihilate(const ScenarioConfig& config);
  // Keeps each particle with probability keep and divides the weight scale by it.
  void roulette(double keep);

  [[nodiscard]] std::int64_t initial_count() const noexcept { return initial_count_; }
  [[nodiscard]] std::size_t size() const noexcept { return q_.size(); }
  [[nodiscard]] double time() const noexcept { return time_; }
  // Magnitude of every particle's weight.
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] std::int64_t net_sign() const noexcept;
  [[nodiscard]] const RunDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  void append_samples(std::vector<WeightedSample>& out) const;

 private:
  void evolve(const TrajectoryContext& context, double duration);

  Rng rng_;
  std::int64_t initial_count_;
  double time_ = 0.0;
  double scale_ = 1.0;
  double last_annihilation_ = 0.0;
  std::vector<double> q_;
  std::vector<double> p_;
  std::vector<std::int8_t> sign_;
  // Absolute time of the next pair-emission attempt; stale when below the
  // current time (the attempt stream is memoryless, so it is simply redrawn).
  std::vector<double> next_;
  RunDiagnostics diagnostics_;
};

RunDiagnostics run_population_ensemble(const ScenarioConfig& config, const SnapshotSink& sink);

}  // namespace qtraj
