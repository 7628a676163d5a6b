#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qtraj/config.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/kernel.hpp"
#include "qtraj/model.hpp"
#include "qtraj/random.hpp"

namespace qtraj {

struct Jump {
  double time = 0.0;
  double s = 0.0;
};

struct TrajectorySnapshot {
  double time = 0.0;
  PhaseSpacePoint point;
  double weight = 1.0;
};

// One sampled term of the iterational series: a classical characteristic
// interrupted by momentum jumps, with the weight accumulated along the way.
struct QuantumTrajectory {
  std::vector<Jump> jumps;
  double weight = 1.0;
  std::vector<TrajectorySnapshot> snapshots;
  std::int64_t attempts = 0;
  bool hit_jump_cap = false;
};

struct RunDiagnostics {
  std::int64_t jumps = 0;
  std::int64_t attempts = 0;
  std::int64_t cap_hits = 0;
  std::int64_t peak_particles = 0;
  std::int64_t annihilated = 0;
  std::int64_t roulette_rounds = 0;
};

// Everything a trajectory needs that does not change during a run.
class TrajectoryContext {
 public:
  explicit TrajectoryContext(const ScenarioConfig& config);

  [[nodiscard]] const ScenarioConfig& config() const noexcept { return config_; }
  [[nodiscard]] const JumpKernel& kernel() const noexcept { return kernel_; }
  // Poisson intensity of jump attempts (a global majorant of the jump rate).
  [[nodiscard]] double attempt_rate() const noexcept { return attempt_rate_; }
  [[nodiscard]] bool quantum() const noexcept { return quantum_; }

  // Characteristic flow between jumps.
  [[nodiscard]] PhaseSpacePoint flow(PhaseSpacePoint point, double duration) const;

 private:
  ScenarioConfig config_;
  JumpKernel kernel_;
  double attempt_rate_ = 0.0;
  bool quantum_ = false;
};

// Resumable state of one weighted trajectory.
//
// Attempts arrive as a Poisson stream of intensity L. At an attempt at q a jump
// is accepted with probability C = nu(q) / L and multiplies the weight by the
// sign of the kernel; a rejection (probability B = 1 - C) multiplies it by the
// compensating factor 1 / B. The estimator is then unbiased for the full series.
class TrajectoryWalker {
 public:
  TrajectoryWalker(const TrajectoryContext& context, Rng rng);

  // Advance to absolute time t (>= current time).
  void advance(const TrajectoryContext& context, double t, std::vector<Jump>* record = nullptr);

  [[nodiscard]] PhaseSpacePoint point() const noexcept { return point_; }
  [[nodiscard]] double weight() const noexcept { return weight_; }
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] int jumps() const noexcept { return jumps_; }
  [[nodiscard]] std::int64_t attempts() const noexcept { return attempts_; }
  [[nodiscard]] bool capped() const noexcept { return capped_; }

 private:
  void attempt(const TrajectoryContext& context, std::vector<Jump>* record);

  Rng rng_;
  PhaseSpacePoint point_;
  double weight_ = 1.0;
  double time_ = 0.0;
  double next_attempt_ = std::numeric_limits<double>::infinity();
  int jumps_ = 0;
  std::int64_t attempts_ = 0;
  bool capped_ = false;
};

[[nodiscard]] QuantumTrajectory generate_trajectory(const ScenarioConfig& config, Rng rng);
[[nodiscard]] QuantumTrajectory generate_trajectory(const TrajectoryContext& context, Rng rng);

using SnapshotSink = std::function<void(const EnsembleSnapshot&)>;

// Streams one snapshot per configured time to `sink`, in time order.
// Deterministic for a fixed seed regardless of thread count.
RunDiagnostics run_ensemble(const ScenarioConfig& config, const SnapshotSink& sink);

// Convenience wrapper that keeps every snapshot; for small ensembles.
[[nodiscard]] std::vector<EnsembleSnapshot> run_ensemble(const ScenarioConfig& config,
                                                         RunDiagnostics* diagnostics = nullptr);

// Weighted-trajectory estimator (also used for classical mode).
RunDiagnostics run_weighted_ensemble(const ScenarioConfig& config, const SnapshotSink& sink);

}  // namespace qtraj
