#include "qtraj/trajectory.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "qtraj/dynamics.hpp"
#include "qtraj/population.hpp"

namespace qtraj {

TrajectoryContext::TrajectoryContext(const ScenarioConfig& config)
    : config_(config),
      kernel_(config.barrier, config.characteristics, config.effective_half_width(),
              config.epsilon_dprime),
      quantum_(config.mode == Mode::kQuantum && config.barrier.v0 > 0.0) {
  config_.validate();
  if (quantum_) attempt_rate_ = config.jump_attempt_bias * kernel_.max_rate();
  if (!(attempt_rate_ > 0.0)) quantum_ = false;
}

PhaseSpacePoint TrajectoryContext::flow(PhaseSpacePoint point, double duration) const {
  if (duration <= 0.0) return point;
  if (quantum_ && config_.characteristics == Characteristics::kFreeStreaming) {
    return free_flight(point, duration);
  }
  return propagate(point, duration, config_.dt, config_.barrier);
}

TrajectoryWalker::TrajectoryWalker(const TrajectoryContext& context, Rng rng) : rng_(rng) {
  point_ = sample_initial(context.config().packet, rng_);
  if (context.quantum()) next_attempt_ = rng_.exponential(context.attempt_rate());
}

void TrajectoryWalker::advance(const TrajectoryContext& context, double t,
                               std::vector<Jump>* record) {
  while (next_attempt_ <= t) {
    point_ = context.flow(point_, next_attempt_ - time_);
    time_ = next_attempt_;
    attempt(context, record);
    next_attempt_ = capped_ ? std::numeric_limits<double>::infinity()
                            : time_ + rng_.exponential(context.attempt_rate());
  }
  point_ = context.flow(point_, t - time_);
  time_ = t;
}

void TrajectoryWalker::attempt(const TrajectoryContext& context, std::vector<Jump>* record) {
  ++attempts_;
  const double accept = context.kernel().rate(point_.q) / context.attempt_rate();
  if (rng_.uniform() < accept) {
    if (jumps_ >= context.config().max_jumps) {
      capped_ = true;
      return;
    }
    const JumpProposal jump = context.kernel().sample(point_.q, rng_);
    point_.p += jump.s;
    weight_ *= jump.weight_factor;
    ++jumps_;
    if (record != nullptr) record->push_back({time_, jump.s});
  } else {
    weight_ /= 1.0 - accept;
  }
}

QuantumTrajectory generate_trajectory(const TrajectoryContext& context, Rng rng) {
  QuantumTrajectory trajectory;
  TrajectoryWalker walker(context, rng);
  for (double t : context.config().snapshot_times()) {
    walker.advance(context, t, &trajectory.jumps);
    trajectory.snapshots.push_back({t, walker.point(), walker.weight()});
  }
  trajectory.weight = walker.weight();
  trajectory.attempts = walker.attempts();
  trajectory.hit_jump_cap = walker.capped();
  return trajectory;
}

QuantumTrajectory generate_trajectory(const ScenarioConfig& config, Rng rng) {
  return generate_trajectory(TrajectoryContext(config), rng);
}

namespace {

class ThreadScope {
 public:
  explicit ThreadScope(int threads) : previous_(omp_get_max_threads()) {
    if (threads > 0) omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(previous_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int previous_;
};

}  // namespace

RunDiagnostics run_weighted_ensemble(const ScenarioConfig& config, const SnapshotSink& sink) {
  const TrajectoryContext context(config);
  const ThreadScope threads(config.threads);
  const auto n = static_cast<std::size_t>(config.ensemble_size);

  std::vector<TrajectoryWalker> walkers;
  walkers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    walkers.emplace_back(context, Rng::substream(config.seed, i));
  }

  EnsembleSnapshot snapshot;
  snapshot.samples.resize(n);
  snapshot.group_offsets.resize(n + 1);
  snapshot.group_sizes.assign(n, 1);
  snapshot.n_trajectories = static_cast<std::int64_t>(n);
  for (std::size_t i = 0; i <= n; ++i) snapshot.group_offsets[i] = i;

  const auto count = static_cast<std::int64_t>(n);
  for (double t : config.snapshot_times()) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      auto& walker = walkers[static_cast<std::size_t>(i)];
      walker.advance(context, t);
      const PhaseSpacePoint x = walker.point();
      snapshot.samples[static_cast<std::size_t>(i)] = {x.q, x.p, walker.weight()};
    }
    snapshot.time = t;
    sink(snapshot);
  }

  RunDiagnostics diagnostics;
  for (const auto& walker : walkers) {
    diagnostics.jumps += walker.jumps();
    diagnostics.attempts += walker.attempts();
    diagnostics.cap_hits += walker.capped() ? 1 : 0;
  }
  diagnostics.peak_particles = count;
  return diagnostics;
}

RunDiagnostics run_ensemble(const ScenarioConfig& config, const SnapshotSink& sink) {
  config.validate();
  if (config.mode == Mode::kQuantum && config.estimator == Estimator::kPopulation &&
      config.barrier.v0 > 0.0) {
    const ThreadScope threads(config.threads);
    return run_population_ensemble(config, sink);
  }
  return run_weighted_ensemble(config, sink);
}

std::vector<EnsembleSnapshot> run_ensemble(const ScenarioConfig& config,
                                           RunDiagnostics* diagnostics) {
  std::vector<EnsembleSnapshot> snapshots;
  const auto result =
      run_ensemble(config, [&](const EnsembleSnapshot& s) { snapshots.push_back(s); });
  if (diagnostics != nullptr) *diagnostics = result;
  return snapshots;
}

}  // namespace qtraj
