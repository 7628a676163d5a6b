#include "qtraj/population.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <utility>

#include "qtraj/dynamics.hpp"

namespace qtraj {

SignedParticlePopulation::SignedParticlePopulation(const TrajectoryContext& context,
                                                   std::int64_t initial_count, Rng rng)
    : rng_(rng), initial_count_(initial_count) {
  const auto n = static_cast<std::size_t>(initial_count);
  q_.reserve(n);
  p_.reserve(n);
  sign_.assign(n, 1);
  next_.assign(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const PhaseSpacePoint x = sample_initial(context.config().packet, rng_);
    q_.push_back(x.q);
    p_.push_back(x.p);
  }
  diagnostics_.peak_particles = initial_count;
}

std::int64_t SignedParticlePopulation::net_sign() const noexcept {
  std::int64_t net = 0;
  for (auto s : sign_) net += s;
  return net;
}

void SignedParticlePopulation::append_samples(std::vector<WeightedSample>& out) const {
  for (std::size_t i = 0; i < q_.size(); ++i) {
    out.push_back({q_[i], p_[i], scale_ * sign_[i]});
  }
}

void SignedParticlePopulation::advance(const TrajectoryContext& context, double t) {
  const ScenarioConfig& config = context.config();
  while (time_ < t) {
    const double next_annihilation = last_annihilation_ + config.annihilation_interval;
    const double end = std::min(t, next_annihilation);
    evolve(context, end - time_);
    time_ = end;
    if (time_ >= next_annihilation) {
      annihilate(config);
      last_annihilation_ = next_annihilation;
      const double limit = config.population_limit * static_cast<double>(initial_count_);
      if (static_cast<double>(q_.size()) > limit) {
        roulette(0.5 * limit / static_cast<double>(q_.size()));
      }
    }
  }
}

namespace {

// Whether a free flight of the given duration from x meets the kernel support.
bool crosses_window(const JumpKernel& kernel, PhaseSpacePoint x, double duration) {
  const double end = x.q + x.p * duration;
  const double lo = std::min(x.q, end);
  const double hi = std::max(x.q, end);
  return hi >= kernel.table().lower() && lo <= kernel.table().upper();
}

}  // namespace

void SignedParticlePopulation::evolve(const TrajectoryContext& context, double duration) {
  if (duration <= 0.0) return;
  const JumpKernel& kernel = context.kernel();
  const double max_rate = kernel.max_rate();
  // Pair emission rate is half the kernel total variation.
  const double event_rate = 0.5 * max_rate;
  const bool free_streaming = kernel.characteristics() == Characteristics::kFreeStreaming;
  const double t0 = time_;
  const double t1 = time_ + duration;
  const std::size_t parents = q_.size();
  std::vector<double> birth;  // absolute birth times of children appended here
  constexpr double kStale = -std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < q_.size(); ++i) {
    double tau = i < parents ? t0 : birth[i - parents];
    PhaseSpacePoint x{q_[i], p_[i]};
    if (free_streaming && !crosses_window(kernel, x, t1 - tau)) {
      x = free_flight(x, t1 - tau);
      q_[i] = x.q;
      p_[i] = x.p;
      next_[i] = kStale;
      continue;
    }
    const std::int8_t sign = sign_[i];
    double event = next_[i];
    if (event < tau) event = event_rate > 0.0 ? tau + rng_.exponential(event_rate) : t1;
    while (event < t1) {
      x = context.flow(x, event - tau);
      tau = event;
      event += rng_.exponential(event_rate);
      if (rng_.uniform() * max_rate >= kernel.rate(x.q)) continue;
      const JumpProposal jump = kernel.sample(x.q, rng_);
      const auto child = static_cast<std::int8_t>(jump.weight_factor > 0.0 ? sign : -sign);
      for (const auto& [dp, s] : {std::pair{jump.s, child}, std::pair{-jump.s, static_cast<std::int8_t>(-child)}}) {
        q_.push_back(x.q);
        p_.push_back(x.p + dp);
        sign_.push_back(s);
        next_.push_back(kStale);
        birth.push_back(tau);
      }
      ++diagnostics_.jumps;
    }
    x = context.flow(x, t1 - tau);
    q_[i] = x.q;
    p_[i] = x.p;
    next_[i] = event;
  }
  diagnostics_.peak_particles =
      std::max(diagnostics_.peak_particles, static_cast<std::int64_t>(q_.size()));
}

void SignedParticlePopulation::annihilate(const ScenarioConfig& config) {
  const std::size_t n = q_.size();
  if (n == 0) return;
  const auto [q_lo, q_hi] = std::minmax_element(q_.begin(), q_.end());
  const auto [p_lo, p_hi] = std::minmax_element(p_.begin(), p_.end());
  const double q0 = *q_lo;
  const double p0 = *p_lo;
  const auto nq = static_cast<std::int64_t>((*q_hi - q0) / config.cell_dq) + 1;
  const auto np = static_cast<std::int64_t>((*p_hi - p0) / config.cell_dp) + 1;

  std::vector<std::int64_t> cell(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto iq = static_cast<std::int64_t>((q_[i] - q0) / config.cell_dq);
    const auto ip = static_cast<std::int64_t>((p_[i] - p0) / config.cell_dp);
    cell[i] = iq * np + ip;
  }

  // Net signed count per occupied cell, then keep the first |net| particles of
  // the majority sign in index order.
  std::vector<std::int32_t> net;
  std::vector<std::int32_t> kept;
  std::vector<std::int64_t> slot(n);
  constexpr std::int64_t kDenseLimit = std::int64_t{1} << 25;
  if (nq * np <= kDenseLimit) {
    net.assign(static_cast<std::size_t>(nq * np), 0);
    for (std::size_t i = 0; i < n; ++i) {
      slot[i] = cell[i];
      net[static_cast<std::size_t>(cell[i])] += sign_[i];
    }
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cell[a] < cell[b]; });
    std::int64_t current = -1;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = order[k];
      if (k == 0 || cell[i] != cell[order[k - 1]]) {
        net.push_back(0);
        ++current;
      }
      slot[i] = current;
      net[static_cast<std::size_t>(current)] += sign_[i];
    }
  }
  kept.assign(net.size(), 0);

  std::size_t out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(slot[i]);
    const std::int32_t m = net[c];
    if (m == 0 || (m > 0) != (sign_[i] > 0) || kept[c] >= std::abs(m)) continue;
    ++kept[c];
    q_[out] = q_[i];
    p_[out] = p_[i];
    sign_[out] = sign_[i];
    next_[out] = next_[i];
    ++out;
  }
  diagnostics_.annihilated += static_cast<std::int64_t>(n - out);
  q_.resize(out);
  p_.resize(out);
  sign_.resize(out);
  next_.resize(out);
}

void SignedParticlePopulation::roulette(double keep) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (rng_.uniform() >= keep) continue;
    q_[out] = q_[i];
    p_[out] = p_[i];
    sign_[out] = sign_[i];
    next_[out] = next_[i];
    ++out;
  }
  q_.resize(out);
  p_.resize(out);
  sign_.resize(out);
  next_.resize(out);
  scale_ /= keep;
  ++diagnostics_.roulette_rounds;
}

RunDiagnostics run_population_ensemble(const ScenarioConfig& config, const SnapshotSink& sink) {
  const TrajectoryContext context(config);
  const int replicas = config.replicas;
  std::vector<SignedParticlePopulation> populations;
  populations.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    // Spread the ensemble as evenly as possible over the replicas.
    const std::int64_t base = config.ensemble_size / replicas;
    const std::int64_t extra = r < config.ensemble_size % replicas ? 1 : 0;
    populations.emplace_back(context, base + extra,
                             Rng::substream(config.seed, static_cast<std::uint64_t>(r)));
  }

  EnsembleSnapshot snapshot;
  for (double t : config.snapshot_times()) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < replicas; ++r) populations[static_cast<std::size_t>(r)].advance(context, t);
    snapshot.time = t;
    snapshot.samples.clear();
    snapshot.group_offsets.assign(1, 0);
    snapshot.group_sizes.clear();
    snapshot.n_trajectories = 0;
    for (const auto& population : populations) {
      population.append_samples(snapshot.samples);
      snapshot.group_offsets.push_back(snapshot.samples.size());
      snapshot.group_sizes.push_back(population.initial_count());
      snapshot.n_trajectories += population.initial_count();
    }
    sink(snapshot);
  }

  RunDiagnostics total;
  for (const auto& population : populations) {
    const auto& d = population.diagnostics();
    total.jumps += d.jumps;
    total.peak_particles += d.peak_particles;
    total.annihilated += d.annihilated;
    total.roulette_rounds += d.roulette_rounds;
  }
  return total;
}

}  // namespace qtraj
