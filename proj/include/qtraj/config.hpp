#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qtraj/kernel.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

enum class Mode { kClassical, kQuantum };

// How the quantum series is sampled.
enum class Estimator {
  // Independent trajectories carrying signed, compensated weights.
  kWeighted,
  // Unit-weight signed particles: jumps create +/- particle pairs which are
  // annihilated cell by cell. Independent replicas supply error bars.
  kPopulation,
};

struct ScenarioConfig {
  std::string name = "custom";
  PacketSpec packet;
  BarrierSpec barrier;

  // time grid
  double t_final = 100.0;
  double dt = 0.05;
  int n_snapshots = 512;

  // Monte Carlo
  std::int64_t ensemble_size = 100000;
  std::uint64_t seed = 1;
  Mode mode = Mode::kQuantum;
  Estimator estimator = Estimator::kPopulation;
  Characteristics characteristics = Characteristics::kFreeStreaming;
  double jump_attempt_bias = 2.0;
  double epsilon_dprime = 1e-3;
  // Kernel support [d - w, d + w]; zero means four packet widths.
  double kernel_half_width = 0.0;
  int max_jumps = 64;
  int replicas = 4;
  double cell_dq = 0.25;
  double cell_dp = 0.05;
  double annihilation_interval = 0.25;
  // A replica larger than this multiple of its initial count is thinned by
  // Russian roulette back to half the limit.
  double population_limit = 24.0;
  int threads = 0;  // 0: OpenMP default

  // observables
  std::vector<double> detectors;
  double bandwidth = 0.5;
  // Transmitted region is q > transmission_boundary.
  double transmission_boundary = 0.0;
  std::vector<double> momentum_times;
  int momentum_bins = 201;
  double momentum_min = -3.0;
  double momentum_max = 3.0;

  // reference solver
  int oracle_points = 1 << 15;
  double oracle_half_domain = 400.0;
  double oracle_dt = 0.01;

  [[nodiscard]] double effective_half_width() const noexcept {
    return kernel_half_width > 0.0 ? kernel_half_width : 4.0 * packet.sigma_x;
  }
  [[nodiscard]] std::vector<double> snapshot_times() const;

  // Throws ValidationError naming the violated invariant.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

[[nodiscard]] std::string_view to_string(Mode mode) noexcept;
[[nodiscard]] std::string_view to_string(Estimator estimator) noexcept;
[[nodiscard]] std::string_view to_string(Characteristics characteristics) noexcept;
[[nodiscard]] Mode parse_mode(std::string_view text);
[[nodiscard]] Estimator parse_estimator(std::string_view text);
[[nodiscard]] Characteristics parse_characteristics(std::string_view text);

}  // namespace qtraj
