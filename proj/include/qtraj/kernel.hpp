#pragma once

#include <array>
#include <vector>

#include "qtraj/model.hpp"
#include "qtraj/random.hpp"

namespace qtraj {

// Smooth part of the momentum-transfer kernel for the Gaussian barrier:
//
//   w(s, q) = 2 V0 sigma / sqrt(pi) * exp(-sigma^2 s^2) * sin(2 s (q - d))
//
// Odd in s. Acting on W by convolution in p it reproduces the full potential
// term of the Wigner equation, the classical force included.
[[nodiscard]] double omega_smooth(double s, double q, const BarrierSpec& barrier) noexcept;

// nu(q) = integral |w(s, q)| ds, by Gauss-Legendre quadrature between the
// zeros of sin(2 s (q - d)). Tends to 4 V0 / pi far from the barrier.
[[nodiscard]] double kernel_total_variation(double q, const BarrierSpec& barrier);

// A single momentum transfer drawn from the kernel.
struct JumpProposal {
  double s = 0.0;
  double weight_factor = 0.0;
};

// Tabulated nu(q) on a uniform grid over [d - half_width, d + half_width], the
// support of the (coherence-truncated) kernel. Zero outside.
class RateTable {
 public:
  static constexpr int kDefaultPoints = 2049;

  RateTable(const BarrierSpec& barrier, double half_width, int n_points = kDefaultPoints);

  [[nodiscard]] double operator()(double q) const noexcept;
  [[nodiscard]] double max_rate() const noexcept { return max_; }
  [[nodiscard]] double lower() const noexcept { return q_min_; }
  [[nodiscard]] double upper() const noexcept { return q_min_ + step_ * (nu_.size() - 1); }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return nu_; }
  [[nodiscard]] double node(std::size_t i) const noexcept { return q_min_ + step_ * i; }

 private:
  double q_min_;
  double step_;
  double max_ = 0.0;
  std::vector<double> nu_;
};

[[nodiscard]] double jump_rate(double q, const RateTable& table) noexcept;

// Draws s from |w(s, q)| / nu(q) by exact rejection sampling; weight_factor is
// sign(w(s, q)). Throws ZeroRate where the kernel vanishes identically.
[[nodiscard]] JumpProposal sample_jump(double q, const BarrierSpec& barrier, Rng& rng);

// Central-difference regularization of F(q) delta'(s): the measure
// -F/(2 eps) at s = +eps and +F/(2 eps) at s = -eps.
[[nodiscard]] std::array<JumpProposal, 2> delta_prime_pair(double q, double epsilon,
                                                           const BarrierSpec& barrier) noexcept;

enum class Characteristics {
  // Trajectories feel no force; every potential effect comes through jumps
  // drawn from the smooth kernel.
  kFreeStreaming,
  // Trajectories follow Hamilton's equations; jumps come from the smooth kernel
  // plus the regularized F delta' pair that cancels the force it double counts.
  kHamiltonian,
};

// The jump measure seen by a trajectory at position q, restricted to the window.
class JumpKernel {
 public:
  JumpKernel(const BarrierSpec& barrier, Characteristics characteristics, double half_width,
             double epsilon);

  // Total variation of the jump measure at q.
  [[nodiscard]] double rate(double q) const noexcept;
  [[nodiscard]] double max_rate() const noexcept { return max_rate_; }
  // Draw (s, sign) with probability |measure| / rate(q).
  [[nodiscard]] JumpProposal sample(double q, Rng& rng) const;

  [[nodiscard]] const RateTable& table() const noexcept { return table_; }
  [[nodiscard]] Characteristics characteristics() const noexcept { return characteristics_; }
  [[nodiscard]] bool in_window(double q) const noexcept {
    return q >= table_.lower() && q <= table_.upper();
  }

 private:
  BarrierSpec barrier_;
  Characteristics characteristics_;
  double epsilon_;
  RateTable table_;
  double max_rate_ = 0.0;
};

}  // namespace qtraj
