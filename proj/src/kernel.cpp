#include "qtraj/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

double amplitude(const BarrierSpec& barrier) noexcept {
  return 2.0 * barrier.v0 * barrier.sigma / std::sqrt(std::numbers::pi);
}

// Beyond this the Gaussian envelope is below exp(-81).
constexpr double kEnvelopeCutoff = 9.0;

}  // namespace

double omega_smooth(double s, double q, const BarrierSpec& barrier) noexcept {
  const double u = barrier.sigma * s;
  if (u * u > 700.0) return 0.0;
  return amplitude(barrier) * std::exp(-u * u) * std::sin(2.0 * s * (q - barrier.d));
}

double kernel_total_variation(double q, const BarrierSpec& barrier) {
  const double x = std::abs(q - barrier.d);
  if (x == 0.0 || barrier.v0 == 0.0) return 0.0;
  const double s_max = kEnvelopeCutoff / barrier.sigma;
  const double half_period = std::numbers::pi / (2.0 * x);
  const auto integrand = [&](double s) {
    const double u = barrier.sigma * s;
    return std::exp(-u * u) * std::abs(std::sin(2.0 * s * x));
  };
  using Rule = boost::math::quadrature::gauss<double, 20>;
  double sum = 0.0;
  for (double a = 0.0; a < s_max; a += half_period) {
    sum += Rule::integrate(integrand, a, std::min(a + half_period, s_max));
  }
  return 2.0 * amplitude(barrier) * sum;
}

RateTable::RateTable(const BarrierSpec& barrier, double half_width, int n_points)
    : q_min_(barrier.d - half_width) {
  if (!(half_width > 0.0)) throw ValidationError("kernel.half_width", "must be positive");
  if (n_points < 3) throw ValidationError("kernel.table_points", "need at least 3 nodes");
  step_ = 2.0 * half_width / (n_points - 1);
  nu_.resize(static_cast<std::size_t>(n_points));
  for (std::size_t i = 0; i < nu_.size(); ++i) {
    nu_[i] = kernel_total_variation(node(i), barrier);
  }
  // An odd node count puts a node on q = d, where nu vanishes exactly.
  if (n_points % 2 == 1) nu_[nu_.size() / 2] = 0.0;
  max_ = *std::max_element(nu_.begin(), nu_.end());
}

double RateTable::operator()(double q) const noexcept {
  const double t = (q - q_min_) / step_;
  if (!(t >= 0.0) || t > static_cast<double>(nu_.size() - 1)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(t), nu_.size() - 2);
  const double f = t - static_cast<double>(i);
  return nu_[i] + f * (nu_[i + 1] - nu_[i]);
}

double jump_rate(double q, const RateTable& table) noexcept { return table(q); }

JumpProposal sample_jump(double q, const BarrierSpec& barrier, Rng& rng) {
  const double x = q - barrier.d;
  if (x == 0.0 || barrier.v0 == 0.0) {
    throw ZeroRate("kernel vanishes identically at this position");
  }
  const double sigma = barrier.sigma;
  // Two exact rejection samplers for exp(-sigma^2 s^2) |sin(2 s x)|:
  //  - Gaussian proposal, acceptance |sin(2 s x)|; efficient away from d.
  //  - |s| exp(-sigma^2 s^2) proposal, acceptance |sin(2 s x)| / (2 |s x|);
  //    efficient near d where the Gaussian proposal would almost always fail.
  const bool near_center = std::abs(x) < 0.5 * std::sqrt(std::numbers::pi) * sigma;
  for (;;) {
    double s = 0.0;
    double accept = 0.0;
    if (near_center) {
      const double magnitude = std::sqrt(rng.exponential(1.0)) / sigma;
      s = rng.uniform() < 0.5 ? -magnitude : magnitude;
      const double arg = 2.0 * s * x;
      accept = arg == 0.0 ? 1.0 : std::abs(std::sin(arg) / arg);
    } else {
      s = rng.normal(0.0, 1.0 / (std::numbers::sqrt2 * sigma));
      accept = std::abs(std::sin(2.0 * s * x));
    }
    if (rng.uniform() < accept) {
      const double sine = std::sin(2.0 * s * x);
      if (sine == 0.0) continue;
      return {s, sine > 0.0 ? 1.0 : -1.0};
    }
  }
}

std::array<JumpProposal, 2> delta_prime_pair(double q, double epsilon,
                                             const BarrierSpec& barrier) noexcept {
  const double f = force(q, barrier);
  const double w = f / (2.0 * epsilon);
  return {JumpProposal{epsilon, -w}, JumpProposal{-epsilon, w}};
}

JumpKernel::JumpKernel(const BarrierSpec& barrier, Characteristics characteristics,
                       double half_width, double epsilon)
    : barrier_(barrier),
      characteristics_(characteristics),
      epsilon_(epsilon),
      table_(barrier, half_width) {
  max_rate_ = table_.max_rate();
  if (characteristics_ == Characteristics::kHamiltonian) {
    if (!(epsilon_ > 0.0)) throw ValidationError("epsilon_dprime", "must be positive");
    // max |F| = sqrt(2) V0 exp(-1/2) / sigma
    const double max_force = std::numbers::sqrt2 * barrier.v0 * std::exp(-0.5) / barrier.sigma;
    max_rate_ += max_force / epsilon_;
  }
}

double JumpKernel::rate(double q) const noexcept {
  const double nu = table_(q);
  if (characteristics_ == Characteristics::kFreeStreaming || !in_window(q)) return nu;
  return nu + std::abs(force(q, barrier_)) / epsilon_;
}

JumpProposal JumpKernel::sample(double q, Rng& rng) const {
  const double nu = table_(q);
  if (characteristics_ == Characteristics::kHamiltonian) {
    const double pair_mass = std::abs(force(q, barrier_)) / epsilon_;
    if (rng.uniform() * (nu + pair_mass) >= nu) {
      const auto pair = delta_prime_pair(q, epsilon_, barrier_);
      const JumpProposal& pick = pair[rng.uniform() < 0.5 ? 0 : 1];
      return {pick.s, pick.weight_factor > 0.0 ? 1.0 : -1.0};
    }
  }
  return sample_jump(q, barrier_, rng);
}

}  // namespace qtraj
