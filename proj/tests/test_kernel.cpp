#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qtraj/kernel.hpp"
#include "qtraj/random.hpp"
#include "support.hpp"

using namespace qtraj;
using boost::math::quadrature::gauss_kronrod;

namespace {

const BarrierSpec kWide{1.0, 0.0, 5.0};
const BarrierSpec kNarrow{1.0, 0.0, 1.0};

// (2 / pi) * integral V(q - y) sin(2 s y) dy, by adaptive quadrature.
double kernel_by_quadrature(double s, double q, const BarrierSpec& b) {
  const double centre = q - b.d;
  const double reach = 12.0 * b.sigma;
  const auto f = [&](double y) { return potential(q - y, b) * std::sin(2.0 * s * y); };
  double sum = 0.0;
  const int pieces = 8;
  for (int i = 0; i < pieces; ++i) {
    const double a = centre - reach + 2.0 * reach * i / pieces;
    const double c = centre - reach + 2.0 * reach * (i + 1) / pieces;
    sum += gauss_kronrod<double, 61>::integrate(f, a, c, 10, 1e-12);
  }
  return 2.0 / std::numbers::pi * sum;
}

// Integral of |w(s, q)| over s, split at the zeros of the sine.
double nu_by_quadrature(double q, const BarrierSpec& b) {
  const double x = std::abs(q - b.d);
  if (x == 0.0) return 0.0;
  const double half_period = std::numbers::pi / (2.0 * x);
  const double s_max = 10.0 / b.sigma;
  double sum = 0.0;
  for (double a = 0.0; a < s_max; a += half_period) {
    sum += gauss_kronrod<double, 31>::integrate(
        [&](double s) { return std::abs(omega_smooth(s, q, b)); }, a,
        std::min(a + half_period, s_max), 6, 1e-14);
  }
  return 2.0 * sum;
}

}  // namespace

TEST_CASE("kernel closed form") {
  CHECK(omega_smooth(0.0, 3.0, kWide) == 0.0);
  CHECK(omega_smooth(0.4, 0.0, kWide) == 0.0);
  const double expected = 10.0 / std::sqrt(std::numbers::pi) * std::exp(-1.0) * std::sin(1.0);
  CHECK(omega_smooth(0.2, 2.5, kWide) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(1.746502).epsilon(1e-6));
  CHECK(std::abs(kernel_by_quadrature(0.2, 2.5, kWide) - expected) < 1e-8);
}

TEST_CASE("kernel closed form against quadrature on a grid") {
  for (const BarrierSpec& b : {kWide, kNarrow}) {
    const double scale = 2.0 * b.sigma / std::sqrt(std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double s = -2.0 / b.sigma + 4.0 / b.sigma * i / 49.0;
      for (int j = 0; j < 50; ++j) {
        const double q = -4.0 * b.sigma + 8.0 * b.sigma * j / 49.0;
        worst = std::max(worst, std::abs(omega_smooth(s, q, b) - kernel_by_quadrature(s, q, b)));
      }
    }
    CHECK(worst / scale < 1e-8);
  }
}

TEST_CASE("kernel is odd in s") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double s = (rng.uniform() - 0.5) * 2.0;
    const double q = (rng.uniform() - 0.5) * 40.0;
    CHECK(omega_smooth(-s, q, kWide) == -omega_smooth(s, q, kWide));
  }
}

TEST_CASE("first moment of the kernel is the classical force") {
  for (const BarrierSpec& b : {kWide, kNarrow}) {
    for (double q : {-7.0, -1.5, 0.4, 2.5, 6.0}) {
      const double m1 = gauss_kronrod<double, 61>::integrate(
          [&](double s) { return s * omega_smooth(s, q, b); }, -10.0 / b.sigma, 10.0 / b.sigma,
          12, 1e-15);
      CHECK(m1 == doctest::Approx(force(q, b)).epsilon(1e-6));
    }
  }
}

TEST_CASE("total variation") {
  CHECK(kernel_total_variation(0.0, kWide) == 0.0);
  for (double x : {0.3, 2.5, 9.0, 30.0}) {
    CHECK(kernel_total_variation(x, kWide) == kernel_total_variation(-x, kWide));
    CHECK(kernel_total_variation(x, kWide) == doctest::Approx(nu_by_quadrature(x, kWide)).epsilon(1e-9));
  }
  // Far from the barrier |sin| averages to 2/pi: nu tends to 4 V0 / pi.
  CHECK(kernel_total_variation(100.0, kWide) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("rate table") {
  const double half_width = 50.0;
  const RateTable table(kWide, half_width);
  CHECK(jump_rate(0.0, table) == 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < table.values().size(); i += 16) {
    const double exact = nu_by_quadrature(table.node(i), kWide);
    if (exact > 0.0) worst = std::max(worst, std::abs(table.values()[i] / exact - 1.0));
  }
  CHECK(worst < 1e-4);
  for (double x : {0.37, 4.1, 12.9, 33.3}) {
    CHECK(jump_rate(x, table) == doctest::Approx(jump_rate(-x, table)).epsilon(1e-12));
  }
  // Outside the coherence window the rate is zero.
  CHECK(jump_rate(20.0 * kWide.sigma + 1.0, table) <= 1e-8 * table.max_rate());
  // Interpolation stays between neighbouring nodes.
  for (std::size_t i = 0; i + 1 < table.values().size(); i += 37) {
    const double mid = jump_rate(0.5 * (table.node(i) + table.node(i + 1)), table);
    CHECK(mid >= std::min(table.values()[i], table.values()[i + 1]) - 1e-15);
    CHECK(mid <= std::max(table.values()[i], table.values()[i + 1]) + 1e-15);
  }
}

TEST_CASE("jump sampling matches the kernel shape") {
  const double q = 2.5;
  const double nu = nu_by_quadrature(q, kWide);
  // CDF of |s| on a fine grid, from |w| / nu.
  const int nodes = 4001;
  const double s_max = 10.0 / kWide.sigma;
  std::vector<double> grid(nodes);
  std::vector<double> cdf(nodes, 0.0);
  for (int i = 0; i < nodes; ++i) grid[i] = s_max * i / (nodes - 1);
  for (int i = 1; i < nodes; ++i) {
    cdf[i] = cdf[i - 1] + 2.0 * gauss_kronrod<double, 31>::integrate(
                                    [&](double s) { return std::abs(omega_smooth(s, q, kWide)); },
                                    grid[i - 1], grid[i], 4, 1e-14) / nu;
  }
  const auto magnitude_cdf = [&](double a) {
    if (a >= s_max) return 1.0;
    const double t = a / s_max * (nodes - 1);
    const auto i = static_cast<std::size_t>(t);
    return cdf[i] + (t - i) * (cdf[i + 1] - cdf[i]);
  };

  Rng rng(5);
  const int n = 1000000;
  std::vector<double> magnitudes(n);
  std::vector<double> mirrored(n);
  Rng mirror_rng(6);
  for (int i = 0; i < n; ++i) {
    const JumpProposal jump = sample_jump(q, kWide, rng);
    CHECK_FALSE(jump.weight_factor != (std::sin(2.0 * jump.s * q) > 0.0 ? 1.0 : -1.0));
    magnitudes[i] = std::abs(jump.s);
    mirrored[i] = -sample_jump(-q, kWide, mirror_rng).s;
  }
  const double critical = 1.63 / std::sqrt(static_cast<double>(n));
  CHECK(testing::ks_statistic(magnitudes, magnitude_cdf) < critical);

  // Signed CDF at q, used for the mirror test at -q.
  std::vector<double> signed_draws(n);
  Rng again(5);
  for (int i = 0; i < n; ++i) signed_draws[i] = sample_jump(q, kWide, again).s;
  std::sort(signed_draws.begin(), signed_draws.end());
  const auto empirical = [&](double s) {
    return static_cast<double>(std::upper_bound(signed_draws.begin(), signed_draws.end(), s) -
                               signed_draws.begin()) / n;
  };
  // Two-sample KS between draws at q and mirrored draws at -q.
  const double d = testing::ks_statistic(mirrored, empirical);
  CHECK(d < 1.63 * std::sqrt(2.0 / n));

  CHECK_THROWS_AS((void)sample_jump(kWide.d, kWide, rng), ZeroRate);
}

TEST_CASE("regularized force pair") {
  const auto zero = delta_prime_pair(0.0, 1e-3, kWide);
  CHECK(zero[0].weight_factor == 0.0);
  CHECK(zero[1].weight_factor == 0.0);

  const auto left = delta_prime_pair(-3.0, 1e-3, kWide);
  const auto right = delta_prime_pair(3.0, 1e-3, kWide);
  CHECK(left[0].weight_factor == -right[0].weight_factor);
  CHECK(right[0].s == 1e-3);
  CHECK(right[1].s == -1e-3);

  // Acting on G(p) by convolution it approaches F G'(p) with an O(eps^2) error.
  const double q = 3.0;
  const double p = 0.8;
  const auto g = [](double x) { return std::exp(-x * x); };
  const double exact = force(q, kWide) * (-2.0 * p * g(p));
  const auto error = [&](double eps) {
    const auto pair = delta_prime_pair(q, eps, kWide);
    double action = 0.0;
    for (const auto& j : pair) action += j.weight_factor * g(p - j.s);
    return std::abs(action - exact);
  };
  const double ratio = error(0.1) / error(0.05);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  CHECK(error(1e-3) < 1e-6);
}

TEST_CASE("jump kernel with Hamiltonian characteristics") {
  const JumpKernel free_kernel(kNarrow, Characteristics::kFreeStreaming, 16.0, 1e-3);
  const JumpKernel ham(kNarrow, Characteristics::kHamiltonian, 16.0, 1e-3);
  CHECK(ham.rate(0.7) == doctest::Approx(free_kernel.rate(0.7) + std::abs(force(0.7, kNarrow)) / 1e-3));
  CHECK(ham.max_rate() >= free_kernel.max_rate());
  CHECK(free_kernel.rate(17.0) == 0.0);
  CHECK(ham.rate(17.0) == 0.0);
  // Mixture: fraction of force-pair draws matches its share of the rate.
  Rng rng(9);
  const double q = 0.7;
  int pair_draws = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) pair_draws += std::abs(ham.sample(q, rng).s) == 1e-3 ? 1 : 0;
  const double share = (ham.rate(q) - free_kernel.rate(q)) / ham.rate(q);
  CHECK(std::abs(pair_draws / double(n) - share) < 3.0 * std::sqrt(share * (1 - share) / n));
}
