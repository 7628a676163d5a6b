#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "qtraj/config.hpp"
#include "qtraj/ensemble.hpp"

namespace qtraj::testing {

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

// Free Gaussian packet: position variance at time t.
inline double free_var_q(const PacketSpec& packet, double t) {
  return packet.sigma_x * packet.sigma_x + packet.delta_k * packet.delta_k * t * t;
}

// Free Gaussian packet density at x, time t, convolved with a Gaussian of width h.
inline double free_density(const PacketSpec& packet, double x, double t, double h = 0.0) {
  const double v = free_var_q(packet, t) + h * h;
  const double u = x - packet.x0 - packet.k0 * t;
  return std::exp(-u * u / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

// Small scenario for fast tests.
inline ScenarioConfig small_config(double sigma, double delta_k, double x0, double t_final,
                                   std::int64_t ensemble) {
  ScenarioConfig c;
  c.packet = PacketSpec::from_spread(x0, 1.0, delta_k);
  c.barrier = {1.0, 0.0, sigma};
  c.t_final = t_final;
  c.n_snapshots = 65;
  c.ensemble_size = ensemble;
  return c;
}

}  // namespace qtraj::testing
