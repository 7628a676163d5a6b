#include "qtraj/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

// Kernel contributions beyond this many bandwidths are below 1e-13 of the peak.
constexpr double kKernelReach = 8.0;

std::size_t block_count(std::size_t groups, int blocks) {
  return std::min(groups, static_cast<std::size_t>(std::max(blocks, 1)));
}

std::size_t block_of(std::size_t group, std::size_t groups, std::size_t blocks) {
  return group * blocks / groups;
}

Estimate jackknife(double value, const std::vector<double>& leave_out) {
  const auto b = static_cast<double>(leave_out.size());
  if (leave_out.size() < 2) return {value, 0.0};
  double mean = 0.0;
  for (double v : leave_out) mean += v;
  mean /= b;
  double ss = 0.0;
  for (double v : leave_out) ss += (v - mean) * (v - mean);
  return {value, std::sqrt((b - 1.0) / b * ss)};
}

template <typename Stat>
Estimate jackknife_series(const TimeSeriesObservable& series, Stat stat) {
  const double value = stat(series.values);
  std::vector<double> loo;
  if (series.n_blocks() >= 2) {
    for (std::size_t b = 0; b < series.n_blocks(); ++b) loo.push_back(stat(series.leave_out(b)));
  }
  return jackknife(value, loo);
}

// Per-block totals of several weighted symbols over one snapshot.
struct BlockTotals {
  std::vector<std::vector<double>> blocks;  // [block][symbol]
  std::vector<double> total;

  [[nodiscard]] std::vector<double> without(std::size_t b) const {
    std::vector<double> out(total);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= blocks[b][k];
    return out;
  }
};

// accumulate(q, p, w, acc) adds the sample's contributions into acc[0..k).
template <typename Accumulate>
BlockTotals block_totals(const EnsembleSnapshot& snapshot, std::size_t k, int blocks,
                         Accumulate accumulate) {
  const std::size_t groups = snapshot.n_groups();
  if (groups == 0 || snapshot.n_trajectories <= 0) {
    throw EmptyEnsemble("snapshot holds no trajectories");
  }
  const std::size_t n_blocks = block_count(groups, blocks);
  BlockTotals totals{std::vector<std::vector<double>>(n_blocks, std::vector<double>(k, 0.0)),
                     std::vector<double>(k, 0.0)};
  for (std::size_t g = 0; g < groups; ++g) {
    auto& acc = totals.blocks[block_of(g, groups, n_blocks)];
    for (const auto& s : snapshot.group(g)) accumulate(s.q, s.p, s.w, acc.data());
  }
  for (const auto& block : totals.blocks) {
    for (std::size_t j = 0; j < k; ++j) totals.total[j] += block[j];
  }
  return totals;
}

template <typename Stat>
Estimate jackknife_totals(const BlockTotals& totals, Stat stat) {
  const double value = stat(totals.total);
  std::vector<double> loo;
  if (totals.blocks.size() >= 2) {
    for (std::size_t b = 0; b < totals.blocks.size(); ++b) loo.push_back(stat(totals.without(b)));
  }
  return jackknife(value, loo);
}

double first_moment_ratio(const std::vector<double>& times, const std::vector<double>& values) {
  std::vector<double> weighted(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) weighted[i] = times[i] * values[i];
  return trapezoid(times, weighted) / trapezoid(times, values);
}

// Integral and its jackknife error; throws ZeroMass unless clearly positive.
Estimate checked_integral(const TimeSeriesObservable& series, const char* what) {
  const Estimate integral = jackknife_series(
      series, [&](const std::vector<double>& v) { return trapezoid(series.times, v); });
  if (!(integral.value > 0.0) || integral.value <= 2.0 * integral.std_error) {
    throw ZeroMass(std::string(what) + ": time integral is not positive within its error");
  }
  return integral;
}

TimeSeriesObservable scaled(const TimeSeriesObservable& series, double factor) {
  TimeSeriesObservable out = series;
  for (auto& v : out.values) v *= factor;
  for (auto& e : out.std_errors) e *= std::abs(factor);
  for (auto& block : out.block_sums) {
    for (auto& v : block) v *= factor;
  }
  return out;
}

}  // namespace

std::vector<double> TimeSeriesObservable::leave_out(std::size_t b) const {
  const double n = static_cast<double>(n_trajectories);
  const double rest = n - static_cast<double>(block_sizes[b]);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] * n - block_sums[b][i]) / rest;
  }
  return out;
}

void TimeSeriesObservable::validate() const {
  if (values.size() != times.size() || std_errors.size() != times.size()) {
    throw GridMismatch("time series columns differ in length");
  }
  for (const auto& block : block_sums) {
    if (block.size() != times.size()) throw GridMismatch("block totals differ in length");
  }
  if (times.size() < 2) return;
  const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - step) > 1e-9 * std::max(1.0, std::abs(step))) {
      throw GridMismatch("time grid is not uniform");
    }
  }
}

double detector_kernel(double u, double h) noexcept {
  const double z = u / h;
  return std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
}

Estimate density_at(double x, const EnsembleSnapshot& snapshot, double h) {
  return estimate_functional([&](double q, double) { return detector_kernel(q - x, h); },
                             snapshot);
}

Estimate flux_at(double x, const EnsembleSnapshot& snapshot, double h) {
  return estimate_functional([&](double q, double p) { return p * detector_kernel(q - x, h); },
                             snapshot);
}

DetectorRecorder::DetectorRecorder(std::vector<double> detectors, double bandwidth, int blocks)
    : detectors_(std::move(detectors)),
      bandwidth_(bandwidth),
      blocks_(blocks),
      density_(detectors_.size()),
      flux_(detectors_.size()) {}

void DetectorRecorder::record(const EnsembleSnapshot& snapshot) {
  const std::size_t groups = snapshot.n_groups();
  if (groups == 0 || snapshot.n_trajectories <= 0) {
    throw EmptyEnsemble("snapshot holds no trajectories");
  }
  const std::size_t n_det = detectors_.size();
  const std::size_t n_blocks = block_count(groups, blocks_);
  const double reach = kKernelReach * bandwidth_;

  // [detector][group]
  std::vector<std::vector<double>> dens(n_det, std::vector<double>(groups, 0.0));
  std::vector<std::vector<double>> flux(n_det, std::vector<double>(groups, 0.0));
  for (std::size_t g = 0; g < groups; ++g) {
    for (const auto& s : snapshot.group(g)) {
      for (std::size_t d = 0; d < n_det; ++d) {
        const double u = s.q - detectors_[d];
        if (std::abs(u) > reach) continue;
        const double k = s.w * detector_kernel(u, bandwidth_);
        dens[d][g] += k;
        flux[d][g] += k * s.p;
      }
    }
  }

  const auto append = [&](TimeSeriesObservable& series, const std::vector<double>& sums) {
    if (series.block_sizes.empty()) {
      series.block_sizes.assign(n_blocks, 0);
      series.block_sums.assign(n_blocks, {});
      for (std::size_t g = 0; g < groups; ++g) {
        series.block_sizes[block_of(g, groups, n_blocks)] += snapshot.group_sizes[g];
      }
      series.n_trajectories = snapshot.n_trajectories;
    } else if (series.n_blocks() != n_blocks || series.n_trajectories != snapshot.n_trajectories) {
      throw GridMismatch("snapshot grouping changed during recording");
    }
    const Estimate e = combine_groups(sums, snapshot.group_sizes, snapshot.n_trajectories);
    series.times.push_back(snapshot.time);
    series.values.push_back(e.value);
    series.std_errors.push_back(e.std_error);
    for (auto& block : series.block_sums) block.push_back(0.0);
    for (std::size_t g = 0; g < groups; ++g) {
      series.block_sums[block_of(g, groups, n_blocks)].back() += sums[g];
    }
  };
  for (std::size_t d = 0; d < n_det; ++d) {
    append(density_[d], dens[d]);
    append(flux_[d], flux[d]);
  }
}

double trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
  double sum = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    sum += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  }
  return sum;
}

TimeSeriesObservable presence_distribution(const TimeSeriesObservable& density) {
  density.validate();
  const Estimate integral = checked_integral(density, "presence distribution");
  return scaled(density, 1.0 / integral.value);
}

Estimate mean_presence_time(const TimeSeriesObservable& density) {
  density.validate();
  checked_integral(density, "mean presence time");
  return jackknife_series(density, [&](const std::vector<double>& v) {
    return first_moment_ratio(density.times, v);
  });
}

double backflow_fraction(const TimeSeriesObservable& flux) {
  std::vector<double> negative(flux.values.size());
  std::vector<double> magnitude(flux.values.size());
  for (std::size_t i = 0; i < flux.values.size(); ++i) {
    negative[i] = std::min(flux.values[i], 0.0);
    magnitude[i] = std::abs(flux.values[i]);
  }
  const double total = trapezoid(flux.times, magnitude);
  return total > 0.0 ? std::abs(trapezoid(flux.times, negative)) / total : 0.0;
}

TimeSeriesObservable arrival_distribution(const TimeSeriesObservable& flux,
                                          double backflow_limit) {
  flux.validate();
  const double backflow = backflow_fraction(flux);
  if (backflow > backflow_limit) {
    throw BackflowDominant(backflow, "reverse flux fraction " + std::to_string(backflow) +
                                         " exceeds " + std::to_string(backflow_limit));
  }
  const Estimate integral = checked_integral(flux, "arrival distribution");
  return scaled(flux, 1.0 / integral.value);
}

Estimate mean_arrival_time(const TimeSeriesObservable& flux, double backflow_limit) {
  const TimeSeriesObservable distribution = arrival_distribution(flux, backflow_limit);
  return jackknife_series(distribution, [&](const std::vector<double>& v) {
    return first_moment_ratio(distribution.times, v);
  });
}

Estimate transit_time(const TimeSeriesObservable& initial, const TimeSeriesObservable& final) {
  const Estimate ti = mean_presence_time(initial);
  const Estimate tf = mean_presence_time(final);
  const double value = tf.value - ti.value;
  const bool shared = initial.n_blocks() == final.n_blocks() &&
                      initial.n_trajectories == final.n_trajectories &&
                      initial.block_sizes == final.block_sizes && initial.times == final.times;
  if (!shared) return {value, std::hypot(ti.std_error, tf.std_error)};
  // Both series come from one ensemble: leave the same block out of each.
  std::vector<double> loo;
  for (std::size_t b = 0; b < initial.n_blocks(); ++b) {
    loo.push_back(first_moment_ratio(final.times, final.leave_out(b)) -
                  first_moment_ratio(initial.times, initial.leave_out(b)));
  }
  return jackknife(value, loo);
}

Estimate time_delay(const TimeSeriesObservable& tunneling_flux,
                    const TimeSeriesObservable& free_flux, double backflow_limit) {
  if (tunneling_flux.times != free_flux.times) {
    throw GridMismatch("tunneling and free runs use different time grids");
  }
  const Estimate tunnel = mean_arrival_time(tunneling_flux, backflow_limit);
  const Estimate free = mean_arrival_time(free_flux, backflow_limit);
  return {tunnel.value - free.value, std::hypot(tunnel.std_error, free.std_error)};
}

int count_lobes(const TimeSeriesObservable& series, double fraction) {
  if (series.values.empty()) return 0;
  const double peak = *std::max_element(series.values.begin(), series.values.end());
  if (!(peak > 0.0)) return 0;
  const double threshold = fraction * peak;
  // Hysteresis: a lobe starts on a rise of threshold above the last minimum and
  // ends on a fall of threshold below its maximum.
  int lobes = 0;
  bool inside = false;
  double extreme = 0.0;
  for (double v : series.values) {
    if (inside) {
      extreme = std::max(extreme, v);
      if (v < extreme - threshold) {
        inside = false;
        extreme = v;
      }
    } else {
      extreme = std::min(extreme, v);
      if (v > extreme + threshold) {
        inside = true;
        ++lobes;
        extreme = v;
      }
    }
  }
  return lobes;
}

double tail_fraction(const TimeSeriesObservable& series, double window) {
  const double total = trapezoid(series.times, series.values);
  if (!(total > 0.0) || series.size() < 2) return 0.0;
  const double start = series.times.back() - window * (series.times.back() - series.times.front());
  std::vector<double> t;
  std::vector<double> v;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.times[i] >= start) {
      t.push_back(series.times[i]);
      v.push_back(series.values[i]);
    }
  }
  return trapezoid(t, v) / total;
}

Histogram momentum_distribution(const EnsembleSnapshot& snapshot, std::optional<double> boundary,
                                int bins) {
  if (bins < 1) throw ValidationError("observables.momentum_bins", "must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : snapshot.samples) {
    if (boundary && !(s.q > *boundary)) continue;
    lo = std::min(lo, s.p);
    hi = std::max(hi, s.p);
  }
  if (!(lo <= hi)) throw EmptyRegion("no samples in the momentum region");
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  // Interior bins span the observed range; five padding bins on each side.
  const double width = (hi - lo) / std::max(bins - 10, 1);
  return momentum_distribution(snapshot, boundary, bins, lo - 5.0 * width,
                               lo - 5.0 * width + width * bins);
}

Histogram momentum_distribution(const EnsembleSnapshot& snapshot, std::optional<double> boundary,
                                int bins, double p_min, double p_max) {
  if (bins < 1 || !(p_max > p_min)) {
    throw ValidationError("observables.momentum_bins", "need bins >= 1 and p_max > p_min");
  }
  const auto n_bins = static_cast<std::size_t>(bins);
  const double width = (p_max - p_min) / bins;
  std::size_t in_region = 0;
  // Slot 0 holds the region weight, slot 1 + k bin k.
  const BlockTotals totals =
      block_totals(snapshot, n_bins + 1, kDefaultBlocks, [&](double q, double p, double w, double* acc) {
        if (boundary && !(q > *boundary)) return;
        ++in_region;
        acc[0] += w;
        const double k = std::floor((p - p_min) / width);
        if (k >= 0.0 && k < bins) acc[1 + static_cast<std::size_t>(k)] += w;
      });
  if (in_region == 0 || !(totals.total[0] > 0.0)) {
    throw EmptyRegion("momentum region carries no positive weight");
  }

  Histogram h;
  h.edges.resize(n_bins + 1);
  for (std::size_t k = 0; k <= n_bins; ++k) h.edges[k] = p_min + width * static_cast<double>(k);
  h.masses.resize(n_bins);
  h.std_errors.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const Estimate e =
        jackknife_totals(totals, [&](const std::vector<double>& t) { return t[1 + k] / t[0]; });
    h.masses[k] = e.value;
    h.std_errors[k] = e.std_error;
  }
  const double n = static_cast<double>(snapshot.n_trajectories);
  h.region_weight = jackknife_totals(totals, [&](const std::vector<double>& t) {
    return t[0] / n;
  });
  return h;
}

Moments moments(const EnsembleSnapshot& snapshot) {
  const BlockTotals totals =
      block_totals(snapshot, 5, kDefaultBlocks, [](double q, double p, double w, double* acc) {
        acc[0] += w;
        acc[1] += w * q;
        acc[2] += w * p;
        acc[3] += w * q * q;
        acc[4] += w * p * p;
      });
  if (!(std::abs(totals.total[0]) > 0.0)) throw EmptyEnsemble("snapshot carries no weight");
  Moments m;
  m.mean_q = jackknife_totals(totals, [](const std::vector<double>& t) { return t[1] / t[0]; });
  m.mean_p = jackknife_totals(totals, [](const std::vector<double>& t) { return t[2] / t[0]; });
  m.var_q = jackknife_totals(totals, [](const std::vector<double>& t) {
    const double mean = t[1] / t[0];
    return t[3] / t[0] - mean * mean;
  });
  m.var_p = jackknife_totals(totals, [](const std::vector<double>& t) {
    const double mean = t[2] / t[0];
    return t[4] / t[0] - mean * mean;
  });
  return m;
}

RegionMomentum region_momentum(const EnsembleSnapshot& snapshot, double boundary) {
  std::size_t in_region = 0;
  const BlockTotals totals =
      block_totals(snapshot, 3, kDefaultBlocks, [&](double q, double p, double w, double* acc) {
        if (!(q > boundary)) return;
        ++in_region;
        acc[0] += w;
        acc[1] += w * p;
        acc[2] += w * p * p;
      });
  if (in_region == 0 || !(totals.total[0] > 0.0)) {
    throw EmptyRegion("region carries no positive weight");
  }
  const double n = static_cast<double>(snapshot.n_trajectories);
  RegionMomentum r;
  r.weight = jackknife_totals(totals, [&](const std::vector<double>& t) { return t[0] / n; });
  r.mean = jackknife_totals(totals, [](const std::vector<double>& t) { return t[1] / t[0]; });
  r.variance = jackknife_totals(totals, [](const std::vector<double>& t) {
    const double mean = t[1] / t[0];
    return t[2] / t[0] - mean * mean;
  });
  return r;
}

Estimate transmission_probability(const EnsembleSnapshot& snapshot, double boundary) {
  return estimate_functional([&](double q, double) { return q > boundary ? 1.0 : 0.0; },
                             snapshot);
}

}  // namespace qtraj
