#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qtraj/ensemble.hpp"

namespace qtraj {

// Values of a detector functional on a uniform time grid.
//
// When built from an ensemble the series also keeps, per block of groups, the
// raw totals of w * A, so that statistics of the whole curve (mean times,
// transit times) get jackknife errors. Series without blocks report zero error
// for derived statistics.
struct TimeSeriesObservable {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::vector<std::vector<double>> block_sums;  // [block][time]
  std::vector<std::int64_t> block_sizes;
  std::int64_t n_trajectories = 0;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  [[nodiscard]] std::size_t n_blocks() const noexcept { return block_sizes.size(); }
  // The series re-estimated without block b.
  [[nodiscard]] std::vector<double> leave_out(std::size_t b) const;
  // Throws GridMismatch on unequal lengths or a non-uniform grid.
  void validate() const;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<double> masses;
  std::vector<double> std_errors;
  // Signed weight of the region, per initial trajectory.
  Estimate region_weight;
};

struct Moments {
  Estimate mean_q;
  Estimate mean_p;
  Estimate var_q;
  Estimate var_p;
};

struct RegionMomentum {
  Estimate weight;
  Estimate mean;
  Estimate variance;
};

inline constexpr int kDefaultBlocks = 32;
inline constexpr double kBackflowLimit = 0.02;

// Normalized Gaussian of standard deviation h.
[[nodiscard]] double detector_kernel(double u, double h) noexcept;

[[nodiscard]] Estimate density_at(double x, const EnsembleSnapshot& snapshot, double h);
[[nodiscard]] Estimate flux_at(double x, const EnsembleSnapshot& snapshot, double h);

// Streams density and flux at a fixed set of detectors, one point per snapshot.
class DetectorRecorder {
 public:
  DetectorRecorder(std::vector<double> detectors, double bandwidth, int blocks = kDefaultBlocks);

  void record(const EnsembleSnapshot& snapshot);

  [[nodiscard]] const std::vector<double>& detectors() const noexcept { return detectors_; }
  [[nodiscard]] const TimeSeriesObservable& density(std::size_t d) const { return density_[d]; }
  [[nodiscard]] const TimeSeriesObservable& flux(std::size_t d) const { return flux_[d]; }

 private:
  std::vector<double> detectors_;
  double bandwidth_;
  int blocks_;
  std::vector<TimeSeriesObservable> density_;
  std::vector<TimeSeriesObservable> flux_;
};

[[nodiscard]] double trapezoid(const std::vector<double>& times, const std::vector<double>& values);

// Density series divided by its time integral. Throws ZeroMass.
[[nodiscard]] TimeSeriesObservable presence_distribution(const TimeSeriesObservable& density);
[[nodiscard]] Estimate mean_presence_time(const TimeSeriesObservable& density);

// |integral of min(J, 0)| / integral of |J|.
[[nodiscard]] double backflow_fraction(const TimeSeriesObservable& flux);
// Flux series divided by its time integral. Throws BackflowDominant or ZeroMass.
[[nodiscard]] TimeSeriesObservable arrival_distribution(const TimeSeriesObservable& flux,
                                                        double backflow_limit = kBackflowLimit);
[[nodiscard]] Estimate mean_arrival_time(const TimeSeriesObservable& flux,
                                         double backflow_limit = kBackflowLimit);

// Mean presence time at the final detector minus that at the initial one.
[[nodiscard]] Estimate transit_time(const TimeSeriesObservable& initial,
                                    const TimeSeriesObservable& final);
// Mean arrival time with the barrier minus without; the runs are independent.
[[nodiscard]] Estimate time_delay(const TimeSeriesObservable& tunneling_flux,
                                  const TimeSeriesObservable& free_flux,
                                  double backflow_limit = kBackflowLimit);

// Maxima separated by dips of at least fraction * the series peak.
[[nodiscard]] int count_lobes(const TimeSeriesObservable& series, double fraction = 0.25);
// Share of the time integral in the last `window` of the time range.
[[nodiscard]] double tail_fraction(const TimeSeriesObservable& series, double window = 0.05);

// Normalized histogram of p over samples with q > boundary (all samples when
// unset). The range is the observed one padded by five bins on each side.
[[nodiscard]] Histogram momentum_distribution(const EnsembleSnapshot& snapshot,
                                              std::optional<double> boundary, int bins);
[[nodiscard]] Histogram momentum_distribution(const EnsembleSnapshot& snapshot,
                                              std::optional<double> boundary, int bins,
                                              double p_min, double p_max);

[[nodiscard]] Moments moments(const EnsembleSnapshot& snapshot);
// Weight, mean and variance of p over q > boundary.
[[nodiscard]] RegionMomentum region_momentum(const EnsembleSnapshot& snapshot, double boundary);
[[nodiscard]] Estimate transmission_probability(const EnsembleSnapshot& snapshot, double boundary);

}  // namespace qtraj
