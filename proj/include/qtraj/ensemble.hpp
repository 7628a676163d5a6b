#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qtraj/error.hpp"

namespace qtraj {

struct WeightedSample {
  double q = 0.0;
  double p = 0.0;
  double w = 0.0;

  friend bool operator==(const WeightedSample&, const WeightedSample&) = default;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// The ensemble at one time. Samples are grouped into statistically independent
// units (one trajectory each for the weighted estimator, one replica each for
// the population estimator); group g owns samples
// [group_offsets[g], group_offsets[g + 1]) and represents group_sizes[g]
// initial trajectories. Weights are normalized so that a linear functional is
// estimated by sum(w A) / n_trajectories.
struct EnsembleSnapshot {
  double time = 0.0;
  std::vector<WeightedSample> samples;
  std::vector<std::size_t> group_offsets{0};
  std::vector<std::int64_t> group_sizes;
  std::int64_t n_trajectories = 0;

  [[nodiscard]] std::size_t n_groups() const noexcept { return group_sizes.size(); }
  [[nodiscard]] std::span<const WeightedSample> group(std::size_t g) const noexcept {
    return std::span(samples).subspan(group_offsets[g], group_offsets[g + 1] - group_offsets[g]);
  }
  void append_group(std::span<const WeightedSample> members, std::int64_t size);
};

// Pairwise (tree) summation in index order: deterministic for a given input.
[[nodiscard]] double pairwise_sum(std::span<const double> values) noexcept;

template <typename F>
concept WeylSymbol = std::regular_invocable<F, double, double> &&
                     std::convertible_to<std::invoke_result_t<F, double, double>, double>;

// Per-group totals of w * A(q, p).
template <WeylSymbol F>
[[nodiscard]] std::vector<double> group_sums(const EnsembleSnapshot& snapshot, F&& symbol) {
  std::vector<double> sums(snapshot.n_groups());
  std::vector<double> terms;
  for (std::size_t g = 0; g < sums.size(); ++g) {
    const auto members = snapshot.group(g);
    if (members.size() == 1) {
      sums[g] = members[0].w * symbol(members[0].q, members[0].p);
      continue;
    }
    terms.resize(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      terms[i] = members[i].w * symbol(members[i].q, members[i].p);
    }
    sums[g] = pairwise_sum(terms);
  }
  return sums;
}

// Value and standard error from per-group totals.
[[nodiscard]] Estimate combine_groups(std::span<const double> sums,
                                      std::span<const std::int64_t> sizes,
                                      std::int64_t n_trajectories);

template <WeylSymbol F>
[[nodiscard]] Estimate estimate_functional(F&& symbol, const EnsembleSnapshot& snapshot) {
  if (snapshot.n_groups() == 0 || snapshot.n_trajectories <= 0) {
    throw EmptyEnsemble("snapshot holds no trajectories");
  }
  const auto sums = group_sums(snapshot, std::forward<F>(symbol));
  return combine_groups(sums, snapshot.group_sizes, snapshot.n_trajectories);
}

}  // namespace qtraj
