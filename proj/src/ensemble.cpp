#include "qtraj/ensemble.hpp"

#include <cmath>

namespace qtraj {

void EnsembleSnapshot::append_group(std::span<const WeightedSample> members, std::int64_t size) {
  samples.insert(samples.end(), members.begin(), members.end());
  group_offsets.push_back(samples.size());
  group_sizes.push_back(size);
  n_trajectories += size;
}

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kLeaf = 16;
  if (values.size() <= kLeaf) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate combine_groups(std::span<const double> sums, std::span<const std::int64_t> sizes,
                        std::int64_t n_trajectories) {
  if (sums.empty() || n_trajectories <= 0) throw EmptyEnsemble("no groups to combine");
  const double n = static_cast<double>(n_trajectories);
  const double value = pairwise_sum(sums) / n;
  if (sums.size() < 2) return {value, 0.0};
  // Group g estimates the functional by sums[g] / sizes[g]; weight by size.
  std::vector<double> spread(sums.size());
  for (std::size_t g = 0; g < sums.size(); ++g) {
    const double m = static_cast<double>(sizes[g]);
    const double dev = sums[g] / m - value;
    spread[g] = m * dev * dev;
  }
  const double groups = static_cast<double>(sums.size());
  return {value, std::sqrt(pairwise_sum(spread) / ((groups - 1.0) * n))};
}

}  // namespace qtraj
