#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace qtraj {

// SplitMix64: 8 bytes of state, so every trajectory of a large ensemble can own
// an independent stream while the ensemble advances in lockstep.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  // Stream for work item `index` of a run seeded with `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return Rng(mix(mix(seed) ^ (index + 0x632be59bd9b4e019ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(*this);
  }

  double exponential(double rate) { return std::exponential_distribution<double>(rate)(*this); }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace qtraj
