#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace crnhj {

/**
 * SplitMix64: the state is a Weyl counter and each output is a bijective
 * mix of it, so the n-th draw is mix(seed + n * gamma). Streams for parallel
 * trajectories are keyed by mix(base_seed ^ index).
 *
 * Uniform and exponential variates are produced here rather than through
 * <random> distributions so that results are bit-identical across standard
 * library implementations.
 */
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static SplitMix64 stream(std::uint64_t base_seed, std::uint64_t index) {
    return SplitMix64(mix(base_seed ^ index));
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform on (0, 1].
  double uniform() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::uint64_t state_;
};

}  // namespace crnhj
