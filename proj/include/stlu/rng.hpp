#pragma once

#include <cstdint>

#include "stlu/normal.hpp"

namespace stlu {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ seeded through SplitMix64. Output is a pure function of the
// seed, so results are identical across platforms and runs.
//
// Stream splitting: substream(k) of a generator seeded with s is a fresh
// generator seeded with splitmix64(s + (k+1) * 0x9E3779B97F4A7C15). Derivation
// depends only on the parent's seed, never on how many values the parent has
// produced, so substreams may be drawn from in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = detail::splitmix64(sm);
  }

  std::uint64_t seed() const { return seed_; }

  Rng substream(std::uint64_t stream) const {
    std::uint64_t sm = seed_ + (stream + 1) * 0x9E3779B97F4A7C15ull;
    return Rng(detail::splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform strictly inside (0, 1); safe as a quantile-function argument.
  double next_unit() { return ((next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal draw via the inverse CDF, keeping the stream portable.
  double next_normal() { return inverse_normal_cdf(next_unit()); }

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
};

}  // namespace stlu
