#pragma once

#include <cstdint>
#include <limits>

namespace qclt {

/// SplitMix64 finalizer (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based stream: output k is mix64(key + k * gamma), where the key is
/// derived from (seed, stream index). Any stream can be reproduced without
/// touching the others, so results do not depend on how paths are scheduled.
/// Models UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  constexpr CounterStream(std::uint64_t seed, std::uint64_t index) noexcept
      : key_(mix64(mix64(seed) ^ mix64(index * 0xD1B54A32D192ED03ull + 1))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qclt
