#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tvc {

/// Seed for every sampler in the library. Same seed, same stream.
struct Seed {
  std::uint64_t value = 0;
};

/// xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
///
/// Satisfies UniformRandomBitGenerator so it can drive the Boost.Random
/// distributions. `split()` returns an independent generator obtained by
/// the 2^128-step jump, leaving this generator advanced past it.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(Seed seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Jump-based stream splitting.
  Xoshiro256 split();

  /// Uniform double on the open interval (0, 1), 53-bit resolution.
  double uniform_open();

 private:
  Xoshiro256() = default;
  void jump();

  std::array<std::uint64_t, 4> s_{};
};

/// SplitMix64 step; also used to derive per-replication seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministically derive a child seed (e.g. one per matrix cell).
Seed derive_seed(Seed base, std::uint64_t stream);

}  // namespace tvc
