#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace linsys {

/// splitmix64 finalizer. A bijection on 64-bit words with full avalanche;
/// constants are fixed and part of the reproducibility contract.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Seed of run `index` in an ensemble with master seed `master`.
/// master + (index + 1) * golden is injective in index (golden is odd), and
/// mix64 is a bijection, so distinct indices always receive distinct seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Per-trajectory random stream. All variates are derived from raw 64-bit
/// outputs with fixed formulas so trajectories do not depend on the standard
/// library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform index in [0, n), unbiased by rejection.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t x = next();
    while (x < threshold) x = next();
    return static_cast<std::size_t>(x % bound);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace linsys
