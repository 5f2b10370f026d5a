#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>

#include "quadlat/errors.hpp"
#include "quadlat/modarith.hpp"

namespace quadlat {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for stream `index` of a master seed. Used so that
/// per-trial / per-seed generators are reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Deterministic RNG over arbitrary-precision integers. mt19937_64 output is
/// fixed by the standard, so identical seeds give identical draws on every
/// platform; rejection sampling keeps the big-integer draws unbiased.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, n). Requires n >= 1.
  Int below(const Int& n) {
    if (n < 1) throw OutOfRangeError("SeededRng::below: bound must be >= 1");
    const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    const std::size_t words = (bits + 63) / 64;
    Int mask = (Int(1) << bits) - 1;
    for (;;) {
      Int z = 0;
      for (std::size_t w = 0; w < words; ++w) {
        z <<= 64;
        z |= Int(next_u64());
      }
      z &= mask;
      if (z < n) return z;
    }
  }

  /// Uniform in [lo, hi], inclusive on both ends.
  Int in_range(const Int& lo, const Int& hi) {
    if (hi < lo) throw OutOfRangeError("SeededRng::in_range: empty range");
    return lo + below(hi - lo + 1);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace quadlat
