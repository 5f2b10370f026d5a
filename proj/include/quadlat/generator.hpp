#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "quadlat/errors.hpp"
#include "quadlat/modarith.hpp"
#include "quadlat/rng.hpp"

namespace quadlat {

/// One step of the quadratic congruential generator: (a*u^2 + c) mod p.
inline Int step(const GenParams& params, const Int& u) {
  if (u < 0 || u >= params.p())
    throw OutOfRangeError("step: state must lie in [0, p)");
  return nonneg_mod(params.a() * u * u + params.c(), params.p());
}

/// A run of the generator. terms[0] is the seed and every consecutive pair
/// obeys terms[n+1] = (a*terms[n]^2 + c) mod p.
struct StateSequence {
  GenParams params;
  std::vector<Int> terms;
};

/// Runs the generator for n steps, producing n+1 terms starting at the seed.
inline StateSequence run(const GenParams& params, const Int& u0, std::size_t n) {
  StateSequence seq{params, {}};
  seq.terms.reserve(n + 1);
  if (u0 < 0 || u0 >= params.p())
    throw OutOfRangeError("run: seed must lie in [0, p)");
  seq.terms.push_back(u0);
  for (std::size_t i = 0; i < n; ++i) seq.terms.push_back(step(params, seq.terms.back()));
  return seq;
}

/// Approximations (w0, w1) of two consecutive hidden states, accurate to
/// within delta: |w_j - u_j| <= delta. The w_j are plain integers, not field
/// elements; they are never reduced mod p and may be negative or exceed p-1
/// by up to delta.
class Observation {
 public:
  Observation(GenParams params, Int w0, Int w1, Int delta)
      : params_(std::move(params)), w0_(std::move(w0)), w1_(std::move(w1)),
        delta_(std::move(delta)) {
    if (delta_ < 1 || delta_ >= params_.p())
      throw BadDeltaError("Observation: delta must lie in [1, p)");
  }

  const GenParams& params() const { return params_; }
  const Int& w0() const { return w0_; }
  const Int& w1() const { return w1_; }
  const Int& delta() const { return delta_; }

 private:
  GenParams params_;
  Int w0_;
  Int w1_;
  Int delta_;
};

enum class ObserveMode {
  TruncateLowBits,  // clear low bits of each state, keeping the error <= delta
  RandomOffset,     // subtract a seeded uniform offset from [-delta, delta]
};

/// Produces an Observation of the first two terms of a run.
///
/// TruncateLowBits clears the low floor(log2 delta)+1 bits of each state; when
/// the cleared amount would exceed delta (delta+1 not a power of two), one
/// fewer bit is cleared, so |w_j - u_j| <= delta always holds.
/// RandomOffset draws e_j uniformly from [-delta, delta] with a deterministic
/// generator seeded by rng_seed and returns w_j = u_j - e_j.
inline Observation observe(const StateSequence& seq, const Int& delta, ObserveMode mode,
                           std::uint64_t rng_seed = 0) {
  if (seq.terms.size() < 2)
    throw OutOfRangeError("observe: sequence needs at least two terms");
  if (delta < 1 || delta >= seq.params.p())
    throw BadDeltaError("observe: delta must lie in [1, p)");

  const Int& u0 = seq.terms[0];
  const Int& u1 = seq.terms[1];
  Int w0, w1;
  switch (mode) {
    case ObserveMode::TruncateLowBits: {
      const std::size_t block_bits = mpz_sizeinbase(delta.get_mpz_t(), 2);
      const Int block = Int(1) << block_bits;
      // explicit Int return: the subtraction must not escape as a lazy
      // expression referencing the local e
      auto truncate = [&](const Int& u) -> Int {
        Int e = nonneg_mod(u, block);
        if (e > delta) e = nonneg_mod(u, block >> 1);
        return u - e;
      };
      w0 = truncate(u0);
      w1 = truncate(u1);
      break;
    }
    case ObserveMode::RandomOffset: {
      SeededRng rng(rng_seed);
      const Int e0 = rng.in_range(-delta, delta);
      const Int e1 = rng.in_range(-delta, delta);
      w0 = u0 - e0;
      w1 = u1 - e1;
      break;
    }
  }
  return Observation(seq.params, w0, w1, delta);
}

}  // namespace quadlat
