#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "quadlat/errors.hpp"
#include "quadlat/generator.hpp"
#include "quadlat/lattice.hpp"
#include "quadlat/modarith.hpp"

namespace quadlat {

struct AttackInstance {
  Observation obs;
};

enum class Branch { F0Nonzero, F0Zero };

enum class FailureReason {
  ExceptionalD1Nonzero,
  NonIntegralEpsilon,
  EpsilonOutOfBound,
  VerificationMismatch,
  NonParallelShortVector,
  DeltaTooLarge,
};

inline const char* to_string(Branch b) {
  return b == Branch::F0Nonzero ? "F0Nonzero" : "F0Zero";
}

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::ExceptionalD1Nonzero: return "ExceptionalD1Nonzero";
    case FailureReason::NonIntegralEpsilon: return "NonIntegralEpsilon";
    case FailureReason::EpsilonOutOfBound: return "EpsilonOutOfBound";
    case FailureReason::VerificationMismatch: return "VerificationMismatch";
    case FailureReason::NonParallelShortVector: return "NonParallelShortVector";
    case FailureReason::DeltaTooLarge: return "DeltaTooLarge";
  }
  return "?";
}

/// Snake-case spelling used for histogram keys and serialized reports.
inline const char* reason_slug(FailureReason r) {
  switch (r) {
    case FailureReason::ExceptionalD1Nonzero: return "exceptional_d1_nonzero";
    case FailureReason::NonIntegralEpsilon: return "non_integral_epsilon";
    case FailureReason::EpsilonOutOfBound: return "epsilon_out_of_bound";
    case FailureReason::VerificationMismatch: return "verification_mismatch";
    case FailureReason::NonParallelShortVector: return "non_parallel_short_vector";
    case FailureReason::DeltaTooLarge: return "delta_too_large";
  }
  return "?";
}

/// Everything the attack computed before it succeeded or gave up. f holds the
/// unscaled short-vector components of the first lattice (the raw vector is
/// (D^2 f0, D f1, D f2, f3)); f_prime likewise for the second lattice.
/// parallel_bound_proven records 21*D^3 < p, the hypothesis under which a
/// non-parallel second short vector is provably impossible outside the
/// exceptional seeds.
struct StageTrace {
  std::optional<Int> a0, a1;
  std::optional<std::array<Int, 4>> f;
  std::optional<Int> r, s;
  std::optional<Int> b0, b1;
  std::optional<std::array<Int, 3>> f_prime;
  std::optional<Branch> branch;
  bool parallel_bound_proven = false;
};

struct AttackSuccess {
  Int u0;
  Int u1;
  Branch branch;
};

struct AttackResult {
  std::optional<AttackSuccess> success;
  std::optional<FailureReason> failure;
  StageTrace trace;
  bool ok() const { return success.has_value(); }
};

/// 4-dimensional lattice containing (D^2, D*e0, D*e1, e0^2) for every seed
/// u0 = w0 + e0 consistent with the observation. A0 and A1 are the reduced
/// coefficients of the underlying congruence; the scaled rows solve it via
/// the unit coefficient on the third coordinate. Volume D^4 * p.
inline LatticeBasis build_attack_lattice_L(const AttackInstance& inst) {
  const Observation& obs = inst.obs;
  const Int& p = obs.params().p();
  const Int& d = obs.delta();
  if (d * d * d * d >= p) throw DeltaTooLargeError("attack lattice requires delta^4 < p");
  const Int a0 = nonneg_mod(obs.params().a() * obs.w0() * obs.w0() + obs.params().c() - obs.w1(), p);
  const Int a1 = nonneg_mod(2 * obs.params().a() * obs.w0(), p);
  return LatticeBasis{{
      {d * d, 0, d * a0, 0},
      {0, d, d * a1, 0},
      {0, 0, d * p, 0},
      {0, 0, d * obs.params().a(), 1},
  }};
}

/// 3-dimensional lattice containing (D^3, D^2*e0, r*e0^2 - s*e1) for the
/// coprime pair r = a*s (mod p). Volume D^5 * p.
inline LatticeBasis build_attack_lattice_Lprime(const AttackInstance& inst, const Int& r,
                                                const Int& s) {
  const Observation& obs = inst.obs;
  const Int& p = obs.params().p();
  const Int& d = obs.delta();
  Int g;
  mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), s.get_mpz_t());
  if (g != 1) throw BadRSError("r and s must be coprime");
  if (nonneg_mod(s, p) == 0) throw BadRSError("s must be nonzero mod p");
  if (nonneg_mod(r - obs.params().a() * s, p) != 0)
    throw BadRSError("r = a*s (mod p) is required");
  const Int b0 = nonneg_mod(r * obs.w0() * obs.w0() + s * obs.params().c() - s * obs.w1(), p);
  const Int b1 = nonneg_mod(2 * r * obs.w0(), p);
  return LatticeBasis{{
      {d * d * d, 0, nonneg_mod(-b0, p)},
      {0, d * d, nonneg_mod(-b1, p)},
      {0, 0, p},
  }};
}

namespace detail {

// Component scales of the attack lattices are structural (every basis entry
// of a column carries the factor), so these divisions are always exact.
inline Int scaled_component(const Int& x, const Int& scale) {
  if (!mpz_divisible_p(x.get_mpz_t(), scale.get_mpz_t()))
    throw Error("attack lattice vector lost its column scaling");
  Int q;
  mpz_divexact(q.get_mpz_t(), x.get_mpz_t(), scale.get_mpz_t());
  return q;
}

}  // namespace detail

/// Six-stage seed recovery. Shortest vector of the first lattice; direct
/// ratio recovery when its leading component f0 is nonzero; otherwise the
/// coprime pair (r, s), the second lattice, and parallel-vector
/// reconstruction. Every candidate is verified against the observation
/// before being reported as success.
inline AttackResult recover_seed(const AttackInstance& inst) {
  const Observation& obs = inst.obs;
  const Int& p = obs.params().p();
  const Int& a = obs.params().a();
  const Int& d = obs.delta();

  AttackResult res;
  res.trace.parallel_bound_proven = (21 * d * d * d < p);
  if (d * d * d * d >= p) {
    res.failure = FailureReason::DeltaTooLarge;
    return res;
  }

  auto verify = [&](const Int& eps0, Branch br) {
    const Int u0 = nonneg_mod(obs.w0() + eps0, p);
    const Int u1 = step(obs.params(), u0);
    if (abs(u0 - obs.w0()) <= d && abs(u1 - obs.w1()) <= d)
      res.success = AttackSuccess{u0, u1, br};
    else
      res.failure = FailureReason::VerificationMismatch;
  };

  const LatticeBasis lat = build_attack_lattice_L(inst);
  res.trace.a0 = detail::scaled_component(lat.rows[0][2], d);
  res.trace.a1 = detail::scaled_component(lat.rows[1][2], d);

  const IntVec fraw = shortest_vector(lat);
  const std::array<Int, 4> f = {
      detail::scaled_component(fraw[0], d * d),
      detail::scaled_component(fraw[1], d),
      detail::scaled_component(fraw[2], d),
      fraw[3],
  };
  res.trace.f = f;

  if (f[0] != 0) {
    res.trace.branch = Branch::F0Nonzero;
    if (!mpz_divisible_p(f[1].get_mpz_t(), f[0].get_mpz_t())) {
      res.failure = FailureReason::NonIntegralEpsilon;
      return res;
    }
    Int eps0;
    mpz_divexact(eps0.get_mpz_t(), f[1].get_mpz_t(), f[0].get_mpz_t());
    if (abs(eps0) > d) {
      res.failure = FailureReason::EpsilonOutOfBound;
      return res;
    }
    verify(eps0, Branch::F0Nonzero);
    return res;
  }

  res.trace.branch = Branch::F0Zero;
  if (f[1] != 0) {
    res.failure = FailureReason::ExceptionalD1Nonzero;
    return res;
  }
  // With f0 = f1 = 0 an honest instance forces f2 and f3 both nonzero, and
  // f2 = a*f3 (mod p) carries over to r = a*s. Inconsistent observations can
  // break any of these; a usable second lattice then does not exist.
  if (f[2] == 0 || f[3] == 0) {
    res.failure = FailureReason::NonParallelShortVector;
    return res;
  }
  Int g;
  mpz_gcd(g.get_mpz_t(), f[2].get_mpz_t(), f[3].get_mpz_t());
  Int r, s;
  mpz_divexact(r.get_mpz_t(), f[2].get_mpz_t(), g.get_mpz_t());
  mpz_divexact(s.get_mpz_t(), f[3].get_mpz_t(), g.get_mpz_t());
  res.trace.r = r;
  res.trace.s = s;
  if (nonneg_mod(s, p) == 0 || nonneg_mod(r - a * s, p) != 0) {
    res.failure = FailureReason::NonParallelShortVector;
    return res;
  }

  const LatticeBasis lat2 = build_attack_lattice_Lprime(inst, r, s);
  res.trace.b0 = nonneg_mod(-lat2.rows[0][2], p);
  res.trace.b1 = nonneg_mod(-lat2.rows[1][2], p);

  const IntVec fraw2 = shortest_vector(lat2);
  const std::array<Int, 3> fp = {
      detail::scaled_component(fraw2[0], d * d * d),
      detail::scaled_component(fraw2[1], d * d),
      fraw2[2],
  };
  res.trace.f_prime = fp;

  if (fp[0] == 0) {
    res.failure = FailureReason::NonParallelShortVector;
    return res;
  }
  if (!mpz_divisible_p(fp[1].get_mpz_t(), fp[0].get_mpz_t())) {
    res.failure = FailureReason::NonIntegralEpsilon;
    return res;
  }
  Int eps0;
  mpz_divexact(eps0.get_mpz_t(), fp[1].get_mpz_t(), fp[0].get_mpz_t());
  if (abs(eps0) > d) {
    res.failure = FailureReason::EpsilonOutOfBound;
    return res;
  }
  verify(eps0, Branch::F0Zero);
  return res;
}

}  // namespace quadlat
