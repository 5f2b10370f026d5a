#pragma once

#include <gmpxx.h>

#include <utility>

#include "quadlat/errors.hpp"

namespace quadlat {

using Int = mpz_class;
using Rat = mpq_class;

/// x mod m, reduced into [0, m). Requires m >= 1.
inline Int nonneg_mod(const Int& x, const Int& m) {
  Int r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return r;
}

namespace detail {

inline bool miller_rabin_round(const Int& n, const Int& base, const Int& odd_part,
                               unsigned long two_exp) {
  Int x;
  mpz_powm(x.get_mpz_t(), base.get_mpz_t(), odd_part.get_mpz_t(), n.get_mpz_t());
  if (x == 1 || x == n - 1) return true;
  for (unsigned long i = 1; i < two_exp; ++i) {
    x = nonneg_mod(x * x, n);
    if (x == n - 1) return true;
    if (x == 1) return false;
  }
  return false;
}

}  // namespace detail

/// Primality test. Deterministic Miller-Rabin for n < 2^64 (the witness set
/// {2,...,37} is known to be exact in that range); GMP's probabilistic test
/// with 40 rounds above 2^64.
inline bool is_prime(const Int& n) {
  if (n < 2) return false;
  static const int small_primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (int q : small_primes) {
    if (n == q) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(q))) return false;
  }
  if (mpz_sizeinbase(n.get_mpz_t(), 2) > 64)
    return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
  Int odd_part = n - 1;
  unsigned long two_exp = mpz_scan1(odd_part.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(odd_part.get_mpz_t(), odd_part.get_mpz_t(), two_exp);
  for (int a : small_primes) {
    if (!detail::miller_rabin_round(n, Int(a), odd_part, two_exp)) return false;
  }
  return true;
}

/// The prime field F_p, p >= 3. Construction validates primality.
class FieldPrime {
 public:
  explicit FieldPrime(Int p) : p_(std::move(p)) {
    if (p_ < 3) throw NotPrimeError("FieldPrime: p must be >= 3, got " + p_.get_str());
    if (!is_prime(p_)) throw NotPrimeError("FieldPrime: " + p_.get_str() + " is not prime");
  }

  const Int& p() const { return p_; }

  friend bool operator==(const FieldPrime& lhs, const FieldPrime& rhs) {
    return lhs.p_ == rhs.p_;
  }

 private:
  Int p_;
};

/// Public parameters of the quadratic congruential generator
/// u_{n+1} = a*u_n^2 + c (mod p): the multiplier a and the shift c.
class GenParams {
 public:
  GenParams(FieldPrime field, Int a, Int c)
      : field_(std::move(field)), a_(std::move(a)), c_(std::move(c)) {
    if (a_ < 1 || a_ >= field_.p())
      throw OutOfRangeError("GenParams: a must lie in [1, p)");
    if (c_ < 0 || c_ >= field_.p())
      throw OutOfRangeError("GenParams: c must lie in [0, p)");
  }

  const FieldPrime& field() const { return field_; }
  const Int& p() const { return field_.p(); }
  const Int& a() const { return a_; }
  const Int& c() const { return c_; }

 private:
  FieldPrime field_;
  Int a_;
  Int c_;
};

/// Inverse of x modulo the field prime. Throws ZeroInverseError when x = 0 (mod p).
inline Int mod_inv(const Int& x, const FieldPrime& field) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), field.p().get_mpz_t()) == 0)
    throw ZeroInverseError("mod_inv: no inverse of " + x.get_str() + " mod " +
                           field.p().get_str());
  return r;
}

struct GcdExt {
  Int g;  // gcd(x, y) >= 0
  Int u;  // Bezout coefficient of x
  Int v;  // Bezout coefficient of y
};

/// Extended gcd: returns (g, u, v) with u*x + v*y = g = gcd(x, y) >= 0.
inline GcdExt gcd_ext(const Int& x, const Int& y) {
  if (x == 0 && y == 0) throw BothZeroError("gcd_ext(0, 0) is undefined");
  GcdExt r;
  mpz_gcdext(r.g.get_mpz_t(), r.u.get_mpz_t(), r.v.get_mpz_t(), x.get_mpz_t(),
             y.get_mpz_t());
  return r;
}

/// Representative of x mod m in the centered window (-m/2, m/2]. Requires m >= 1.
inline Int centered_residue(const Int& x, const Int& m) {
  if (m < 1) throw OutOfRangeError("centered_residue: modulus must be >= 1");
  Int r = nonneg_mod(x, m);
  if (2 * r > m) r -= m;
  return r;
}

}  // namespace quadlat
