#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "quadlat/errors.hpp"
#include "quadlat/modarith.hpp"

namespace quadlat {

using IntVec = std::vector<Int>;
using IntMat = std::vector<IntVec>;

inline Int dot(const IntVec& x, const IntVec& y) {
  if (x.size() != y.size()) throw DimensionMismatchError("dot: length mismatch");
  Int acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

inline Int norm2(const IntVec& x) { return dot(x, x); }

/// Row-basis of a full-rank integer lattice: the lattice is the set of all
/// integer combinations of the rows.
struct LatticeBasis {
  IntMat rows;
  std::size_t dim() const { return rows.size(); }
};

/// One congruence sum_i coeffs[i]*x_i = 0 (mod modulus).
struct Congruence {
  IntVec coeffs;
  Int modulus;
};

/// { x in Z^dim : every congruence holds }. Always a full-rank lattice since
/// it contains (prod moduli)*Z^dim.
struct CongruenceSystem {
  std::size_t dim = 0;
  std::vector<Congruence> congruences;
};

namespace detail {

inline void require_square(const LatticeBasis& basis) {
  if (basis.rows.empty()) throw DimensionMismatchError("lattice basis is empty");
  for (const auto& row : basis.rows)
    if (row.size() != basis.rows.size())
      throw DimensionMismatchError("lattice basis must be square");
}

inline Int floor_rat(const Rat& q) {
  Int out;
  mpz_fdiv_q(out.get_mpz_t(), mpq_numref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()));
  return out;
}

// Nearest integer, halves rounded up. |q - round_half_up(q)| <= 1/2.
inline Int round_half_up(const Rat& q) { return floor_rat(q + Rat(1, 2)); }

}  // namespace detail

/// Exact determinant by fraction-free (Bareiss) elimination; every division
/// below is exact by construction.
inline Int determinant(IntMat m) {
  const std::size_t n = m.size();
  if (n == 0) throw DimensionMismatchError("determinant of an empty matrix");
  for (const auto& row : m)
    if (row.size() != n) throw DimensionMismatchError("determinant needs a square matrix");
  int sign = 1;
  Int prev(1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t piv = k + 1;
      while (piv < n && m[piv][k] == 0) ++piv;
      if (piv == n) return Int(0);
      std::swap(m[k], m[piv]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Int t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        mpz_divexact(m[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return sign < 0 ? Int(-m[n - 1][n - 1]) : m[n - 1][n - 1];
}

/// |det| of the rows; the lattice volume in the full-rank case.
inline Int volume(const LatticeBasis& basis) {
  detail::require_square(basis);
  Int d = determinant(basis.rows);
  if (d == 0) throw SingularBasisError("volume: rows are linearly dependent");
  return abs(d);
}

/// Minkowski's bound sqrt(s) * vol^(1/s) on the shortest nonzero vector,
/// computed at 320-bit float precision (far beyond the 10 significant digits
/// promised to callers).
inline mpf_class minkowski_bound(const LatticeBasis& basis) {
  const Int vol = volume(basis);
  const unsigned long s = static_cast<unsigned long>(basis.dim());
  const mp_bitcnt_t prec = 320;

  // vol^(1/s) by Newton iteration seeded just above the integer root; the
  // iterates decrease monotonically onto the root.
  Int iroot;
  mpz_root(iroot.get_mpz_t(), vol.get_mpz_t(), s);
  iroot += 1;
  mpf_class x(0, prec), target(0, prec), prev(0, prec);
  mpf_set_z(x.get_mpf_t(), iroot.get_mpz_t());
  mpf_set_z(target.get_mpf_t(), vol.get_mpz_t());
  for (int iter = 0; iter < 400; ++iter) {
    prev = x;
    mpf_class pw(1, prec);
    for (unsigned long k = 0; k + 1 < s; ++k) pw *= x;
    x = (mpf_class(s - 1) * x + target / pw) / s;
    if (x >= prev) {
      x = prev;
      break;
    }
  }
  mpf_class root_s(0, prec);
  mpf_sqrt_ui(root_s.get_mpf_t(), s);
  return root_s * x;
}

namespace detail {

// Gram-Schmidt data for a row basis: mu[i][j] (j < i) and the squared norms
// b2[i] of the orthogonalized rows, all exact rationals.
struct Gso {
  std::vector<std::vector<Rat>> mu;
  std::vector<Rat> b2;
};

inline Gso gram_schmidt(const IntMat& rows) {
  const std::size_t n = rows.size();
  std::vector<std::vector<Rat>> star(n, std::vector<Rat>(n));
  Gso g;
  g.mu.resize(n);
  g.b2.assign(n, Rat(0));
  for (std::size_t i = 0; i < n; ++i) {
    g.mu[i].assign(i, Rat(0));
    for (std::size_t t = 0; t < n; ++t) star[i][t] = Rat(rows[i][t]);
    for (std::size_t j = 0; j < i; ++j) {
      Rat d(0);
      for (std::size_t t = 0; t < n; ++t) d += Rat(rows[i][t]) * star[j][t];
      g.mu[i][j] = d / g.b2[j];
      for (std::size_t t = 0; t < n; ++t) star[i][t] -= g.mu[i][j] * star[j][t];
    }
    for (std::size_t t = 0; t < n; ++t) g.b2[i] += star[i][t] * star[i][t];
    if (g.b2[i] == 0) throw SingularBasisError("rows are linearly dependent");
  }
  return g;
}

struct ReducedBasis {
  IntMat rows;
  Gso gso;
};

// Exact-rational LLL with incrementally maintained GSO (swap updates as in
// Cohen, Alg. 2.6.3).
inline ReducedBasis lll_with_gso(IntMat rows, const Rat& delta) {
  const std::size_t n = rows.size();
  Gso g = gram_schmidt(rows);
  const Rat half(1, 2);

  auto size_reduce = [&](std::size_t k, std::size_t j) {
    if (g.mu[k][j] <= half && g.mu[k][j] >= -half) return;
    const Int q = round_half_up(g.mu[k][j]);
    for (std::size_t t = 0; t < n; ++t) rows[k][t] -= q * rows[j][t];
    for (std::size_t t = 0; t < j; ++t) g.mu[k][t] -= q * g.mu[j][t];
    g.mu[k][j] -= q;
  };

  std::size_t k = 1;
  while (k < n) {
    size_reduce(k, k - 1);
    if (g.b2[k] < (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.b2[k - 1]) {
      const Rat mu = g.mu[k][k - 1];
      const Rat bnew = g.b2[k] + mu * mu * g.b2[k - 1];
      g.mu[k][k - 1] = mu * g.b2[k - 1] / bnew;
      g.b2[k] = g.b2[k - 1] * g.b2[k] / bnew;
      g.b2[k - 1] = bnew;
      std::swap(rows[k], rows[k - 1]);
      for (std::size_t j = 0; j + 1 < k; ++j) std::swap(g.mu[k][j], g.mu[k - 1][j]);
      for (std::size_t i = k + 1; i < n; ++i) {
        const Rat t = g.mu[i][k];
        g.mu[i][k] = g.mu[i][k - 1] - mu * t;
        g.mu[i][k - 1] = t + g.mu[k][k - 1] * g.mu[i][k];
      }
      k = (k > 1) ? k - 1 : 1;
    } else {
      for (std::size_t j = k - 1; j-- > 0;) size_reduce(k, j);
      ++k;
    }
  }
  return {std::move(rows), std::move(g)};
}

}  // namespace detail

/// delta-LLL reduction (size-reduced + Lovasz condition), exact rational
/// arithmetic throughout. Output spans the same lattice.
inline LatticeBasis lll_reduce(const LatticeBasis& basis, const Rat& delta = Rat(99, 100)) {
  detail::require_square(basis);
  if (!(delta > Rat(1, 4) && delta < 1))
    throw OutOfRangeError("lll_reduce: delta must lie in (1/4, 1)");
  return LatticeBasis{detail::lll_with_gso(basis.rows, delta).rows};
}

/// Flips the sign so the first nonzero component is positive.
inline IntVec canonical_sign(IntVec v) {
  for (const Int& c : v) {
    if (c != 0) {
      if (c < 0)
        for (Int& x : v) x = -x;
      break;
    }
  }
  return v;
}

/// Deterministic tie-break order: compare components from the last one down.
inline bool colex_less(const IntVec& x, const IntVec& y) {
  for (std::size_t j = x.size(); j-- > 0;)
    if (x[j] != y[j]) return x[j] < y[j];
  return false;
}

namespace detail {

// Exact Fincke-Pohst enumeration below an inclusive squared-norm radius.
// Levels run from n-1 down to 0; at each level the integer nearest the GSO
// center is tried first, so a failing first try proves the level empty.
struct SvpSearch {
  const IntMat& rows;
  const Gso& gso;
  std::size_t n;
  std::vector<Int> x;
  Rat radius;
  IntVec best;
  Int best_norm;

  SvpSearch(const IntMat& rows_, const Gso& gso_)
      : rows(rows_), gso(gso_), n(rows_.size()), x(rows_.size(), Int(0)) {}

  void offer() {
    IntVec v(n, Int(0));
    bool zero = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 0) continue;
      zero = false;
      for (std::size_t t = 0; t < n; ++t) v[t] += x[i] * rows[i][t];
    }
    if (zero) return;
    const Int nn = norm2(v);
    if (nn > best_norm) return;
    IntVec canon = canonical_sign(std::move(v));
    if (nn < best_norm || colex_less(canon, best)) {
      best = std::move(canon);
      best_norm = nn;
      radius = Rat(best_norm);
    }
  }

  void descend(std::size_t j, const Rat& used) {
    Rat y(0);
    for (std::size_t i = j + 1; i < n; ++i)
      if (x[i] != 0) y += Rat(x[i]) * gso.mu[i][j];
    auto attempt = [&](const Int& t) {
      const Rat d = Rat(t) + y;
      const Rat cost = used + gso.b2[j] * d * d;
      if (cost > radius) return false;
      x[j] = t;
      if (j == 0)
        offer();
      else
        descend(j - 1, cost);
      return true;
    };
    const Int t0 = round_half_up(-y);
    if (attempt(t0)) {
      for (Int t = t0 + 1; attempt(t); t += 1) {
      }
      for (Int t = t0 - 1; attempt(t); t -= 1) {
      }
    }
    x[j] = 0;
  }
};

}  // namespace detail

/// A nonzero lattice vector of exactly minimal Euclidean norm. Ties are
/// broken deterministically: sign-canonicalize, then take the colex-smallest
/// (identity basis in dimension 4 yields (1,0,0,0)). LLL preprocessing sets
/// the enumeration radius, so the search provably covers a shortest vector.
inline IntVec shortest_vector(const LatticeBasis& basis) {
  detail::require_square(basis);
  if (basis.dim() > 8) throw OutOfRangeError("shortest_vector: dimension capped at 8");
  const auto red = detail::lll_with_gso(basis.rows, Rat(99, 100));

  detail::SvpSearch search(red.rows, red.gso);
  for (const auto& row : red.rows) {
    Int nn = norm2(row);
    IntVec canon = canonical_sign(row);
    if (search.best.empty() || nn < search.best_norm ||
        (nn == search.best_norm && colex_less(canon, search.best))) {
      search.best = std::move(canon);
      search.best_norm = nn;
    }
  }
  search.radius = Rat(search.best_norm);
  search.descend(search.n - 1, Rat(0));
  return search.best;
}

namespace detail {

struct HnfResult {
  IntMat h;        // row-echelon Hermite form, pivots positive, entries above
                   // a pivot reduced into [0, pivot)
  IntMat u;        // unimodular transform: u * input = h
  std::size_t rank = 0;
};

inline HnfResult hnf_with_transform(IntMat m) {
  const std::size_t nrows = m.size();
  const std::size_t ncols = nrows == 0 ? 0 : m[0].size();
  IntMat u(nrows, IntVec(nrows, Int(0)));
  for (std::size_t i = 0; i < nrows; ++i) u[i][i] = 1;

  auto row_sub = [&](std::size_t dst, std::size_t src, const Int& q) {
    if (q == 0) return;
    for (std::size_t t = 0; t < ncols; ++t) m[dst][t] -= q * m[src][t];
    for (std::size_t t = 0; t < nrows; ++t) u[dst][t] -= q * u[src][t];
  };
  auto negate_row = [&](std::size_t i) {
    for (auto& v : m[i]) v = -v;
    for (auto& v : u[i]) v = -v;
  };

  std::size_t r = 0;
  for (std::size_t col = 0; col < ncols && r < nrows; ++col) {
    // Euclidean descent: smallest nonzero |entry| becomes the pivot until it
    // divides everything below it away.
    while (true) {
      std::size_t piv = nrows;
      for (std::size_t i = r; i < nrows; ++i)
        if (m[i][col] != 0 &&
            (piv == nrows || mpz_cmpabs(m[i][col].get_mpz_t(), m[piv][col].get_mpz_t()) < 0))
          piv = i;
      if (piv == nrows) break;
      if (piv != r) {
        std::swap(m[piv], m[r]);
        std::swap(u[piv], u[r]);
      }
      if (m[r][col] < 0) negate_row(r);
      bool cleared = true;
      for (std::size_t i = r + 1; i < nrows; ++i) {
        if (m[i][col] == 0) continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), m[i][col].get_mpz_t(), m[r][col].get_mpz_t());
        row_sub(i, r, q);
        if (m[i][col] != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (r < nrows && m[r][col] != 0) {
      for (std::size_t i = 0; i < r; ++i) {
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), m[i][col].get_mpz_t(), m[r][col].get_mpz_t());
        row_sub(i, r, q);
      }
      ++r;
    }
  }
  HnfResult out;
  out.h = std::move(m);
  out.u = std::move(u);
  out.rank = r;
  return out;
}

}  // namespace detail

/// Basis of { x in Z^s : sum_i coeffs[i]*x_i = 0 (mod q_j) for all j }.
/// Each congruence j with modulus q_j contributes a slack unknown k_j; the
/// solutions are the projection of the integer kernel of [A | diag(q)] onto
/// the x block, extracted from the unimodular transform of a Hermite-form
/// computation and canonicalized by a second Hermite pass.
inline LatticeBasis congruence_lattice_basis(const CongruenceSystem& sys) {
  const std::size_t s = sys.dim;
  const std::size_t m = sys.congruences.size();
  if (s == 0) throw DimensionMismatchError("congruence system has dimension 0");
  for (const auto& c : sys.congruences) {
    if (c.coeffs.size() != s)
      throw DimensionMismatchError("congruence coefficient count != system dimension");
    if (c.modulus < 1) throw OutOfRangeError("congruence modulus must be >= 1");
  }

  // Rows of mt are the coordinates of (x, k); columns are the m exact linear
  // relations A x + diag(q) k = 0.
  IntMat mt(s + m, IntVec(m, Int(0)));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < s; ++i) mt[i][j] = sys.congruences[j].coeffs[i];
    mt[s + j][j] = sys.congruences[j].modulus;
  }
  const auto hr = detail::hnf_with_transform(std::move(mt));

  IntMat sol;
  sol.reserve(s + m - hr.rank);
  for (std::size_t i = hr.rank; i < s + m; ++i)
    sol.emplace_back(hr.u[i].begin(), hr.u[i].begin() + static_cast<std::ptrdiff_t>(s));
  auto canon = detail::hnf_with_transform(std::move(sol));
  if (canon.rank != s)
    throw SingularBasisError("congruence solution lattice is not full rank");
  canon.h.resize(s);
  return LatticeBasis{std::move(canon.h)};
}

/// Membership test: v is an integer combination of the rows (exact rational
/// solve, then integrality of the coefficients).
inline bool contains(const LatticeBasis& basis, const IntVec& v) {
  detail::require_square(basis);
  const std::size_t n = basis.dim();
  if (v.size() != n) throw DimensionMismatchError("contains: vector length != dimension");

  std::vector<std::vector<Rat>> aug(n, std::vector<Rat>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = Rat(basis.rows[j][i]);
    aug[i][n] = Rat(v[i]);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && aug[piv][col] == 0) ++piv;
    if (piv == n) throw SingularBasisError("contains: basis is singular");
    std::swap(aug[piv], aug[col]);
    for (std::size_t i = col + 1; i < n; ++i) {
      if (aug[i][col] == 0) continue;
      const Rat f = aug[i][col] / aug[col][col];
      for (std::size_t j = col; j <= n; ++j) aug[i][j] -= f * aug[col][j];
    }
  }
  std::vector<Rat> xs(n);
  for (std::size_t col = n; col-- > 0;) {
    Rat acc = aug[col][n];
    for (std::size_t j = col + 1; j < n; ++j) acc -= aug[col][j] * xs[j];
    xs[col] = acc / aug[col][col];
    if (xs[col].get_den() != 1) return false;
  }
  return true;
}

}  // namespace quadlat
