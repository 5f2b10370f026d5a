#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "quadlat/attack.hpp"
#include "quadlat/errors.hpp"
#include "quadlat/generator.hpp"
#include "quadlat/rng.hpp"

namespace quadlat {

/// All seeds in [0, p) compatible with an observation: |u - w0| <= delta and
/// |step(u) - w1| <= delta, both as plain integer distances.
struct ConsistentSeedSet {
  Observation obs;
  std::vector<Int> seeds;  // ascending
};

/// O(delta) enumeration of the candidate window around w0. Candidates that
/// would leave [0, p) are skipped: a reduced representative can no longer be
/// within delta of w0.
inline ConsistentSeedSet consistent_seeds(const Observation& obs) {
  const Int& p = obs.params().p();
  const Int& d = obs.delta();
  ConsistentSeedSet out{obs, {}};
  for (Int eps = -d; eps <= d; ++eps) {
    const Int u = obs.w0() + eps;
    if (u < 0 || u >= p) continue;
    if (abs(step(obs.params(), u) - obs.w1()) <= d) out.seeds.push_back(u);
  }
  return out;
}

enum class CensusMode { ZeroError, RandomOffset };

inline const char* to_string(CensusMode m) {
  return m == CensusMode::ZeroError ? "zero_error" : "random_offset";
}

/// One audited non-recovery: the attack either failed or verified a seed
/// other than the planted one.
struct FailureRecord {
  Int u0;
  std::string outcome;  // failure-reason slug or "success_wrong_seed"
  std::optional<Int> recovered;
  std::uint64_t consistent_count = 0;
  StageTrace trace;
};

struct CensusRow {
  Int delta;
  Int total;
  Int successes;  // recovered exactly the planted seed
  Int failures;   // everything else; successes + failures = total
  Int ambiguous;  // seeds whose consistent set has more than one member
  std::map<std::string, std::uint64_t> reasons;
  std::vector<FailureRecord> records;
};

struct CensusReport {
  GenParams params;
  CensusMode mode;
  std::uint64_t rng_seed = 0;
  std::vector<CensusRow> rows;
};

/// Largest failures/delta^4 ratio across the rows: the constant K for which
/// the observed counts satisfy failures(delta) <= K * delta^4.
inline Rat fitted_k(const CensusReport& rep) {
  Rat k(0);
  for (const auto& row : rep.rows) {
    const Rat ratio = Rat(row.failures) / Rat(row.delta * row.delta * row.delta * row.delta);
    if (ratio > k) k = ratio;
  }
  return k;
}

/// Runs the attack on every seed of the field for each delta and tallies the
/// outcomes. Deterministic for a fixed rng_seed regardless of jobs: the
/// random-offset draws are derived per (delta, seed), and shards are merged
/// in seed order.
inline CensusReport attack_census(const GenParams& params, const std::vector<Int>& deltas,
                                  CensusMode mode, std::uint64_t rng_seed, unsigned jobs = 1,
                                  bool override_size_guard = false) {
  const Int& p = params.p();
  if (!override_size_guard && p > (Int(1) << 20))
    throw FieldTooLargeError("full census over p > 2^20 needs the explicit override");
  if (jobs == 0) jobs = 1;

  CensusReport rep{params, mode, rng_seed, {}};
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const Int& d = deltas[di];
    if (d < 1 || d >= p) throw BadDeltaError("census delta must lie in [1, p)");
    const std::uint64_t delta_stream = derive_seed(rng_seed, static_cast<std::uint64_t>(di));

    struct Shard {
      Int successes = 0, failures = 0, ambiguous = 0;
      std::map<std::string, std::uint64_t> reasons;
      std::vector<FailureRecord> records;
    };
    std::vector<Shard> shards(jobs);

    auto scan = [&](unsigned t) {
      Shard& sh = shards[t];
      const Int lo = p * t / jobs;
      const Int hi = p * (t + 1) / jobs;
      for (Int u0 = lo; u0 < hi; ++u0) {
        const Int u1 = step(params, u0);
        Int w0 = u0, w1 = u1;
        if (mode == CensusMode::RandomOffset) {
          SeededRng rng(derive_seed(delta_stream, mpz_get_ui(u0.get_mpz_t())));
          w0 -= rng.in_range(-d, d);
          w1 -= rng.in_range(-d, d);
        }
        const Observation obs(params, w0, w1, d);
        const AttackResult res = recover_seed(AttackInstance{obs});
        const std::uint64_t ccount = consistent_seeds(obs).seeds.size();
        if (ccount > 1) sh.ambiguous += 1;
        if (res.ok() && res.success->u0 == u0) {
          sh.successes += 1;
          continue;
        }
        sh.failures += 1;
        FailureRecord rec;
        rec.u0 = u0;
        rec.outcome = res.ok() ? "success_wrong_seed" : reason_slug(*res.failure);
        if (res.ok()) rec.recovered = res.success->u0;
        rec.consistent_count = ccount;
        rec.trace = res.trace;
        sh.reasons[rec.outcome] += 1;
        sh.records.push_back(std::move(rec));
      }
    };

    if (jobs == 1) {
      scan(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(jobs);
      for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(scan, t);
      for (auto& th : pool) th.join();
    }

    CensusRow row{d, p, 0, 0, 0, {}, {}};
    for (auto& sh : shards) {
      row.successes += sh.successes;
      row.failures += sh.failures;
      row.ambiguous += sh.ambiguous;
      for (const auto& [slug, n] : sh.reasons) row.reasons[slug] += n;
      row.records.insert(row.records.end(), std::make_move_iterator(sh.records.begin()),
                         std::make_move_iterator(sh.records.end()));
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// The first exceptional box: all seeds v solving 2*a*d1*v = E (mod p) with
/// E = a*(2*d1*eps0 - d3) + d2 over d1 != 0, |d1|, |d2| <= 4*delta,
/// |d3| <= 4*delta^2, |eps0| <= delta. Combinations whose leading
/// coefficient vanishes mod p pin no seed and are skipped.
inline std::set<Int> enumerate_exceptional_V(const GenParams& params, const Int& delta) {
  const Int& p = params.p();
  const Int& a = params.a();
  if (delta < 1) throw BadDeltaError("delta must be >= 1");
  if (delta > 4 || p > (Int(1) << 14))
    throw TooExpensiveError("exceptional-set enumeration is limited to delta <= 4 and p <= 2^14");

  std::vector<bool> hit(mpz_get_ui(p.get_mpz_t()), false);
  const Int b12 = 4 * delta;
  const Int b3 = 4 * delta * delta;
  for (Int d1 = -b12; d1 <= b12; ++d1) {
    if (d1 == 0) continue;
    const Int lead = nonneg_mod(2 * a * d1, p);
    if (lead == 0) continue;
    const Int inv = mod_inv(lead, params.field());
    for (Int eps = -delta; eps <= delta; ++eps) {
      for (Int d3 = -b3; d3 <= b3; ++d3) {
        const Int base = a * (2 * d1 * eps - d3);
        for (Int d2 = -b12; d2 <= b12; ++d2) {
          const Int v = nonneg_mod(nonneg_mod(base + d2, p) * inv, p);
          hit[mpz_get_ui(v.get_mpz_t())] = true;
        }
      }
    }
  }
  std::set<Int> out;
  for (std::size_t v = 0; v < hit.size(); ++v)
    if (hit[v]) out.insert(Int(static_cast<unsigned long>(v)));
  return out;
}

/// The second exceptional box for a coprime pair (r, s): seeds v solving
/// 2*r*d1*v = 2*r*eps0*d1 - d2 (mod p) over d1 != 0, |d1| <= 9*delta,
/// |d2| <= 21*delta^3, |eps0| <= delta.
inline std::set<Int> enumerate_exceptional_Vprime(const GenParams& params, const Int& delta,
                                                  const Int& r, const Int& s) {
  const Int& p = params.p();
  if (delta < 1) throw BadDeltaError("delta must be >= 1");
  if (delta > 3 || p > (Int(1) << 14))
    throw TooExpensiveError("exceptional-set enumeration is limited to delta <= 3 and p <= 2^14");
  Int g;
  mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), s.get_mpz_t());
  if (g != 1) throw BadRSError("r and s must be coprime");
  if (nonneg_mod(r, p) == 0) throw BadRSError("r must be nonzero mod p");

  std::vector<bool> hit(mpz_get_ui(p.get_mpz_t()), false);
  const Int b1 = 9 * delta;
  const Int b2 = 21 * delta * delta * delta;
  for (Int d1 = -b1; d1 <= b1; ++d1) {
    if (d1 == 0) continue;
    const Int lead = nonneg_mod(2 * r * d1, p);
    if (lead == 0) continue;
    const Int inv = mod_inv(lead, params.field());
    for (Int eps = -delta; eps <= delta; ++eps) {
      const Int base = 2 * r * eps * d1;
      for (Int d2 = -b2; d2 <= b2; ++d2) {
        const Int v = nonneg_mod(nonneg_mod(base - d2, p) * inv, p);
        hit[mpz_get_ui(v.get_mpz_t())] = true;
      }
    }
  }
  std::set<Int> out;
  for (std::size_t v = 0; v < hit.size(); ++v)
    if (hit[v]) out.insert(Int(static_cast<unsigned long>(v)));
  return out;
}

}  // namespace quadlat
