#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "quadlat/attack.hpp"
#include "quadlat/errors.hpp"
#include "quadlat/generator.hpp"
#include "quadlat/oracle.hpp"
#include "quadlat/rng.hpp"

namespace quadlat {

enum class TrialMode { RandomOffset, TruncateLowBits, ZeroError };

inline const char* to_string(TrialMode m) {
  switch (m) {
    case TrialMode::RandomOffset: return "random_offset";
    case TrialMode::TruncateLowBits: return "truncate_low_bits";
    case TrialMode::ZeroError: return "zero_error";
  }
  return "?";
}

/// delta = floor(p^alpha) for a rational alpha in (0, 1/4], evaluated
/// exactly: floor((p^num)^(1/den)).
inline Int delta_from_alpha(const Int& p, const Rat& alpha) {
  if (alpha <= 0 || alpha > Rat(1, 4)) throw OutOfRangeError("alpha must lie in (0, 1/4]");
  const Int num = alpha.get_num();
  const Int den = alpha.get_den();
  if (den > 4096) throw OutOfRangeError("alpha denominator too large for exact evaluation");
  Int pn, d;
  mpz_pow_ui(pn.get_mpz_t(), p.get_mpz_t(), num.get_ui());
  mpz_root(d.get_mpz_t(), pn.get_mpz_t(), den.get_ui());
  return d;
}

struct TrialConfig {
  Int p;
  std::optional<Int> a;  // fixed, else drawn per trial
  std::optional<Int> c;  // fixed, else drawn per trial
  Int delta;
  std::uint64_t trials = 0;
  std::uint64_t rng_seed = 0;
  TrialMode mode = TrialMode::RandomOffset;
  unsigned jobs = 1;
  bool timing = false;  // stamp micros with wall time; off keeps byte-stable output
  bool audit = false;   // on non-recovery rows, count the delta-consistent seeds
};

/// "Success" is reserved for recovering exactly the planted seed; an attack
/// that verified some other consistent seed reports "SuccessWrongSeed".
struct TrialRow {
  std::uint64_t trial = 0;
  Int p, a, c, delta, u0_true;
  std::optional<Branch> branch;
  std::string outcome;
  std::optional<Int> u0_recovered;
  std::int64_t micros = 0;
  std::optional<std::uint64_t> consistent_count;  // audit mode only
};

struct TrialReport {
  TrialConfig config;
  std::vector<TrialRow> rows;
  std::uint64_t successes = 0;
};

/// Seeded trial batch: per trial, draw (a, c, u0) as configured, observe two
/// consecutive states, attack, and record the outcome. Every trial derives
/// its own RNG stream from (rng_seed, trial index), so results are identical
/// for any jobs value.
inline TrialReport run_trials(const TrialConfig& cfg) {
  const FieldPrime field(cfg.p);
  const Int& p = cfg.p;
  if (cfg.delta < 1 || cfg.delta * cfg.delta * cfg.delta * cfg.delta >= p)
    throw BadDeltaError("trials require 1 <= delta and delta^4 < p");
  if (cfg.a && (*cfg.a < 1 || *cfg.a >= p)) throw OutOfRangeError("a must lie in [1, p)");
  if (cfg.c && (*cfg.c < 0 || *cfg.c >= p)) throw OutOfRangeError("c must lie in [0, p)");

  TrialReport rep{cfg, std::vector<TrialRow>(cfg.trials), 0};

  auto run_one = [&](std::uint64_t k) {
    SeededRng rng(derive_seed(cfg.rng_seed, k));
    const Int a = cfg.a ? *cfg.a : rng.in_range(1, p - 1);
    const Int c = cfg.c ? *cfg.c : rng.in_range(0, p - 1);
    const Int u0 = rng.in_range(0, p - 1);
    const GenParams params(field, a, c);
    const StateSequence seq = run(params, u0, 1);

    Observation obs = [&] {
      switch (cfg.mode) {
        case TrialMode::TruncateLowBits:
          return observe(seq, cfg.delta, ObserveMode::TruncateLowBits);
        case TrialMode::RandomOffset:
          return observe(seq, cfg.delta, ObserveMode::RandomOffset, rng.next_u64());
        case TrialMode::ZeroError:
        default:
          return Observation(params, seq.terms[0], seq.terms[1], cfg.delta);
      }
    }();

    const auto t0 = std::chrono::steady_clock::now();
    const AttackResult res = recover_seed(AttackInstance{obs});
    const auto t1 = std::chrono::steady_clock::now();

    TrialRow& row = rep.rows[k];
    row.trial = k;
    row.p = p;
    row.a = a;
    row.c = c;
    row.delta = cfg.delta;
    row.u0_true = u0;
    row.branch = res.trace.branch;
    if (cfg.timing)
      row.micros = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
    bool correct = false;
    if (res.ok()) {
      row.u0_recovered = res.success->u0;
      correct = (res.success->u0 == u0);
      row.outcome = correct ? "Success" : "SuccessWrongSeed";
    } else {
      row.outcome = to_string(*res.failure);
    }
    if (cfg.audit && !correct)
      row.consistent_count = consistent_seeds(obs).seeds.size();
  };

  const unsigned jobs = cfg.jobs == 0 ? 1 : cfg.jobs;
  if (jobs <= 1 || cfg.trials < 2) {
    for (std::uint64_t k = 0; k < cfg.trials; ++k) run_one(k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        for (std::uint64_t k = t; k < cfg.trials; k += jobs) run_one(k);
      });
    for (auto& th : pool) th.join();
  }

  for (const auto& row : rep.rows)
    if (row.outcome == "Success") ++rep.successes;
  return rep;
}

/// Fixed-schema CSV; absent values (branch before it was chosen, recovered
/// seed on failure) serialize as empty fields.
inline void write_trials_csv(std::ostream& os, const TrialReport& rep) {
  os << "trial,p,a,c,delta,u0_true,branch,outcome,u0_recovered,micros\n";
  for (const auto& row : rep.rows) {
    os << row.trial << ',' << row.p << ',' << row.a << ',' << row.c << ',' << row.delta << ','
       << row.u0_true << ',' << (row.branch ? to_string(*row.branch) : "") << ',' << row.outcome
       << ',' << (row.u0_recovered ? row.u0_recovered->get_str() : "") << ',' << row.micros
       << '\n';
  }
}

}  // namespace quadlat
