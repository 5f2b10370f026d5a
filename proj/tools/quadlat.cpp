#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "quadlat/attack.hpp"
#include "quadlat/experiments.hpp"
#include "quadlat/generator.hpp"
#include "quadlat/json_io.hpp"
#include "quadlat/lattice.hpp"
#include "quadlat/modarith.hpp"
#include "quadlat/oracle.hpp"

namespace {

using namespace quadlat;

Int parse_int(const std::string& s) {
  try {
    return Int(s, 10);
  } catch (const std::invalid_argument&) {
    throw OutOfRangeError("not a decimal integer: '" + s + "'");
  }
}

// Accepts "99/100", "0.25", or "3".
Rat parse_rat(const std::string& s) {
  if (s.find('/') != std::string::npos) {
    Rat q;
    if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
      throw OutOfRangeError("not a rational: '" + s + "'");
    q.canonicalize();
    return q;
  }
  const auto dot = s.find('.');
  if (dot == std::string::npos) return Rat(parse_int(s));
  const std::string ip = s.substr(0, dot);
  const std::string fp = s.substr(dot + 1);
  const Int num = parse_int((ip.empty() ? std::string("0") : ip) + fp);
  Int den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
  Rat q(num, den);
  q.canonicalize();
  return q;
}

unsigned default_jobs() {
  if (const char* env = std::getenv("QUADLAT_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Absent --rng-seed draws from entropy; the seed is always echoed so any run
// can be replayed exactly.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "rng_seed: " << s << '\n';
  return s;
}

Int sample_prime(unsigned bits, std::uint64_t seed) {
  if (bits < 2 || bits > 4096) throw OutOfRangeError("--bits must lie in [2, 4096]");
  SeededRng rng(derive_seed(seed, 0xb17503f5ULL));
  const Int half = Int(1) << (bits - 1);
  for (int tries = 0; tries < 400000; ++tries) {
    const Int cand = (half | rng.below(half)) | 1;
    if (cand >= 3 && is_prime(cand)) return cand;
  }
  throw Error("prime sampling did not converge");
}

GenParams make_params(const std::string& p, const std::string& a, const std::string& c) {
  return GenParams(FieldPrime(parse_int(p)), parse_int(a), parse_int(c));
}

int cmd_generate(const std::string& p, const std::string& a, const std::string& c,
                 const std::string& u0, std::uint64_t n) {
  const StateSequence seq = run(make_params(p, a, c), parse_int(u0), n);
  for (const Int& t : seq.terms) std::cout << t << '\n';
  return 0;
}

struct AttackOpts {
  std::string p, a, c, w0, w1, delta;
  bool trace = false;
  bool fallback = false;
};

int cmd_attack(const AttackOpts& o) {
  const Observation obs(make_params(o.p, o.a, o.c), parse_int(o.w0), parse_int(o.w1),
                        parse_int(o.delta));
  const AttackResult res = recover_seed(AttackInstance{obs});
  if (res.ok()) {
    std::cout << res.success->u0 << '\n';
    if (o.trace) std::cout << json_result(res).dump(2) << '\n';
    return 0;
  }
  std::cout << "FAILURE " << to_string(*res.failure) << '\n';
  if (o.trace) std::cout << json_result(res).dump(2) << '\n';
  if (o.fallback) {
    if (obs.delta() <= (Int(1) << 20)) {
      const ConsistentSeedSet cs = consistent_seeds(obs);
      std::cout << "candidates " << cs.seeds.size() << '\n';
      for (const Int& u : cs.seeds) std::cout << "candidate " << u << '\n';
      if (cs.seeds.size() == 1) {
        std::cout << "recovered " << cs.seeds[0] << '\n';
        return 0;
      }
    } else {
      std::cerr << "fallback skipped: delta exceeds the 2^20 brute-force guard\n";
    }
  }
  return *res.failure == FailureReason::DeltaTooLarge ? 2 : 1;
}

void emit(const std::string& out, const std::string& payload, const std::string& summary) {
  if (out == "-") {
    std::cout << payload;
    std::cerr << summary;
  } else {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw Error("cannot open output file: " + out);
    file << payload;
    std::cout << summary;
  }
}

struct TrialsOpts {
  std::optional<std::string> p;
  std::optional<unsigned> bits;
  std::optional<std::string> a, c;
  std::optional<std::string> delta, alpha;
  std::uint64_t trials = 100;
  std::optional<std::uint64_t> seed;
  std::string mode = "random";
  std::string format = "csv";
  std::string out = "-";
  unsigned jobs = 0;
  bool timing = false;
  bool audit = false;
};

TrialMode trial_mode_from(const std::string& m) {
  if (m == "random") return TrialMode::RandomOffset;
  if (m == "truncate") return TrialMode::TruncateLowBits;
  return TrialMode::ZeroError;
}

int cmd_trials(const TrialsOpts& o) {
  const std::uint64_t seed = resolve_seed(o.seed);
  TrialConfig cfg;
  cfg.p = o.p ? parse_int(*o.p) : sample_prime(*o.bits, seed);
  if (o.bits) std::cerr << "p: " << cfg.p << '\n';
  if (o.a) cfg.a = parse_int(*o.a);
  if (o.c) cfg.c = parse_int(*o.c);
  cfg.delta = o.delta ? parse_int(*o.delta) : delta_from_alpha(cfg.p, parse_rat(*o.alpha));
  if (o.alpha) std::cerr << "delta: " << cfg.delta << '\n';
  cfg.trials = o.trials;
  cfg.rng_seed = seed;
  cfg.mode = trial_mode_from(o.mode);
  cfg.jobs = o.jobs;
  cfg.timing = o.timing;
  cfg.audit = o.audit;

  const TrialReport rep = run_trials(cfg);

  std::ostringstream payload;
  if (o.format == "json")
    payload << json_trials(rep).dump(2) << '\n';
  else
    write_trials_csv(payload, rep);

  std::ostringstream summary;
  const double rate = cfg.trials == 0 ? 0.0 : 100.0 * static_cast<double>(rep.successes) /
                                                  static_cast<double>(cfg.trials);
  summary << "trials=" << cfg.trials << " successes=" << rep.successes << " rate=" << std::fixed
          << std::setprecision(4) << rate << "%\n";
  emit(o.out, payload.str(), summary.str());
  return 0;
}

struct CensusOpts {
  std::string p, a, c;
  std::vector<std::string> deltas;
  std::optional<std::uint64_t> seed;
  std::string mode = "zero";
  std::string format = "json";
  std::string out = "-";
  unsigned jobs = 0;
  bool override_guard = false;
};

int cmd_census(const CensusOpts& o) {
  const std::uint64_t seed = resolve_seed(o.seed);
  const GenParams params = make_params(o.p, o.a, o.c);
  std::vector<Int> deltas;
  deltas.reserve(o.deltas.size());
  for (const auto& s : o.deltas) deltas.push_back(parse_int(s));
  const CensusMode mode = o.mode == "random" ? CensusMode::RandomOffset : CensusMode::ZeroError;

  const CensusReport rep = attack_census(params, deltas, mode, seed, o.jobs, o.override_guard);

  std::ostringstream payload;
  if (o.format == "csv")
    write_census_csv(payload, rep);
  else
    payload << json_census(rep).dump(2) << '\n';

  std::ostringstream summary;
  summary << "fitted_k=" << format_rat(fitted_k(rep));
  for (const auto& row : rep.rows)
    summary << " delta=" << row.delta << ":failures=" << row.failures;
  summary << '\n';
  emit(o.out, payload.str(), summary.str());
  return 0;
}

struct LatticeOpts {
  std::string file;
  bool svp = false;
  bool reduce = false;
  std::string delta = "99/100";
};

int cmd_lattice(const LatticeOpts& o) {
  Json parsed;
  if (o.file == "-") {
    parsed = Json::parse(std::cin);
  } else {
    std::ifstream in(o.file);
    if (!in) throw Error("cannot open basis file: " + o.file);
    parsed = Json::parse(in);
  }
  const LatticeBasis basis = basis_from_json(parsed);

  auto print_row = [](const IntVec& row) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? " " : "") << row[i];
    std::cout << '\n';
  };
  if (o.svp) {
    print_row(shortest_vector(basis));
    std::cerr << "minkowski_bound: " << format_mpf(minkowski_bound(basis)) << '\n';
  } else {
    const LatticeBasis red = lll_reduce(basis, parse_rat(o.delta));
    for (const auto& row : red.rows) print_row(row);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadratic congruential generator: lattice seed recovery toolkit"};
  app.require_subcommand(1);

  // generate
  std::string g_p, g_a, g_c, g_u0;
  std::uint64_t g_n = 1;
  auto* gen = app.add_subcommand("generate", "run the generator and print its states");
  gen->add_option("--p", g_p, "prime modulus")->required();
  gen->add_option("--a", g_a, "multiplier in [1, p)")->required();
  gen->add_option("--c", g_c, "shift in [0, p)")->required();
  gen->add_option("--u0", g_u0, "seed in [0, p)")->required();
  gen->add_option("--n", g_n, "number of steps")->required();

  // attack
  AttackOpts at;
  auto* atk = app.add_subcommand("attack", "recover the seed from two approximations");
  atk->add_option("--p", at.p, "prime modulus")->required();
  atk->add_option("--a", at.a, "multiplier")->required();
  atk->add_option("--c", at.c, "shift")->required();
  atk->add_option("--w0", at.w0, "approximation of u0 (plain integer)")->required();
  atk->add_option("--w1", at.w1, "approximation of u1 (plain integer)")->required();
  atk->add_option("--delta", at.delta, "approximation bound")->required();
  atk->add_flag("--trace", at.trace, "print the full JSON trace");
  atk->add_flag("--fallback-bruteforce", at.fallback,
                "on failure, enumerate all delta-consistent seeds (delta <= 2^20)");

  // trials
  TrialsOpts tr;
  auto* trl = app.add_subcommand("trials", "seeded batch of attack trials");
  auto* tr_p = trl->add_option("--p", tr.p, "prime modulus");
  auto* tr_bits = trl->add_option("--bits", tr.bits, "sample a prime of this bit size");
  tr_p->excludes(tr_bits);
  tr_bits->excludes(tr_p);
  trl->add_option("--a", tr.a, "fixed multiplier (default: random per trial)");
  trl->add_option("--c", tr.c, "fixed shift (default: random per trial)");
  auto* tr_d = trl->add_option("--delta", tr.delta, "approximation bound");
  auto* tr_al = trl->add_option("--alpha", tr.alpha, "delta = floor(p^alpha), alpha in (0, 1/4]");
  tr_d->excludes(tr_al);
  tr_al->excludes(tr_d);
  trl->add_option("--trials", tr.trials, "trial count");
  trl->add_option("--rng-seed", tr.seed, "master seed (default: entropy, echoed)");
  trl->add_option("--mode", tr.mode, "observation mode")
      ->check(CLI::IsMember({"random", "truncate", "zero"}));
  trl->add_option("--format", tr.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  trl->add_option("--out", tr.out, "output path, '-' for stdout");
  trl->add_option("--jobs", tr.jobs, "worker threads (default: QUADLAT_JOBS or hardware)");
  trl->add_flag("--timing", tr.timing, "fill the micros column (breaks byte determinism)");
  trl->add_flag("--audit", tr.audit, "count consistent seeds for every non-recovery");

  // census
  CensusOpts ce;
  auto* cen = app.add_subcommand("census", "run the attack on every seed of a small field");
  cen->add_option("--p", ce.p, "prime modulus (<= 2^20 unless overridden)")->required();
  cen->add_option("--a", ce.a, "multiplier")->required();
  cen->add_option("--c", ce.c, "shift")->required();
  cen->add_option("--delta", ce.deltas, "approximation bound (repeatable)")->required();
  cen->add_option("--rng-seed", ce.seed, "master seed (default: entropy, echoed)");
  cen->add_option("--mode", ce.mode, "observation mode")
      ->check(CLI::IsMember({"zero", "random"}));
  cen->add_option("--format", ce.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  cen->add_option("--out", ce.out, "output path, '-' for stdout");
  cen->add_option("--jobs", ce.jobs, "worker threads (default: QUADLAT_JOBS or hardware)");
  cen->add_flag("--override-size-guard", ce.override_guard, "allow p > 2^20");

  // lattice
  LatticeOpts la;
  auto* lat = app.add_subcommand("lattice", "LLL-reduce a basis or find its shortest vector");
  lat->add_option("file", la.file, "JSON basis file (rows of decimal strings), '-' for stdin")
      ->required();
  auto* la_svp = lat->add_flag("--svp", la.svp, "print a shortest nonzero vector");
  auto* la_red = lat->add_flag("--reduce", la.reduce, "print the LLL-reduced basis");
  la_svp->excludes(la_red);
  la_red->excludes(la_svp);
  lat->add_option("--delta", la.delta, "LLL parameter in (1/4, 1)");

  try {
    app.parse(argc, argv);

    if (tr.jobs == 0) tr.jobs = default_jobs();
    if (ce.jobs == 0) ce.jobs = default_jobs();

    if (gen->parsed()) return cmd_generate(g_p, g_a, g_c, g_u0, g_n);
    if (atk->parsed()) return cmd_attack(at);
    if (trl->parsed()) {
      if (!tr.p && !tr.bits) throw OutOfRangeError("trials needs --p or --bits");
      if (!tr.delta && !tr.alpha) throw OutOfRangeError("trials needs --delta or --alpha");
      return cmd_trials(tr);
    }
    if (cen->parsed()) return cmd_census(ce);
    if (lat->parsed()) {
      if (la.svp == la.reduce) throw OutOfRangeError("lattice needs exactly one of --svp/--reduce");
      return cmd_lattice(la);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
