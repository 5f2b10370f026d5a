#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "quadlat/attack.hpp"
#include "quadlat/json_io.hpp"
#include "quadlat/oracle.hpp"
#include "quadlat/rng.hpp"

using namespace quadlat;

namespace {

GenParams params_of(long p, long a, long c) { return GenParams(FieldPrime(Int(p)), Int(a), Int(c)); }

AttackInstance exact_instance(const GenParams& gp, const Int& u0, const Int& delta) {
  const StateSequence seq = run(gp, u0, 1);
  return AttackInstance{Observation(gp, seq.terms[0], seq.terms[1], delta)};
}

Int abs_int(const Int& x) { return x < 0 ? Int(-x) : x; }

}  // namespace

TEST_CASE("build_attack_lattice_L worked example") {
  const GenParams gp = params_of(7, 1, 1);
  const AttackInstance inst{Observation(gp, Int(2), Int(5), Int(1))};
  const LatticeBasis L = build_attack_lattice_L(inst);
  // A0 = (1*4 + 1 - 5) mod 7 = 0, A1 = (2*1*2) mod 7 = 4
  CHECK(L.rows == IntMat{{Int(1), Int(0), Int(0), Int(0)},
                         {Int(0), Int(1), Int(4), Int(0)},
                         {Int(0), Int(0), Int(7), Int(0)},
                         {Int(0), Int(0), Int(1), Int(1)}});
  CHECK(volume(L) == 7);
}

TEST_CASE("build_attack_lattice_L rejects delta^4 >= p") {
  const GenParams gp = params_of(1009, 5, 17);
  CHECK_THROWS_AS(build_attack_lattice_L(
                      AttackInstance{Observation(gp, Int(1), Int(2), Int(6))}),
                  DeltaTooLargeError);
  CHECK_NOTHROW(build_attack_lattice_L(
      AttackInstance{Observation(gp, Int(1), Int(2), Int(5))}));
}

TEST_CASE("hidden vector lies in the first lattice") {
  const GenParams gp = params_of(1000003, 2, 3);
  SeededRng rng(61);
  for (int iter = 0; iter < 40; ++iter) {
    const Int u0 = rng.below(gp.p());
    const Int delta = rng.in_range(1, 31);
    const StateSequence seq = run(gp, u0, 1);
    const Observation obs = observe(seq, delta, ObserveMode::RandomOffset, rng.next_u64());
    const AttackInstance inst{obs};
    const LatticeBasis L = build_attack_lattice_L(inst);
    CHECK(volume(L) == delta * delta * delta * delta * gp.p());

    const Int e0 = seq.terms[0] - obs.w0();
    const Int e1 = seq.terms[1] - obs.w1();
    const IntVec hidden{delta * delta, delta * e0, delta * e1, e0 * e0};
    CHECK(contains(L, hidden));
    CHECK(norm2(hidden) <= 4 * delta * delta * delta * delta);
    CHECK(norm2(shortest_vector(L)) <= norm2(hidden));
  }
}

TEST_CASE("build_attack_lattice_Lprime worked example and input checks") {
  const GenParams gp = params_of(7, 1, 1);
  const AttackInstance inst{Observation(gp, Int(2), Int(5), Int(1))};
  const LatticeBasis L2 = build_attack_lattice_Lprime(inst, Int(1), Int(1));
  // B0 = (4 + 1 - 5) mod 7 = 0, B1 = 4, stored negated mod 7
  CHECK(L2.rows == IntMat{{Int(1), Int(0), Int(0)},
                          {Int(0), Int(1), Int(3)},
                          {Int(0), Int(0), Int(7)}});
  CHECK(volume(L2) == 7);

  CHECK_THROWS_AS(build_attack_lattice_Lprime(inst, Int(2), Int(2)), BadRSError);
  CHECK_THROWS_AS(build_attack_lattice_Lprime(inst, Int(1), Int(7)), BadRSError);
  const GenParams gp3 = params_of(7, 3, 1);
  const AttackInstance inst3{Observation(gp3, Int(2), Int(5), Int(1))};
  CHECK_THROWS_AS(build_attack_lattice_Lprime(inst3, Int(1), Int(1)), BadRSError);
  CHECK_NOTHROW(build_attack_lattice_Lprime(inst3, Int(3), Int(1)));
}

TEST_CASE("second hidden vector lies in the second lattice") {
  const GenParams gp = params_of(1000003, 2, 3);
  SeededRng rng(71);
  for (int iter = 0; iter < 40; ++iter) {
    const Int u0 = rng.below(gp.p());
    const Int delta = rng.in_range(1, 31);
    const StateSequence seq = run(gp, u0, 1);
    const Observation obs = observe(seq, delta, ObserveMode::RandomOffset, rng.next_u64());
    const AttackInstance inst{obs};
    const Int r = gp.a();  // (r, s) = (a, 1) always satisfies the constraints
    const Int s(1);
    const LatticeBasis L2 = build_attack_lattice_Lprime(inst, r, s);
    CHECK(volume(L2) == delta * delta * delta * delta * delta * gp.p());

    const Int e0 = seq.terms[0] - obs.w0();
    const Int e1 = seq.terms[1] - obs.w1();
    const IntVec hidden{delta * delta * delta, delta * delta * e0, r * e0 * e0 - s * e1};
    CHECK(contains(L2, hidden));
  }
}

TEST_CASE("recover_seed on an exact observation") {
  const GenParams gp = params_of(1009, 5, 17);
  const Int u0(123);
  const AttackInstance inst = exact_instance(gp, u0, Int(1));
  const AttackResult res = recover_seed(inst);
  REQUIRE(res.ok());
  const AttackSuccess& win = *res.success;

  // at most the oracle's candidates can ever be reported
  const ConsistentSeedSet cands = consistent_seeds(inst.obs);
  CHECK(std::count(cands.seeds.begin(), cands.seeds.end(), win.u0) == 1);
  CHECK(std::count(cands.seeds.begin(), cands.seeds.end(), u0) == 1);
  if (cands.seeds.size() == 1) CHECK(win.u0 == u0);

  CHECK(abs_int(win.u0 - inst.obs.w0()) <= inst.obs.delta());
  CHECK(abs_int(step(gp, win.u0) - inst.obs.w1()) <= inst.obs.delta());
  CHECK(win.u1 == step(gp, win.u0));
  REQUIRE(res.trace.branch.has_value());
  CHECK(win.branch == *res.trace.branch);
  REQUIRE(res.trace.a0.has_value());
  CHECK(*res.trace.a0 ==
        nonneg_mod(gp.a() * inst.obs.w0() * inst.obs.w0() + gp.c() - inst.obs.w1(), gp.p()));
  CHECK(*res.trace.a1 == nonneg_mod(2 * gp.a() * inst.obs.w0(), gp.p()));
}

TEST_CASE("recover_seed succeeds on nearly all noisy instances") {
  const GenParams gp = params_of(1000003, 2, 3);
  const Int delta(4);
  SeededRng rng(81);
  int wins = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    const Int u0 = rng.below(gp.p());
    const StateSequence seq = run(gp, u0, 1);
    const Observation obs = observe(seq, delta, ObserveMode::RandomOffset, rng.next_u64());
    const AttackResult res = recover_seed(AttackInstance{obs});
    if (!res.ok()) continue;
    ++wins;
    CHECK(abs_int(res.success->u0 - obs.w0()) <= delta);
    CHECK(abs_int(step(gp, res.success->u0) - obs.w1()) <= delta);
  }
  CHECK(wins >= 985);
}

TEST_CASE("inconsistent observations fail verification") {
  const GenParams gp = params_of(1009, 5, 17);
  const StateSequence seq = run(gp, Int(123), 1);
  for (long d : {1L, 2L, 4L}) {
    const Observation obs(gp, seq.terms[0], seq.terms[1] + 10 * d, Int(d));
    REQUIRE(consistent_seeds(obs).seeds.empty());
    const AttackResult res = recover_seed(AttackInstance{obs});
    REQUIRE_FALSE(res.ok());
    CHECK(*res.failure == FailureReason::VerificationMismatch);
  }
}

TEST_CASE("recover_seed never succeeds when no seed is consistent") {
  const GenParams gp = params_of(1009, 5, 17);
  const Int delta(2);
  const Int w0(200);
  // push w1 beyond every candidate's reachable window
  Int w1(0);
  for (Int e(-2); e <= 2; ++e) {
    const Int next = step(gp, nonneg_mod(w0 + e, gp.p()));
    if (next + delta >= w1) w1 = next + delta + 1;
  }
  const Observation obs(gp, w0, w1, delta);
  REQUIRE(consistent_seeds(obs).seeds.empty());
  const AttackResult res = recover_seed(AttackInstance{obs});
  CHECK_FALSE(res.ok());
  REQUIRE(res.failure.has_value());
}

TEST_CASE("recover_seed reports DeltaTooLarge instead of throwing") {
  const GenParams gp = params_of(1009, 5, 17);
  const AttackResult res = recover_seed(AttackInstance{Observation(gp, Int(1), Int(2), Int(6))});
  REQUIRE_FALSE(res.ok());
  CHECK(*res.failure == FailureReason::DeltaTooLarge);
}

TEST_CASE("recover_seed is deterministic") {
  const GenParams gp = params_of(1000003, 2, 3);
  const StateSequence seq = run(gp, Int(777777), 1);
  const Observation obs = observe(seq, Int(5), ObserveMode::RandomOffset, 99);
  const AttackInstance inst{obs};
  const std::string first = json_result(recover_seed(inst)).dump();
  const std::string second = json_result(recover_seed(inst)).dump();
  CHECK(first == second);
}

TEST_CASE("short-vector components respect the planted-vector bounds") {
  const GenParams gp = params_of(1000003, 2, 3);
  SeededRng rng(91);
  for (int iter = 0; iter < 50; ++iter) {
    const Int u0 = rng.below(gp.p());
    const Int delta = rng.in_range(1, 31);
    const StateSequence seq = run(gp, u0, 1);
    const Observation obs = observe(seq, delta, ObserveMode::RandomOffset, rng.next_u64());
    const AttackResult res = recover_seed(AttackInstance{obs});
    REQUIRE(res.trace.f.has_value());
    const auto& f = *res.trace.f;
    // the shortest vector is no longer than the planted one, so componentwise
    // |D^2 f0|, |D f1|, |D f2|, |f3| <= 2 D^2
    CHECK(abs_int(f[0]) <= 2);
    CHECK(abs_int(f[1]) <= 2 * delta);
    CHECK(abs_int(f[2]) <= 2 * delta);
    CHECK(abs_int(f[3]) <= 2 * delta * delta);
    CHECK(res.trace.parallel_bound_proven ==
          (21 * delta * delta * delta < gp.p()));
  }
}

TEST_CASE("failure reasons have stable names") {
  CHECK(std::string(to_string(FailureReason::ExceptionalD1Nonzero)) == "ExceptionalD1Nonzero");
  CHECK(std::string(to_string(FailureReason::NonIntegralEpsilon)) == "NonIntegralEpsilon");
  CHECK(std::string(to_string(FailureReason::EpsilonOutOfBound)) == "EpsilonOutOfBound");
  CHECK(std::string(to_string(FailureReason::VerificationMismatch)) == "VerificationMismatch");
  CHECK(std::string(to_string(FailureReason::NonParallelShortVector)) == "NonParallelShortVector");
  CHECK(std::string(to_string(FailureReason::DeltaTooLarge)) == "DeltaTooLarge");
  CHECK(std::string(reason_slug(FailureReason::ExceptionalD1Nonzero)) == "exceptional_d1_nonzero");
  CHECK(std::string(reason_slug(FailureReason::NonIntegralEpsilon)) == "non_integral_epsilon");
  CHECK(std::string(reason_slug(FailureReason::EpsilonOutOfBound)) == "epsilon_out_of_bound");
  CHECK(std::string(reason_slug(FailureReason::VerificationMismatch)) == "verification_mismatch");
  CHECK(std::string(reason_slug(FailureReason::NonParallelShortVector)) ==
        "non_parallel_short_vector");
  CHECK(std::string(reason_slug(FailureReason::DeltaTooLarge)) == "delta_too_large");
  CHECK(std::string(to_string(Branch::F0Nonzero)) == "F0Nonzero");
  CHECK(std::string(to_string(Branch::F0Zero)) == "F0Zero");
}
