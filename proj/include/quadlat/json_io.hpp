#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "quadlat/attack.hpp"
#include "quadlat/experiments.hpp"
#include "quadlat/lattice.hpp"
#include "quadlat/oracle.hpp"

// All serialized integers are decimal strings: arbitrary precision survives
// any JSON parser. Keys are snake_case.

namespace quadlat {

using Json = nlohmann::json;

inline Json json_vec(const IntVec& v) {
  Json arr = Json::array();
  for (const Int& x : v) arr.push_back(x.get_str());
  return arr;
}

inline Json json_basis(const LatticeBasis& basis) {
  Json arr = Json::array();
  for (const auto& row : basis.rows) arr.push_back(json_vec(row));
  return arr;
}

inline Int int_from_json(const Json& j) {
  if (j.is_string()) return Int(j.get<std::string>(), 10);
  if (j.is_number_integer()) return Int(std::to_string(j.get<long long>()), 10);
  throw Error("expected an integer (decimal string or JSON number)");
}

inline LatticeBasis basis_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error("basis must be a nonempty JSON array of rows");
  LatticeBasis basis;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error("basis row must be a JSON array");
    IntVec r;
    r.reserve(row.size());
    for (const auto& cell : row) r.push_back(int_from_json(cell));
    basis.rows.push_back(std::move(r));
  }
  return basis;
}

/// Scientific notation d.dd...e<k> from an mpf value.
inline std::string format_mpf(const mpf_class& x, std::size_t digits = 12) {
  if (x == 0) return "0";
  mp_exp_t e;
  const std::string mant = x.get_str(e, 10, digits);
  const bool neg = !mant.empty() && mant[0] == '-';
  const std::string dgs = neg ? mant.substr(1) : mant;
  std::string out = neg ? "-" : "";
  out += dgs.substr(0, 1);
  if (dgs.size() > 1) {
    out += '.';
    out += dgs.substr(1);
  }
  out += 'e';
  out += std::to_string(static_cast<long>(e - 1));
  return out;
}

inline std::string format_rat(const Rat& q, std::size_t digits = 12) {
  mpf_class f(0, 256);
  mpf_set_q(f.get_mpf_t(), q.get_mpq_t());
  return format_mpf(f, digits);
}

inline Json json_trace(const StageTrace& t) {
  Json j;
  j["parallel_bound_proven"] = t.parallel_bound_proven;
  if (t.a0) j["a0"] = t.a0->get_str();
  if (t.a1) j["a1"] = t.a1->get_str();
  if (t.f) {
    Json arr = Json::array();
    for (const Int& x : *t.f) arr.push_back(x.get_str());
    j["f"] = arr;
  }
  if (t.r) j["r"] = t.r->get_str();
  if (t.s) j["s"] = t.s->get_str();
  if (t.b0) j["b0"] = t.b0->get_str();
  if (t.b1) j["b1"] = t.b1->get_str();
  if (t.f_prime) {
    Json arr = Json::array();
    for (const Int& x : *t.f_prime) arr.push_back(x.get_str());
    j["f_prime"] = arr;
  }
  if (t.branch) j["branch"] = to_string(*t.branch);
  return j;
}

inline Json json_result(const AttackResult& res) {
  Json j;
  if (res.ok()) {
    j["status"] = "success";
    j["u0"] = res.success->u0.get_str();
    j["u1"] = res.success->u1.get_str();
    j["branch"] = to_string(res.success->branch);
  } else {
    j["status"] = "failure";
    j["reason"] = to_string(*res.failure);
  }
  j["trace"] = json_trace(res.trace);
  return j;
}

inline Json json_census(const CensusReport& rep) {
  Json j;
  j["p"] = rep.params.p().get_str();
  j["a"] = rep.params.a().get_str();
  j["c"] = rep.params.c().get_str();
  j["mode"] = to_string(rep.mode);
  j["rng_seed"] = std::to_string(rep.rng_seed);
  j["fitted_k"] = format_rat(fitted_k(rep));
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    Json r;
    r["delta"] = row.delta.get_str();
    r["total"] = row.total.get_str();
    r["successes"] = row.successes.get_str();
    r["failures"] = row.failures.get_str();
    r["ambiguous"] = row.ambiguous.get_str();
    Json reasons = Json::object();
    for (const auto& [slug, n] : row.reasons) reasons[slug] = n;
    r["reasons"] = reasons;
    Json recs = Json::array();
    for (const auto& rec : row.records) {
      Json e;
      e["u0"] = rec.u0.get_str();
      e["outcome"] = rec.outcome;
      if (rec.recovered) e["recovered"] = rec.recovered->get_str();
      e["consistent_count"] = rec.consistent_count;
      e["trace"] = json_trace(rec.trace);
      recs.push_back(std::move(e));
    }
    r["records"] = recs;
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  return j;
}

/// Fixed-schema census CSV: one row per delta, one column per outcome class.
inline void write_census_csv(std::ostream& os, const CensusReport& rep) {
  static const char* kSlugs[] = {
      "exceptional_d1_nonzero",    "non_integral_epsilon", "epsilon_out_of_bound",
      "verification_mismatch",     "non_parallel_short_vector",
      "delta_too_large",           "success_wrong_seed",
  };
  os << "delta,total,successes,failures,ambiguous";
  for (const char* slug : kSlugs) os << ',' << slug;
  os << '\n';
  for (const auto& row : rep.rows) {
    os << row.delta << ',' << row.total << ',' << row.successes << ',' << row.failures << ','
       << row.ambiguous;
    for (const char* slug : kSlugs) {
      const auto it = row.reasons.find(slug);
      os << ',' << (it == row.reasons.end() ? 0 : it->second);
    }
    os << '\n';
  }
}

inline Json json_trials(const TrialReport& rep) {
  Json j;
  j["p"] = rep.config.p.get_str();
  j["delta"] = rep.config.delta.get_str();
  j["trials"] = rep.config.trials;
  j["rng_seed"] = std::to_string(rep.config.rng_seed);
  j["mode"] = to_string(rep.config.mode);
  j["successes"] = rep.successes;
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    Json r;
    r["trial"] = row.trial;
    r["p"] = row.p.get_str();
    r["a"] = row.a.get_str();
    r["c"] = row.c.get_str();
    r["delta"] = row.delta.get_str();
    r["u0_true"] = row.u0_true.get_str();
    if (row.branch) r["branch"] = to_string(*row.branch);
    r["outcome"] = row.outcome;
    if (row.u0_recovered) r["u0_recovered"] = row.u0_recovered->get_str();
    r["micros"] = row.micros;
    if (row.consistent_count) r["consistent_count"] = *row.consistent_count;
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  return j;
}

}  // namespace quadlat
