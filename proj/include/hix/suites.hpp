#pragma once

#include <random>

#include "gen.hpp"
#include "schreier.hpp"
#include "uniform.hpp"

namespace hix {

/* -------- named check suites shared by the cli and the acceptance gate ----
 *
 * Every suite is a pure function of its (fixed) parameters: fresh allocator
 * state, frozen schedules, deterministic seeds.  Rendering a suite twice
 * yields identical bytes. */

/* A long geometric desk table: m_j = 2^{j+1}, n_j = j+2.  The rigidity suite
 * needs hundreds of distinct coder outputs, far more than the frozen small
 * tables offer; norms are never computed here, so the width is free. */
inline ParamSchedule wide_desk_table(long size = 2000) {
  std::vector<Int> m, n;
  Int mv = 2;
  for (long j = 0; j < size; ++j) {
    m.push_back(mv);
    mv <<= 1;
    n.push_back(Int(j + 2));
  }
  return ParamSchedule::desk("desk-wide", std::move(m), std::move(n));
}

inline Report suite_aux_bounds() {
  return verify_flat_average_bounds(desk_table("desk-aux"));
}

/* Randomized population of coded sequences, all pairs checked for the
 * rigidity property.  Two construction styles share one allocator: plain
 * basis-block chains (kept on high coordinates) and collapsed partner chains
 * hat g_1, hat g_2, ... drawn through the second coding map (low
 * coordinates), so the two key spaces never collide. */
inline Report suite_tree_property(long sequences = 141, unsigned seed = 20250823) {
  ParamSchedule wide = wide_desk_table();
  CodingState coding;
  std::mt19937 rng(seed);
  auto base = basis_supply(wide);

  auto odd_block = [&](long w, long start) {
    long nw = wide.n(w).convert_to<long>();
    long p = start % 2 == 1 ? start : start + 1;
    std::vector<TreePtr> leaves;
    for (long t = 0; t < nw; ++t, p += 2) leaves.push_back(TreeAnalysis::leaf(+1, p));
    return make_record(TreeAnalysis::weighted(
                           w, SetDescriptor{SetBase::Ext}.family_for(wide, w),
                           std::move(leaves)),
                       wide);
  };

  std::vector<std::vector<ConstructionRecord>> seqs;
  long hiBase = 100000, extBase = 1;
  for (long i = 0; i < sequences; ++i) {
    long len = 1 + (long)(rng() % 3);
    if (rng() % 2 == 0) {
      long start = hiBase;
      hiBase += 8000;
      auto sup = [&, start](long w, long minStart) {
        return base(w, std::max(minStart, start));
      };
      seqs.push_back(build_special_sequence(1, len, sup, wide, coding).records);
    } else {
      long pool = 1 + (long)(rng() % 3);
      long after = extBase;
      extBase += 32;
      QsSequence gs;
      std::vector<ConstructionRecord> chain;
      for (long k = 0; k < len; ++k) {
        long w = k == 0 ? first_weight_index(1, wide) : sigma(gs, wide, coding);
        auto f = odd_block(w, after + 1);
        auto g = rho(pool, w / 2, f, wide, coding);
        auto gh = hat_pool_record(support_of(g.vec), w, wide);
        gs.push_back(g.vec);
        after = gh.vec.max_supp();
        chain.push_back(std::move(gh));
      }
      seqs.push_back(std::move(chain));
    }
  }
  return verify_tree_property(seqs);
}

/* every member of the stage-2 extension snapshot restricts to the doubled
 * image of a standard-set element, or to zero when purely odd-supported */
inline Report suite_restriction() {
  auto hi = desk_table("desk-hi");
  CodingState coding;
  ExtOptions opt{.stage = 2, .supportBound = 3};
  auto st = build_stage(opt, hi, coding);

  long witnessed = 0, vanishing = 0, failed = 0, outside = 0;
  std::string firstBad;
  for (auto& r : st.members) {
    try {
      auto w = restrict_even_witness(r, hi);
      if (!w) {
        ++vanishing;
        continue;
      }
      if (whi_member(*w->tree, hi, coding))
        ++witnessed;
      else {
        ++outside;
        if (firstBad.empty()) firstBad = format_vec(r.vec);
      }
    } catch (const WitnessFailed&) {
      ++failed;
      if (firstBad.empty()) firstBad = format_vec(r.vec);
    }
  }

  Report rep;
  rep.title = "even restriction over the stage-2 extension snapshot at " + hi.name();
  rep.add("snapshot", "stage closure materialized",
          std::to_string(st.members.size()) + " members, " +
              std::to_string(st.lpool.size()) + " pool atoms",
          st.members.empty() ? Verdict::Fail : Verdict::Pass,
          "supportBound 3, one even round per stage");
  rep.add("restriction",
          "every member restricts to a doubled standard-set element or to zero",
          std::to_string(witnessed) + " witnessed, " + std::to_string(vanishing) +
              " vanishing, " + std::to_string(failed) + " failures",
          failed == 0 ? Verdict::Pass : Verdict::Fail,
          firstBad.empty() ? "" : "first failure " + firstBad);
  rep.add("witness-membership", "every witness lies in the standard norming set",
          std::to_string(outside) + " outside",
          outside == 0 ? Verdict::Pass : Verdict::Fail);
  return rep;
}

/* every member of the stage-2 standard snapshot lifts, and restricting the
 * lift recovers the member exactly */
inline Report suite_lift() {
  auto hi = desk_table("desk-hi");
  CodingState coding;
  auto recs = generate_whi({.stage = 2, .supportBound = 3, .budget = 300000},
                           hi, coding);

  long roundTrips = 0, failed = 0;
  std::string firstBad;
  for (auto& r : recs) {
    try {
      auto phi = lift_witness(r, hi, coding);
      auto back = restrict_even_witness(phi, hi);
      if (back && back->vec == r.vec) {
        ++roundTrips;
        continue;
      }
    } catch (const WitnessFailed&) {
    }
    ++failed;
    if (firstBad.empty()) firstBad = format_vec(r.vec);
  }

  Report rep;
  rep.title = "lifting the stage-2 standard snapshot at " + hi.name();
  rep.add("snapshot", "stage closure materialized", std::to_string(recs.size()) + " members",
          recs.empty() ? Verdict::Fail : Verdict::Pass,
          "supportBound 3, budget 300000");
  rep.add("lift-roundtrip",
          "every member lifts and the lift restricts back to the member",
          std::to_string(roundTrips) + " round trips, " + std::to_string(failed) +
              " failures",
          failed == 0 ? Verdict::Pass : Verdict::Fail,
          firstBad.empty() ? "" : "first failure " + firstBad);
  return rep;
}

inline Report suite_dependent() {
  auto hi = desk_table("desk-hi");
  CodingState coding;
  auto sup = primitive_sep_supply(hi);
  auto dep = build_dependent_sequence(1, 2, sup, sup, hi, coding);
  return verify_dependent_estimates(dep, hi);
}

/* the full-length interleaved walk plus the enumerated slot functionals it
 * seeds: its own odd elements and a few partial micro blocks */
inline Report suite_dependent_paired() {
  auto hi = desk_table("desk-hi");
  CodingState coding;
  auto dp = build_dependent_paired(1, 3, odd_sep_supply(hi), hi, coding);

  std::vector<ExtAtom> atoms;
  for (size_t k = 0; k < dp.fs.size(); k += 2) atoms.push_back({dp.fs[k], 1});
  auto micro = [&](const std::vector<long>& idx) {
    std::vector<TreePtr> leaves;
    for (long i : idx) leaves.push_back(TreeAnalysis::leaf(+1, i));
    atoms.push_back({make_record(TreeAnalysis::weighted(
                                     2, SetDescriptor{SetBase::Ext}.family_for(hi, 2),
                                     std::move(leaves)),
                                 hi),
                     2});
  };
  micro({1, 3});
  micro({5, 7});
  micro({1, 7});
  auto specials = paired_specials(1, atoms, hi, coding, 100000);
  return verify_extension_estimates(dp, specials, hi);
}

inline Report suite_lsa2() {
  Report rep;
  rep.title = "doubled-family equivalence, exhaustive at orders 1-3";
  for (auto [n, maxE] : {std::pair<long, long>{1, 20}, {2, 20}, {3, 14}}) {
    auto r = hat_equivalence_check(n, maxE);
    auto l = r.lines.at(0);
    l.name = "order-" + std::to_string(n) + " [1," + std::to_string(maxE) + "]";
    rep.lines.push_back(std::move(l));
  }
  return rep;
}

/* Exact norms with re-evaluated certificates; the one suite that touches the
 * value cache, so cold-versus-warm runs exercise the persistence path. */
inline Report suite_norm_samples(ValueCache* cache = nullptr) {
  Report rep;
  rep.title = "norm samples with certificates";

  auto check = [&](const std::string& name, NormEngine& eng,
                   const ParamSchedule& sched, const SparseVector& x,
                   const Rat* expect = nullptr) {
    auto r = eng.norm(x);
    Rat cv = certify(*r.cert, x, sched);
    bool ok = cv == r.value && (!expect || r.value == *expect);
    std::string vals = to_string(r.value) + " certified " + to_string(cv);
    if (expect) vals += ", expected " + to_string(*expect);
    rep.add(name, "norm equals its certificate value", vals,
            ok ? Verdict::Pass : Verdict::Fail, format_tree(*r.cert));
  };

  auto pa = ParamSchedule::paper_a();
  NormEngine engA(pa, {SetBase::WmT}, 24, cache);
  SparseVector flat4;
  for (long k = 1; k <= 4; ++k) flat4.set(k, Rat(1));
  Rat two(2);
  check("flat-4", engA, pa, flat4, &two);

  auto main = desk_table("desk-main");
  NormEngine engM(main, {SetBase::WmT}, 24, cache);
  for (long t : {2, 3, 5, 6}) {
    SparseVector x;
    for (long k = 1; k <= t; ++k) x.set(k, Rat(1));
    check("flat-" + std::to_string(t), engM, main, x);
  }
  SparseVector mixed;
  mixed.set(1, Rat(1));
  mixed.set(2, Rat(-1, 2));
  mixed.set(4, Rat(3, 4));
  mixed.set(7, Rat(-2));
  check("mixed", engM, main, mixed);
  return rep;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "norm-samples", "aux-bounds", "tree-property", "restriction",
      "lift",         "dependent",  "dependent-paired", "lsa2"};
  return names;
}

inline Report run_suite(const std::string& name, ValueCache* cache = nullptr) {
  if (name == "norm-samples") return suite_norm_samples(cache);
  if (name == "aux-bounds") return suite_aux_bounds();
  if (name == "tree-property") return suite_tree_property();
  if (name == "restriction") return suite_restriction();
  if (name == "lift") return suite_lift();
  if (name == "dependent") return suite_dependent();
  if (name == "dependent-paired") return suite_dependent_paired();
  if (name == "lsa2") return suite_lsa2();
  throw InputError("unknown suite: " + name);
}

/* the full run, byte-deterministic; the acceptance gate and the cli golden
 * diff both consume this exact text */
inline std::string suite_all_text(ValueCache* cache = nullptr) {
  std::string out;
  for (auto& n : suite_names())
    out += "== " + n + " ==\n" + run_suite(n, cache).render() + "\n";
  return out;
}

inline bool suite_all_pass(const std::string& text) {
  return text.find("NOT-ALL-PASS") == std::string::npos &&
         text.find("ALL-PASS") != std::string::npos;
}

}  // namespace hix
