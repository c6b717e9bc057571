#pragma once

#include "extension.hpp"

namespace hix {

/* The Schreier-variant frame: flattened families on the extension side,
 * standard families on the witness side, partner sets drawn from maximal
 * standard-family sets. */
struct SchreierVariantConfig {
  ParamSchedule schedule;
};

/* even slots act through the flattened family, odd slots through its product
 * with pairs; the witness (non-extension) side uses the standard family */
inline FamilyDescriptor schreier_family_descriptors(const SchreierVariantConfig& cfg,
                                                    long slot,
                                                    bool extensionSide = true) {
  const Int& n = cfg.schedule.n(slot);  // throws past the table
  if (!extensionSide) return {FamilyKind::Schreier, n};
  if (slot % 2 == 0) return {FamilyKind::SchreierFlat, n};
  return {FamilyKind::FlatProductA2, n};
}

inline FamilyDescriptor schreier_hi_family(const ParamSchedule& sched, long j) {
  return {FamilyKind::Schreier, sched.n(j)};
}
inline FamilyDescriptor schreier_ext_family(const ParamSchedule& sched, long j) {
  return SetDescriptor{SetBase::WmTSchreier}.family_for(sched, j);
}

/* Exhaustively checks that the flattened family on the even integers is the
 * doubled standard family: F in SF_n iff unhat(F) in S_n, for every
 * F subset of [1, maxElem] inter 2N. */
inline Report hat_equivalence_check(long n, long maxElem) {
  if (n < 1 || n > 3 || maxElem < 2 || maxElem > 24)
    throw BudgetExceeded("exhaustion is budgeted to n <= 3, maxElem <= 24");
  std::vector<long> evens;
  for (long e = 2; e <= maxElem; e += 2) evens.push_back(e);
  FamilyDescriptor flat{FamilyKind::SchreierFlat, Int(n)};
  FamilyDescriptor std_{FamilyKind::Schreier, Int(n)};
  long total = 0, mismatches = 0;
  std::string firstBad;
  for (unsigned long mask = 0; mask < (1ul << evens.size()); ++mask) {
    FiniteSet F, half;
    for (size_t i = 0; i < evens.size(); ++i)
      if (mask >> i & 1) {
        F.push_back(evens[i]);
        half.push_back(evens[i] / 2);
      }
    ++total;
    if (member(flat, F) != member(std_, half)) {
      ++mismatches;
      if (firstBad.empty()) firstBad = serialize_set(F);
    }
  }
  Report rep;
  rep.title = "doubled-family equivalence, order " + std::to_string(n) +
              ", universe [1," + std::to_string(maxElem) + "]";
  rep.add("hat-equivalence",
          "F in SF:" + std::to_string(n) + " iff unhat(F) in S:" + std::to_string(n) +
              " for all even-supported F",
          std::to_string(total) + " sets, " + std::to_string(mismatches) +
              " mismatches",
          mismatches == 0 ? Verdict::Pass : Verdict::Fail,
          firstBad.empty() ? "" : "first mismatch {" + firstBad + "}");
  return rep;
}

/* Interleaving below the doubled elements of G: builds
 * {k_1, 2g_1, ..., k_j, 2g_j, 2g_{j+1}, ..., 2g_d} and tests product
 * admissibility.  Each k_i must land strictly between the neighbouring
 * doubled elements. */
inline bool interleave_admissible(const FiniteSet& G, const std::vector<long>& ks,
                                  long n) {
  if (n < 1) throw InputError("order must be >= 1");
  for (size_t i = 1; i < G.size(); ++i)
    if (G[i] <= G[i - 1]) throw InputError("base set not strictly increasing");
  if (!G.empty() && G.front() < 1) throw InputError("base set must be positive");
  if (!member({FamilyKind::Schreier, Int(n)}, G))
    throw InputError("base set outside the standard family");
  if (ks.size() > G.size())
    throw PatternViolation("more interleaved points than doubled elements");
  FiniteSet s;
  long prev = 0;
  for (size_t i = 0; i < G.size(); ++i) {
    if (i < ks.size()) {
      if (ks[i] <= prev || ks[i] >= 2 * G[i])
        throw PatternViolation("interleaved point out of order");
      s.push_back(ks[i]);
      prev = ks[i];
    }
    s.push_back(2 * G[i]);
    prev = 2 * G[i];
  }
  return member({FamilyKind::FlatProductA2, Int(n)}, s);
}

/* Rightward extension to a maximal set.  Computed block-by-block (the
 * interval [a, 2a-1] at order one, then `a` maximal order-(n-1) blocks), which
 * is exactly what greedy one-element extension produces but without the
 * exponential membership re-checks; the one-element-extension test below
 * verifies maximality independently. */
inline FiniteSet maximal_schreier_set(long n, long start, long cap = 1 << 16) {
  if (n < 1 || start < 1) throw InputError("order and start must be >= 1");
  FiniteSet F;
  std::function<void(long, long)> build = [&](long ord, long a) {
    if (ord == 1) {
      for (long t = 0; t < a; ++t) {
        if ((long)F.size() >= cap)
          throw BudgetExceeded("maximal set larger than the cap");
        F.push_back(a + t);
      }
      return;
    }
    for (long b = 0; b < a; ++b) build(ord - 1, b == 0 ? a : F.back() + 1);
  };
  build(n, start);
  return F;
}

inline bool is_maximal_schreier(long n, const FiniteSet& F) {
  if (F.empty()) return false;
  FamilyDescriptor d{FamilyKind::Schreier, Int(n)};
  if (!member(d, F)) return false;
  FiniteSet G = F;
  G.push_back(F.back() + 1);
  return !member(d, G);
}

/* the Schreier-variant partner set form at an even slot: m_slot^{-1} over a
 * maximal standard-family set */
inline ConstructionRecord schreier_k_record(long slot, long start,
                                            const ParamSchedule& sched) {
  if (slot % 2 != 0) throw InputError("partner sets live at even slots");
  Int nB = sched.n(slot);
  if (nB > 1 << 12) throw BudgetExceeded("family order too large to materialize");
  FiniteSet F = maximal_schreier_set(nB.convert_to<long>(), start);
  std::vector<TreePtr> leaves;
  for (long i : F) leaves.push_back(TreeAnalysis::leaf(+1, i));
  return make_record(TreeAnalysis::weighted(slot, {FamilyKind::Schreier, nB},
                                            std::move(leaves)),
                     sched);
}

}  // namespace hix
