#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "hi_core.hpp"

namespace hix {

/* -------- the reserved pools and their hatted images -------- */

/* K-form: m_w^{-1} sum_{i in F} e*_i with #F = n_w.  The pools partition each
 * K-set by the dyadic valuation of min F, so every pool has unbounded minima
 * and the allocator in coding.hpp lands exactly in pool k. */
inline std::optional<long> k_pool_of(const SparseVector& g, long w,
                                     const ParamSchedule& sched) {
  if (w < 0 || w % 2 != 0 || !sched.has(w) || g.zero()) return std::nullopt;
  Rat want(Int(1), sched.m(w));
  for (auto& [i, c] : g.entries())
    if (c != want) return std::nullopt;
  if (Int((long)g.support_size()) != sched.n(w)) return std::nullopt;
  return detail::ruler_pool(g.min_supp());
}

/* detects hat(g) for g in some K-pool; the weight is read off the coefficient */
inline std::optional<std::pair<long, long>> hatted_k_pool_of(const SparseVector& v,
                                                             const ParamSchedule& sched) {
  if (v.zero()) return std::nullopt;
  for (auto& [i, c] : v.entries())
    if (i % 2 != 0) return std::nullopt;
  SparseVector g = unhat(v);
  for (long w = 0; sched.has(w); w += 2)
    if (auto p = k_pool_of(g, w, sched)) return {{w, *p}};
  return std::nullopt;
}

/* the record for hat(g), g = m_w^{-1} sum_{i in F} e*_i */
inline ConstructionRecord hat_pool_record(const FiniteSet& F, long w,
                                          const ParamSchedule& sched) {
  std::vector<TreePtr> leaves;
  for (long i : F) leaves.push_back(TreeAnalysis::leaf(+1, 2 * i));
  return make_record(TreeAnalysis::weighted(
                         w, SetDescriptor{SetBase::Ext}.family_for(sched, w),
                         std::move(leaves)),
                     sched);
}

/* searches the allocation log for the input that produced the given image */
inline std::optional<std::pair<SparseVector, long>> rho_preimage(
    const SparseVector& g, long w, const CodingState& coding) {
  FiniteSet F = support_of(g);
  for (auto& [key, set] : coding.rhoByInput) {
    if (set != F) continue;
    size_t b1 = key.find('|');
    size_t b2 = key.find('|', b1 + 1);
    long i = std::stol(key.substr(b1 + 1, b2 - b1 - 1));
    if (2 * i != w) continue;
    return {{parse_vec(key.substr(b2 + 1)), std::stol(key.substr(0, b1))}};
  }
  return std::nullopt;
}

/* rebuilds a leaf-level tree for a flat m_w^{-1}-coefficient functional */
inline TreePtr flat_tree_of(const SparseVector& v, long w, const ParamSchedule& sched,
                            SetBase base = SetBase::Ext) {
  if (v.zero() || !sched.has(w)) return nullptr;
  Rat unit(Int(1), sched.m(w));
  std::vector<TreePtr> leaves;
  for (auto& [i, c] : v.entries()) {
    if (c != unit && c != -unit) return nullptr;
    leaves.push_back(TreeAnalysis::leaf(c > 0 ? +1 : -1, i));
  }
  FamilyDescriptor fam = SetDescriptor{base}.family_for(sched, w);
  if (Int((long)leaves.size()) > fam.order) return nullptr;
  return TreeAnalysis::weighted(w, fam, std::move(leaves));
}

/* -------- paired special functionals -------- */

/* an odd-supported weighted functional together with the allocator pool that
 * hands out its partner */
struct ExtAtom {
  ConstructionRecord f;
  long pool = 1;
};

namespace detail {

inline bool odd_supported(const SparseVector& v) {
  for (auto& [i, c] : v.entries())
    if (i % 2 == 0) return false;
  return !v.zero();
}

}  // namespace detail

/* All chains (f_1, hat g_1, ..., f_p, hat g_p) over the given atoms: the
 * first weight is free class-one at least n_slot^2, later weights are the
 * coder's output on the partner prefix, and every partner comes from the
 * atom's pool.  Emits the slot functional of every nonempty chain. */
inline std::vector<ConstructionRecord> paired_specials(long slot,
                                                       const std::vector<ExtAtom>& atoms,
                                                       const ParamSchedule& sched,
                                                       CodingState& coding,
                                                       long budget = 100000) {
  if (slot % 2 != 1 || !sched.has(slot)) throw InputError("bad odd slot");
  Int nslot = sched.n(slot);
  Int thr = nslot * nslot;
  FamilyDescriptor fam = SetDescriptor{SetBase::Ext}.family_for(sched, slot);

  struct Node {
    std::vector<TreePtr> kids;
    QsSequence gs;
    long maxsupp = 0;
    long p = 0;
  };
  std::vector<ConstructionRecord> out;
  std::map<std::string, bool> seen;
  std::vector<Node> frontier{{}};
  while (!frontier.empty()) {
    std::vector<Node> next;
    for (auto& nd : frontier)
      for (auto& a : atoms) {
        if (Int(nd.p) >= nslot) continue;
        auto& f = a.f;
        if (!f.tag.weighted || !detail::odd_supported(f.vec)) continue;
        long w = *f.tag.weighted;
        if (w % 2 != 0) continue;
        if (f.vec.min_supp() <= nd.maxsupp) continue;
        if (nd.gs.empty()) {
          if (!class_one(w / 2) || sched.m(w) < thr) continue;
        } else {
          long want;
          try {
            want = sigma(nd.gs, sched, coding);
          } catch (const ScheduleExhausted&) {
            continue;
          }
          if (w != want) continue;
        }
        ConstructionRecord g;
        try {
          g = rho(a.pool, w / 2, f, sched, coding);
        } catch (const BudgetExceeded&) {
          continue;
        } catch (const PoolExhausted&) {
          continue;
        }
        auto ghat = hat_pool_record(support_of(g.vec), w, sched);
        Node ext = nd;
        ext.kids.push_back(f.tree);
        ext.kids.push_back(ghat.tree);
        ext.gs.push_back(g.vec);
        ext.maxsupp = ghat.vec.max_supp();
        ext.p = nd.p + 1;
        auto rec = make_record(
            TreeAnalysis::weighted(slot, fam, std::vector<TreePtr>(ext.kids)), sched);
        std::string key = format_vec(rec.vec);
        if (!seen.count(key)) {
          if ((long)out.size() >= budget)
            throw BudgetExceeded("paired-chain closure too large");
          seen[key] = true;
          out.push_back(std::move(rec));
        }
        next.push_back(std::move(ext));
      }
    frontier = std::move(next);
  }
  return out;
}

/* -------- staged construction of the extension norming set -------- */

struct ExtOptions {
  long stage = 1;
  long supportBound = 4;   // leaf universe of the truncation
  long maxWeightIndex = -1;  // -1 = full table
  long budget = 200000;
};

/* The n-th snapshot.  `members` is the materialized part of the n-th set
 * (interval restrictions and rational convex combinations are predicate
 * closure, never enumerated); `fresh` holds the elements first admitted at
 * this stage that were not carried over, i.e. the new even-closure results
 * surviving the reserved-pool exclusion. */
struct ExtStage {
  long n = 0;
  std::vector<ConstructionRecord> members;
  std::map<std::string, long> stageOf;  // vec#weight -> first stage
  std::vector<ConstructionRecord> fresh;
  std::vector<ExtAtom> lpool;  // cumulative odd-supported weighted fresh elements
};

inline std::string stage_key(const ConstructionRecord& r) {
  return format_vec(r.vec) + "#" +
         (r.tag.weighted ? std::to_string(*r.tag.weighted) : "u");
}

inline ExtStage initial_stage(const ExtOptions& opt, const ParamSchedule& sched) {
  ExtStage st;
  for (long k = 1; k <= opt.supportBound; ++k)
    for (int s : {+1, -1}) {
      auto r = make_record(TreeAnalysis::leaf(s, k), sched);
      st.stageOf[stage_key(r)] = 0;
      st.members.push_back(std::move(r));
    }
  return st;
}

inline ExtStage advance_stage(const ExtStage& prev, const ParamSchedule& sched,
                              const ExtOptions& opt, CodingState& coding) {
  ExtStage st = prev;
  st.n = prev.n + 1;
  st.fresh.clear();
  auto admit = [&](ConstructionRecord r, bool intoFresh) {
    std::string key = stage_key(r);
    if (st.stageOf.count(key)) return;
    if ((long)st.members.size() >= opt.budget)
      throw BudgetExceeded("stage closure too large");
    st.stageOf[key] = st.n;
    if (intoFresh) st.fresh.push_back(r);
    st.members.push_back(std::move(r));
  };

  long wmax = sched.max_weight_index();
  if (opt.maxWeightIndex >= 0 && opt.maxWeightIndex < wmax) wmax = opt.maxWeightIndex;

  // one round of even operations over the previous members
  for (long w = 0; w <= wmax; w += 2) {
    FamilyDescriptor fam = SetDescriptor{SetBase::Ext}.family_for(sched, w);
    long cap = fam.order > Int(16) ? 16 : fam.order.convert_to<long>();
    struct Node {
      std::vector<TreePtr> kids;
      long maxsupp = 0;
    };
    std::vector<Node> frontier{{}};
    for (long d = 0; d < cap && !frontier.empty(); ++d) {
      std::vector<Node> next;
      for (auto& nd : frontier)
        for (auto& r : prev.members) {
          if (r.vec.min_supp() <= nd.maxsupp) continue;
          Node ext = nd;
          ext.kids.push_back(r.tree);
          ext.maxsupp = r.vec.max_supp();
          auto rec = make_record(
              TreeAnalysis::weighted(w, fam, std::vector<TreePtr>(ext.kids)), sched);
          // reserved-pool exclusion: hatted pool images of level past this
          // stage stay out so the partner allocator keeps them fresh
          auto hp = hatted_k_pool_of(rec.vec, sched);
          if (!hp || hp->second <= st.n) admit(std::move(rec), true);
          next.push_back(std::move(ext));
        }
      frontier = std::move(next);
    }
  }

  // the new odd-supported weighted elements feed the pairing pools
  for (auto& r : st.fresh)
    if (r.tag.weighted && detail::odd_supported(r.vec))
      st.lpool.push_back({r, st.n});

  // odd slots: paired special functionals over the accumulated pools
  for (long w = 1; w <= wmax; w += 2) {
    std::vector<ConstructionRecord> sp;
    try {
      sp = paired_specials(w, st.lpool, sched, coding, opt.budget);
    } catch (const ScheduleExhausted&) {
      continue;  // slot threshold beyond the table
    }
    for (auto& r : sp) admit(std::move(r), false);
  }
  return st;
}

inline ExtStage build_stage(const ExtOptions& opt, const ParamSchedule& sched,
                            CodingState& coding) {
  ExtStage st = initial_stage(opt, sched);
  for (long s = 0; s < opt.stage; ++s) st = advance_stage(st, sched, opt, coding);
  return st;
}

/* -------- sequence classification -------- */

enum class SeqKind { Paired, SemiPaired, Special, Invalid };

struct Classification {
  SeqKind kind = SeqKind::Invalid;
  std::string reason;
  long pairs = 0, bare = 0, tail = 0;
};

/* Decides the strongest applicable kind of an interleaved block sequence at
 * an odd slot: leading (f, hat g) pairs with allocator-verified partners,
 * then bare hatted pool elements, then arbitrary members whose even-part
 * witnesses continue the partner chain.  The non-extendability of the paired
 * part is checked against the supplied snapshot and is relative to it. */
inline Classification classify_sequence(long slot,
                                        const std::vector<ConstructionRecord>& seq,
                                        const ParamSchedule& sched, CodingState& coding,
                                        const ExtStage* snapshot = nullptr) {
  Classification c;
  auto invalid = [&](const std::string& why) {
    c.kind = SeqKind::Invalid;
    c.reason = why;
    return c;
  };
  if (slot % 2 != 1 || !sched.has(slot)) return invalid("bad odd slot");
  if (seq.empty()) return invalid("empty sequence");
  long last = 0;
  for (auto& r : seq) {
    if (r.vec.zero() || r.vec.min_supp() <= last) return invalid("not successive");
    last = r.vec.max_supp();
  }

  Int nslot = sched.n(slot);
  Int thr = nslot * nslot;
  QsSequence gs;
  std::vector<long> gw;
  size_t i = 0;

  // phase 1: (f, hat g) pairs
  while (i + 1 < seq.size()) {
    auto& A = seq[i];
    if (!A.tag.weighted || !detail::odd_supported(A.vec)) break;
    long w = *A.tag.weighted;
    auto& B = seq[i + 1];
    auto hp = hatted_k_pool_of(B.vec, sched);
    if (!hp || hp->first != w) break;
    auto pre = rho_preimage(unhat(B.vec), w, coding);
    if (!pre || !(pre->first == A.vec)) break;
    gs.push_back(unhat(B.vec));
    gw.push_back(w);
    ++c.pairs;
    i += 2;
  }

  // phase 2: bare hatted pool elements
  size_t bareStart = i;
  while (i < seq.size()) {
    auto hp = hatted_k_pool_of(seq[i].vec, sched);
    if (!hp) break;
    gs.push_back(unhat(seq[i].vec));
    gw.push_back(hp->first);
    ++c.bare;
    ++i;
  }

  // phase 3: tail members whose even part witnesses the chain
  bool firstTail = true;
  for (; i < seq.size(); ++i) {
    auto& H = seq[i];
    if (!H.tag.weighted) return invalid("tail element not weighted");
    SparseVector ev = restrict_to(H.vec, Parity::Even);
    if (ev.zero()) return invalid("tail element vanishes on the even coordinates");
    if (firstTail && hatted_k_pool_of(ev, sched))
      return invalid("first tail element restricts to a reserved pool image");
    firstTail = false;
    gs.push_back(unhat(ev));
    gw.push_back(*H.tag.weighted);
    ++c.tail;
  }

  // the partner chain must be a coded sequence at the slot
  if (Int((long)gs.size()) > nslot) return invalid("longer than the slot admits");
  for (size_t k = 0; k < gs.size(); ++k) {
    if (k == 0) {
      if (gw[0] % 2 != 0 || !class_one(gw[0] / 2))
        return invalid("first weight not in class one");
      if (sched.m(gw[0]) < thr) return invalid("first weight below the slot threshold");
    } else {
      QsSequence prefix(gs.begin(), gs.begin() + k);
      long want;
      try {
        want = sigma(prefix, sched, coding);
      } catch (const ScheduleExhausted&) {
        return invalid("coder output past the table");
      }
      if (gw[k] != want) return invalid("weight differs from the coder output");
    }
  }

  if (c.bare == 0 && c.tail == 0) {
    c.kind = SeqKind::Paired;
    return c;
  }
  // maximality of the paired part, relative to the snapshot
  if (c.pairs > 0 && c.bare + c.tail > 0 && snapshot) {
    auto& g = gs[c.pairs];
    long w = gw[c.pairs];
    if (auto pre = rho_preimage(g, w, coding)) {
      long after = seq[2 * c.pairs - 1].vec.max_supp();
      std::string key = format_vec(pre->first) + "#" + std::to_string(w);
      if (pre->first.min_supp() > after && snapshot->stageOf.count(key))
        return invalid("paired part extendable within the snapshot");
    }
  }
  c.kind = c.tail == 0 ? SeqKind::SemiPaired : SeqKind::Special;
  if (!snapshot && c.pairs > 0 && c.bare + c.tail > 0)
    c.reason = "maximality unchecked (no snapshot)";
  return c;
}

/* -------- restriction to the even coordinates, with witness -------- */

/* which admissibility family a rebuilt node uses at each weight index; the
 * defaults are the plain counting families, the Schreier variant swaps in
 * its own */
using FamilyChooser = std::function<FamilyDescriptor(const ParamSchedule&, long)>;

inline FamilyDescriptor hi_an_family(const ParamSchedule& sched, long j) {
  return SetDescriptor{SetBase::WmT}.family_for(sched, j);
}
inline FamilyDescriptor ext_an_family(const ParamSchedule& sched, long j) {
  return SetDescriptor{SetBase::Ext}.family_for(sched, j);
}

namespace detail {

inline TreePtr even_witness_tree(const TreeAnalysis& t, const ParamSchedule& sched,
                                 const FamilyChooser& hiFam) {
  switch (t.kind) {
    case NodeKind::Leaf:
      return t.index % 2 == 0 ? TreeAnalysis::leaf(t.sign, t.index / 2) : nullptr;
    case NodeKind::Restrict: {
      auto in = even_witness_tree(*t.children[0], sched, hiFam);
      if (!in) return nullptr;
      return TreeAnalysis::restrict(
          Interval((t.interval.lo + 1) / 2, t.interval.hi / 2), in);
    }
    case NodeKind::ConvexComb: {
      std::vector<TreePtr> ch;
      for (auto& c : t.children) {
        auto w = even_witness_tree(*c, sched, hiFam);
        ch.push_back(w ? w
                       : TreeAnalysis::restrict(Interval(1, 0),
                                                TreeAnalysis::leaf(+1, 1)));
      }
      return TreeAnalysis::convex(t.weights, std::move(ch));
    }
    case NodeKind::WeightedOp: {
      std::vector<TreePtr> ch;
      for (auto& c : t.children) {
        auto w = even_witness_tree(*c, sched, hiFam);
        if (w && !realize(*w, sched).zero()) ch.push_back(w);
      }
      if (ch.empty()) return nullptr;
      return TreeAnalysis::weighted(t.weightIndex, hiFam(sched, t.weightIndex),
                                    std::move(ch));
    }
  }
  return nullptr;
}

}  // namespace detail

/* f|ev = hat(g) for a standard-set witness g; the recursion mirrors the
 * membership cases (pairs vanish, partners unhat, even operations descend).
 * Returns nullopt when the restriction is zero. */
inline std::optional<ConstructionRecord> restrict_even_witness(
    const ConstructionRecord& f, const ParamSchedule& sched,
    const FamilyChooser& hiFam = hi_an_family) {
  SparseVector want = restrict_to(f.vec, Parity::Even);
  TreePtr t;
  try {
    t = detail::even_witness_tree(*f.tree, sched, hiFam);
  } catch (const InvalidTree& e) {
    throw WitnessFailed(std::string("witness tree invalid: ") + e.what());
  }
  if (!t) {
    if (!want.zero()) throw WitnessFailed("nonzero even part without witness");
    return std::nullopt;
  }
  ConstructionRecord g;
  try {
    g = make_record(t, sched);
  } catch (const InvalidTree& e) {
    throw WitnessFailed(std::string("witness tree invalid: ") + e.what());
  }
  if (!(hat(g.vec) == want)) throw WitnessFailed("restriction/witness mismatch");
  return g;
}

/* -------- lifting a standard-set element -------- */

namespace detail {

inline TreePtr lift_tree(const TreeAnalysis& t, const ParamSchedule& sched,
                         const CodingState& coding,
                         const std::map<std::string, TreePtr>* known,
                         const FamilyChooser& extFam) {
  auto wrap = [&](TreePtr lifted, const SparseVector& v) {
    return TreeAnalysis::restrict(Interval(2 * v.min_supp() - 1, 2 * v.max_supp()),
                                  std::move(lifted));
  };
  switch (t.kind) {
    case NodeKind::Leaf:
      return TreeAnalysis::leaf(t.sign, 2 * t.index);
    case NodeKind::Restrict: {
      auto in = lift_tree(*t.children[0], sched, coding, known, extFam);
      return TreeAnalysis::restrict(
          Interval(2 * t.interval.lo - 1, 2 * t.interval.hi), in);
    }
    case NodeKind::ConvexComb: {
      std::vector<TreePtr> ch;
      for (auto& c : t.children)
        ch.push_back(lift_tree(*c, sched, coding, known, extFam));
      return TreeAnalysis::convex(t.weights, std::move(ch));
    }
    case NodeKind::WeightedOp: {
      FamilyDescriptor fam = extFam(sched, t.weightIndex);
      if (t.weightIndex % 2 == 0) {
        std::vector<TreePtr> ch;
        for (auto& c : t.children)
          ch.push_back(wrap(lift_tree(*c, sched, coding, known, extFam),
                            realize(*c, sched)));
        return TreeAnalysis::weighted(t.weightIndex, fam, std::move(ch));
      }
      // a coded chain: pair as far as the allocation log supports, continue
      // with bare partners while the pool form lasts, then lift recursively
      std::vector<SparseVector> gv;
      for (auto& c : t.children) gv.push_back(realize(*c, sched));
      size_t m = 0;
      while (m < gv.size() &&
             k_pool_of(gv[m], t.children[m]->kind == NodeKind::WeightedOp
                                  ? t.children[m]->weightIndex
                                  : -1,
                       sched))
        ++m;
      size_t l = 0;
      long after = 0;
      std::vector<TreePtr> fTrees;
      while (l < m) {
        long w = t.children[l]->weightIndex;
        auto pre = rho_preimage(gv[l], w, coding);
        if (!pre || pre->first.min_supp() <= after) break;
        TreePtr ft;
        if (known) {
          auto it = known->find(format_vec(pre->first) + "#" + std::to_string(w));
          if (it != known->end()) ft = it->second;
        }
        if (!ft) ft = flat_tree_of(pre->first, w, sched);
        if (!ft) break;
        fTrees.push_back(ft);
        after = 2 * gv[l].max_supp();
        ++l;
      }
      std::vector<TreePtr> ch;
      for (size_t k = 0; k < gv.size(); ++k) {
        if (k < l) ch.push_back(fTrees[k]);
        if (k < m) {
          ch.push_back(hat_pool_record(support_of(gv[k]),
                                       t.children[k]->weightIndex, sched)
                           .tree);
        } else {
          ch.push_back(
              wrap(lift_tree(*t.children[k], sched, coding, known, extFam), gv[k]));
        }
      }
      return TreeAnalysis::weighted(t.weightIndex, fam, std::move(ch));
    }
  }
  return nullptr;
}

}  // namespace detail

/* phi with phi|ev = hat(g); `known` maps vec#weight to trees for pairing
 * inputs that are not flat leaf combinations */
inline ConstructionRecord lift_witness(
    const ConstructionRecord& g, const ParamSchedule& sched, const CodingState& coding,
    const std::map<std::string, TreePtr>* known = nullptr,
    const FamilyChooser& extFam = ext_an_family) {
  ConstructionRecord phi;
  try {
    phi = make_record(detail::lift_tree(*g.tree, sched, coding, known, extFam), sched);
  } catch (const InvalidTree& e) {
    throw WitnessFailed(std::string("lift invalid: ") + e.what());
  }
  if (!(restrict_to(phi.vec, Parity::Even) == hat(g.vec)))
    throw WitnessFailed("lift does not restrict to the doubled input");
  return phi;
}

/* -------- membership walk -------- */

inline bool wex_member(const TreeAnalysis& t, const ParamSchedule& sched,
                       CodingState& coding, const ExtStage* snapshot = nullptr) {
  switch (t.kind) {
    case NodeKind::Leaf:
      return t.index >= 1;
    case NodeKind::Restrict:
      return wex_member(*t.children[0], sched, coding, snapshot);
    case NodeKind::ConvexComb: {
      for (auto& c : t.children)
        if (!wex_member(*c, sched, coding, snapshot)) return false;
      return true;
    }
    case NodeKind::WeightedOp: {
      try {
        realize(t, sched);
      } catch (const InvalidTree&) {
        return false;
      }
      for (auto& c : t.children)
        if (!wex_member(*c, sched, coding, snapshot)) return false;
      if (t.weightIndex % 2 == 0) return true;
      std::vector<ConstructionRecord> seq;
      for (auto& c : t.children) seq.push_back(make_record(c, sched));
      return classify_sequence(t.weightIndex, seq, sched, coding, snapshot).kind !=
             SeqKind::Invalid;
    }
  }
  return false;
}

/* -------- dependent paired sequences -------- */

struct DependentPairedSequence {
  std::vector<SparseVector> xs;        // x_1 .. x_{2L}
  std::vector<ConstructionRecord> fs;  // f_1 .. f_{2L}
  std::vector<long> weights;           // weight index per pair
  long j = 1;
  Rat C = Rat(1);
};

/* exact pairs over odd coordinates only */
inline SepSupply odd_sep_supply(const ParamSchedule& sched) {
  return [&sched](long w, long start) -> ExactPairRecord {
    Int nBig = sched.n(w);
    if (nBig > 1 << 16) throw SupplyExhausted("block too wide to materialize");
    long n = nBig.convert_to<long>();
    long p = start % 2 == 1 ? start : start + 1;
    std::vector<std::pair<SparseVector, ConstructionRecord>> blocks;
    for (long i = 0; i < n; ++i, p += 2)
      blocks.push_back({SparseVector::unit(p),
                        make_record(TreeAnalysis::leaf(+1, p), sched)});
    return build_sep(w, blocks, sched);
  };
}

/* Alternates odd-supported exact pairs with their hatted partner pairs; the
 * partner chain carries the coded weights, so the whole interleaved sequence
 * classifies as paired. */
inline DependentPairedSequence build_dependent_paired(long j, long length,
                                                      SepSupply oddSource,
                                                      const ParamSchedule& sched,
                                                      CodingState& coding,
                                                      long pool = 1) {
  long slot = 2 * j - 1;
  if (length < 1 || Int(length) > sched.n(slot))
    throw InputError("bad sequence length");
  DependentPairedSequence dp;
  dp.j = j;
  QsSequence gs;
  long after = 0;
  for (long k = 0; k < length; ++k) {
    long w = k == 0 ? first_weight_index(j, sched) : sigma(gs, sched, coding);
    auto sep = oddSource(w, after + 1);
    if (sep.j != w || !sep.f.tag.weighted || *sep.f.tag.weighted != w)
      throw SupplyExhausted("supply returned the wrong weight");
    if (sep.x.min_supp() <= after) throw SupplyExhausted("supply went backwards");
    if (!detail::odd_supported(sep.f.vec))
      throw InputError("supply functional not supported on odd coordinates");
    auto g = rho(pool, w / 2, sep.f, sched, coding);
    FiniteSet F = support_of(g.vec);
    auto fhat = hat_pool_record(F, w, sched);
    SparseVector xhat;
    Rat coeff(sched.m(w), sched.n(w));
    for (long i : F) xhat.set(2 * i, coeff);
    NormEngine eng(sched, {SetBase::WmT}, (long)F.size() + 8);
    Rat chat = eng.norm(xhat).value;
    dp.C = std::max(dp.C, std::max(sep.C, chat));
    dp.xs.push_back(sep.x);
    dp.xs.push_back(xhat);
    dp.fs.push_back(sep.f);
    dp.fs.push_back(fhat);
    dp.weights.push_back(w);
    gs.push_back(g.vec);
    after = xhat.max_supp();
  }
  auto cls = classify_sequence(slot, dp.fs, sched, coding);
  if (cls.kind != SeqKind::Paired)
    throw Error("internal: dependent construction not a paired chain: " + cls.reason);
  return dp;
}

/* F = m_slot^{-1} (f_1 + ... + f_{2L}) */
inline ConstructionRecord dependent_paired_chain(const DependentPairedSequence& dp,
                                                 const ParamSchedule& sched) {
  long slot = 2 * dp.j - 1;
  std::vector<TreePtr> kids;
  for (auto& f : dp.fs) kids.push_back(f.tree);
  return make_record(TreeAnalysis::weighted(
                         slot, SetDescriptor{SetBase::Ext}.family_for(sched, slot),
                         std::move(kids)),
                     sched);
}

/* -------- the estimates around a dependent paired sequence -------- */

inline Report verify_extension_estimates(const DependentPairedSequence& dp,
                                         const std::vector<ConstructionRecord>& specials,
                                         const ParamSchedule& sched) {
  Report rep;
  long L = (long)dp.weights.size();
  long slot = 2 * dp.j - 1;
  Int m = sched.m(slot), n = sched.n(slot);
  rep.title = "dependent-paired estimates, slot " + std::to_string(slot) +
              ", length " + std::to_string(L) + " of " + n.str() + ", C = " +
              to_string(dp.C);

  auto F = dependent_paired_chain(dp, sched);
  SparseVector sum, alt;
  for (long k = 0; k < 2 * L; ++k) {
    sum += dp.xs[k];
    alt += Rat(k % 2 == 0 ? 1 : -1) * dp.xs[k];
  }

  Rat got = evaluate(F.vec, Rat(m, n) * sum);
  Rat want = Rat(2 * L) / Rat(n);
  rep.add("paired-identity-sum", "F((m/n) sum (x_odd + x_even)) counts every pair",
          to_string(got) + " = " + to_string(want),
          got == want ? Verdict::Pass : Verdict::Fail,
          Int(L) == n ? "full length, value 2" : "partial length");

  Rat gotAlt = evaluate(F.vec, Rat(Int(1), n) * alt);
  rep.add("paired-identity-alternating", "F(n^{-1} sum (x_odd - x_even)) cancels pairwise",
          to_string(gotAlt) + " = 0", gotAlt == 0 ? Verdict::Pass : Verdict::Fail);

  bool parity = true;
  for (long k = 0; k < 2 * L; ++k) {
    for (auto& [i, c] : dp.xs[k].entries())
      if ((i % 2 == 0) != (k % 2 == 1)) parity = false;
    if (k % 2 == 0 && !detail::odd_supported(dp.fs[k].vec)) parity = false;
  }
  rep.add("parity-separation", "odd pairs live on the odd, partners on the even coordinates",
          std::to_string(2 * L) + " entries", parity ? Verdict::Pass : Verdict::Fail);

  Rat sup(0);
  for (auto& s : specials) {
    Rat v = rabs(evaluate(s.vec, alt));
    if (v > sup) sup = v;
  }
  Rat bound = Rat(6) * dp.C * (Rat(1) + Rat(2 * L) / Rat(m * m));
  rep.add("alternating-action",
          "|G(sum (-1)^{k+1} x_k)| <= 6C(1 + #E/m^2) over the generated slot functionals",
          to_string(sup) + " <= " + to_string(bound),
          sup <= bound ? Verdict::Pass : Verdict::Fail,
          std::to_string((long)specials.size()) + " functionals");
  return rep;
}

/* -------- the even-annihilating perturbation -------- */

/* f = (1-d) x* + (1-d) sum |x*(e_2n)| eps_2n e*_2n with eps killing the even
 * coordinates; stays in the rational convex hull as long as the total weight
 * (1-d)(1 + even mass) does not exceed 1 */
inline ConstructionRecord build_annihilating_functional(const SparseVector& x,
                                                        const ConstructionRecord& xstar,
                                                        const Rat& delta,
                                                        const ParamSchedule& sched) {
  if (!(delta > 0 && delta < 1)) throw DeltaOutOfRange("delta must lie in (0,1)");
  if (x.zero()) throw InputError("zero vector");
  Interval E{x.min_supp(), x.max_supp()};
  SparseVector xs = restrict_to(xstar.vec, E);
  Rat evenMass(0);
  for (auto& [i, c] : xs.entries())
    if (i % 2 == 0) evenMass += rabs(c);
  Rat one(1);
  Rat scale = one - delta;
  if (Rat(scale * (one + evenMass)) > one)
    throw PreconditionFailed("even-coordinate mass of x* too large for delta");

  std::vector<Rat> ws;
  std::vector<TreePtr> ch;
  ws.push_back(scale);
  ch.push_back(TreeAnalysis::restrict(E, xstar.tree));
  for (auto& [i, c] : xs.entries())
    if (i % 2 == 0) {
      ws.push_back(Rat(scale * rabs(c)));
      ch.push_back(TreeAnalysis::leaf(c > 0 ? -1 : +1, i));
    }
  Rat used(0);
  for (auto& w : ws) used += w;
  if (used < one) {  // pad to a genuine convex combination
    ws.push_back(Rat(one - used));
    ch.push_back(TreeAnalysis::restrict(Interval(1, 0), TreeAnalysis::leaf(+1, 1)));
  }

  ConstructionRecord f =
      make_record(TreeAnalysis::convex(std::move(ws), std::move(ch)), sched);
  for (auto& [i, c] : f.vec.entries())
    if (i % 2 == 0) throw Error("internal: even coordinate survived");
  return f;
}

}  // namespace hix
