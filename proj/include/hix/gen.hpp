#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "norm.hpp"

namespace hix {

/* Brute-force enumeration of the norming set within a truncation, used as an
 * independent oracle for the norm recursion.
 *
 * Interval restrictions are not enumerated: a restriction pushes through
 * weighted nodes onto the leaves, where it either keeps or kills a leaf, so
 * every restriction realizes to a functional the closure already produces.
 * Convex combinations never move a sup and are skipped as well.
 *
 * Weight indices stop once m_j exceeds maxMass: any weight-m_j functional
 * acts below maxMass/m_j < 1, while the leaves already realize actions >= 1
 * on the integer vectors the oracle is compared on. */
struct GenOptions {
  long depth = 5;
  long supportBound = 5;
  Rat maxMass = Rat(10);  // callers pass the max l1-mass of probe vectors
  size_t budget = 2000000;
};

class GeneratedSet {
 public:
  GeneratedSet(const ParamSchedule& sched, const SetDescriptor& desc, GenOptions opt)
      : sched_(sched), desc_(desc), opt_(opt) {
    build();
  }

  const std::vector<ConstructionRecord>& records() const { return recs_; }

  Rat sup_action(const SparseVector& x) const {
    Rat best(0);
    for (auto& r : recs_) {
      Rat v = evaluate(r.vec, x);
      if (v > best) best = v;
    }
    return best;
  }

  const ConstructionRecord* argmax(const SparseVector& x) const {
    const ConstructionRecord* arg = nullptr;
    Rat best(0);
    for (auto& r : recs_) {
      Rat v = evaluate(r.vec, x);
      if (arg == nullptr || v > best) {
        best = v;
        arg = &r;
      }
    }
    return arg;
  }

 private:
  struct Partial {
    SparseVector sum;
    std::vector<TreePtr> children;
    FiniteSet minima;  // minsupp of each child, for Schreier admissibility
    long maxsupp = 0;
    size_t count = 0;
  };

  void add(ConstructionRecord rec) {
    auto key = std::make_pair(rec.vec, rec.tag);
    if (!index_.emplace(key, recs_.size()).second) return;
    recs_.push_back(std::move(rec));
    if (recs_.size() > opt_.budget)
      throw BudgetExceeded("generated " + std::to_string(recs_.size()) + " records");
  }

  void build() {
    for (long n = 1; n <= opt_.supportBound; ++n) {
      for (int s : {+1, -1}) {
        auto t = TreeAnalysis::leaf(s, n);
        add(make_record(t, sched_));
      }
    }
    std::vector<long> weights;
    for (long j = 0; sched_.has(j); ++j) {
      if (Rat(sched_.m(j)) > opt_.maxMass) break;
      weights.push_back(j);
    }
    for (long round = 0; round < opt_.depth; ++round) {
      size_t before = recs_.size();
      for (long j : weights) close_once(j);
      if (recs_.size() == before) break;  // fixpoint
    }
  }

  void close_once(long j) {
    FamilyDescriptor fam = desc_.family_for(sched_, j);
    size_t cap = fam.order > Int(opt_.supportBound)
                     ? (size_t)opt_.supportBound
                     : fam.order.convert_to<size_t>();
    // snapshot by value; emit() grows recs_ while we iterate
    std::vector<ConstructionRecord> pool = recs_;
    std::sort(pool.begin(), pool.end(),
              [](const ConstructionRecord& a, const ConstructionRecord& b) {
                return a.vec.min_supp() < b.vec.min_supp();
              });

    // frontier chains, deduplicated by (sum, maxsupp, minima signature)
    std::map<std::tuple<SparseVector, long, FiniteSet>, Partial> layer;
    auto emit = [&](const Partial& p) {
      if (!admissible(fam, p)) return;
      Rat inv(Int(1), sched_.m(j));
      ConstructionRecord rec;
      rec.vec = inv * p.sum;
      rec.tree = TreeAnalysis::weighted(j, fam, p.children);
      rec.tag = {j};
      add(std::move(rec));
    };
    auto push = [&](Partial p) {
      if (!extendable(fam, p)) return;
      auto key = std::make_tuple(p.sum, p.maxsupp, sig(fam, p));
      auto [it, fresh] = layer.try_emplace(std::move(key), p);
      if (!fresh && p.count < it->second.count) it->second = p;
      if (layer.size() > opt_.budget) throw BudgetExceeded("chain frontier");
    };

    for (auto& r : pool) {
      Partial p{r.vec, {r.tree}, {r.vec.min_supp()}, r.vec.max_supp(), 1};
      emit(p);
      push(std::move(p));
    }
    while (!layer.empty()) {
      std::map<std::tuple<SparseVector, long, FiniteSet>, Partial> next;
      std::swap(next, layer);
      for (auto& [key, p] : next) {
        if (p.count >= cap) continue;
        for (auto& r : pool) {
          if (r.vec.min_supp() <= p.maxsupp) continue;
          Partial q = p;
          q.sum += r.vec;
          q.children.push_back(r.tree);
          q.minima.push_back(r.vec.min_supp());
          q.maxsupp = r.vec.max_supp();
          ++q.count;
          emit(q);
          push(std::move(q));
        }
      }
    }
  }

  bool admissible(const FamilyDescriptor& fam, const Partial& p) const {
    if (fam.kind == FamilyKind::AN) return Int(p.count) <= fam.order;
    return member(fam, p.minima);
  }

  /* prefix test: may a chain still grow into an admissible one? AN and the
   * Schreier kinds are hereditary, so inadmissible minima cannot recover */
  bool extendable(const FamilyDescriptor& fam, const Partial& p) const {
    if (fam.kind == FamilyKind::AN) return Int(p.count) <= fam.order;
    return member(fam, p.minima);
  }

  FiniteSet sig(const FamilyDescriptor& fam, const Partial& p) const {
    if (fam.kind == FamilyKind::AN) return {(long)p.count};
    return p.minima;
  }

  const ParamSchedule& sched_;
  const SetDescriptor& desc_;
  GenOptions opt_;
  std::vector<ConstructionRecord> recs_;
  std::map<std::pair<SparseVector, WeightTag>, size_t> index_;
};

/* Dominance-pruned exhaustive closure.  The full truncation blows up
 * exponentially, but for computing sup{f(x)} two reductions are exact:
 *
 *   1. The norming set is sign symmetric (flip every leaf), so only the
 *      profile of absolute values matters: sup f(x) = max over nonnegative
 *      profiles p of sum p_k |x_k|.
 *   2. If q >= p pointwise with the same support hull [min, max], then q beats
 *      p as a root for every x, and substituting q for p inside any admissible
 *      tuple keeps it admissible (count and minima unchanged) and raises the
 *      parent pointwise within the same hull.  So p can be dropped entirely;
 *      by induction every functional of the full closure is dominated, at the
 *      closure fixpoint, by a kept profile.
 *
 * Each kept profile carries an all-plus witness tree, so the reported sup is
 * always attained by a genuine member of the set; equality against the norm
 * recursion is therefore a two-sided test, not a self-check. */
class ProfileOracle {
 public:
  ProfileOracle(const ParamSchedule& sched, const SetDescriptor& desc, GenOptions opt)
      : sched_(sched), desc_(desc), opt_(opt) {
    build();
  }

  const std::vector<ConstructionRecord>& records() const { return recs_; }
  bool reached_fixpoint() const { return fixpoint_; }

  Rat sup_action(const SparseVector& x) const {
    Rat best(0);
    for (auto& r : recs_) {
      Rat v(0);
      for (auto& [k, c] : r.vec.entries()) v += c * rabs(x.at(k));
      if (v > best) best = v;
    }
    return best;
  }

  /* witness with leaf signs flipped to match x; certifies sup_action(x) */
  TreePtr witness(const SparseVector& x) const {
    const ConstructionRecord* arg = nullptr;
    Rat best(-1);
    for (auto& r : recs_) {
      Rat v(0);
      for (auto& [k, c] : r.vec.entries()) v += c * rabs(x.at(k));
      if (v > best) {
        best = v;
        arg = &r;
      }
    }
    if (!arg) throw SearchFailed("empty oracle");
    return resign(arg->tree, x);
  }

 private:
  static TreePtr resign(const TreePtr& t, const SparseVector& x) {
    if (t->kind == NodeKind::Leaf)
      return TreeAnalysis::leaf(x.at(t->index) < 0 ? -1 : +1, t->index);
    std::vector<TreePtr> ch;
    for (auto& c : t->children) ch.push_back(resign(c, x));
    return TreeAnalysis::weighted(t->weightIndex, t->family, std::move(ch));
  }

  // q absorbs p: same support hull, q >= p everywhere
  static bool absorbs(const SparseVector& q, const SparseVector& p) {
    if (q.min_supp() != p.min_supp() || q.max_supp() != p.max_supp()) return false;
    for (auto& [k, c] : p.entries())
      if (q.at(k) < c) return false;
    return true;
  }

  bool insert(ConstructionRecord rec) {
    for (auto& r : recs_)
      if (absorbs(r.vec, rec.vec)) return false;
    std::erase_if(recs_, [&](const ConstructionRecord& r) {
      return absorbs(rec.vec, r.vec);
    });
    recs_.push_back(std::move(rec));
    if (recs_.size() > opt_.budget) throw BudgetExceeded("oracle antichain");
    return true;
  }

  void build() {
    for (long n = 1; n <= opt_.supportBound; ++n)
      insert(make_record(TreeAnalysis::leaf(+1, n), sched_));
    std::vector<long> weights;
    for (long j = 0; sched_.has(j); ++j) {
      if (Rat(sched_.m(j)) > opt_.maxMass) break;
      weights.push_back(j);
    }
    for (long round = 0; round < opt_.depth; ++round) {
      bool grew = false;
      for (long j : weights) grew |= close_once(j);
      if (!grew) {
        fixpoint_ = true;
        break;
      }
    }
  }

  struct Partial {
    SparseVector sum;
    std::vector<TreePtr> children;
    FiniteSet minima;
    long maxsupp = 0;
    size_t count = 0;
  };

  bool close_once(long j) {
    FamilyDescriptor fam = desc_.family_for(sched_, j);
    size_t cap = fam.order > Int(opt_.supportBound)
                     ? (size_t)opt_.supportBound
                     : fam.order.convert_to<size_t>();
    std::vector<ConstructionRecord> pool = recs_;
    std::sort(pool.begin(), pool.end(),
              [](const ConstructionRecord& a, const ConstructionRecord& b) {
                return a.vec.min_supp() < b.vec.min_supp();
              });
    bool grew = false;
    Rat inv(Int(1), sched_.m(j));
    auto emit = [&](const Partial& p) {
      bool ok = fam.kind == FamilyKind::AN ? Int(p.count) <= fam.order
                                           : member(fam, p.minima);
      if (!ok) return;
      ConstructionRecord rec;
      rec.vec = inv * p.sum;
      rec.tree = TreeAnalysis::weighted(j, fam, p.children);
      rec.tag = {j};
      grew |= insert(std::move(rec));
    };
    // chains over the antichain; families are hereditary so a chain whose
    // minima already fail can never recover
    std::map<std::tuple<SparseVector, long, FiniteSet>, Partial> layer;
    auto push = [&](Partial p) {
      bool ok = fam.kind == FamilyKind::AN ? Int(p.count) <= fam.order
                                           : member(fam, p.minima);
      if (!ok) return;
      FiniteSet s = fam.kind == FamilyKind::AN ? FiniteSet{(long)p.count} : p.minima;
      auto key = std::make_tuple(p.sum, p.maxsupp, std::move(s));
      layer.try_emplace(std::move(key), std::move(p));
      if (layer.size() > opt_.budget) throw BudgetExceeded("oracle frontier");
    };
    for (auto& r : pool) {
      Partial p{r.vec, {r.tree}, {r.vec.min_supp()}, r.vec.max_supp(), 1};
      emit(p);
      push(std::move(p));
    }
    while (!layer.empty()) {
      std::map<std::tuple<SparseVector, long, FiniteSet>, Partial> next;
      std::swap(next, layer);
      for (auto& [key, p] : next) {
        if (p.count >= cap) continue;
        for (auto& r : pool) {
          if (r.vec.min_supp() <= p.maxsupp) continue;
          Partial q = p;
          q.sum += r.vec;
          q.children.push_back(r.tree);
          q.minima.push_back(r.vec.min_supp());
          q.maxsupp = r.vec.max_supp();
          ++q.count;
          emit(q);
          push(std::move(q));
        }
      }
    }
    return grew;
  }

  const ParamSchedule& sched_;
  const SetDescriptor& desc_;
  GenOptions opt_;
  std::vector<ConstructionRecord> recs_;
  bool fixpoint_ = false;
};

}  // namespace hix
