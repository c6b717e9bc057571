#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>

#include "errors.hpp"
#include "schedule.hpp"
#include "tree.hpp"

namespace hix {

struct NormResult {
  Rat value;
  TreePtr cert;  // certify(cert, x) == value
};

/* Optional persistent value store (see the cli layer for file replay).
 * Values only; certificates are always recomputed, and a hit is checked
 * against the fresh computation, so a stale cache can never change results. */
struct ValueCache {
  std::map<std::string, Rat> values;
  bool dirty = false;

  std::optional<Rat> get(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
  void put(const std::string& k, const Rat& v) {
    if (values.emplace(k, v).second) dirty = true;
  }
};

/* Exact norm and constrained-action computation for the unrestricted mixed
 * Tsirelson norming sets.  The recursion:
 *   ||x|| = max( max_k |x(k)|,  max_j m_j^{-1} max_partitions sum_i ||E_i x|| )
 * over admissible interval partitions with at least two nonempty parts; the
 * one-part branch is dominated by m_j^{-1}||x|| <= ||x||/2 and is therefore
 * only searched when a root weight is prescribed. */
class NormEngine {
 public:
  NormEngine(ParamSchedule sched, SetDescriptor desc, long supportBudget = 64,
             ValueCache* cache = nullptr)
      : sched_(std::move(sched)),
        desc_(desc),
        supportBudget_(supportBudget),
        cache_(cache) {}

  const ParamSchedule& schedule() const { return sched_; }
  const SetDescriptor& descriptor() const { return desc_; }

  NormResult norm(const SparseVector& x) { return norm_impl(x, -1); }

  NormResult norm_avoiding(const SparseVector& x, long avoid) {
    return norm_impl(x, avoid);
  }

  /* Max of f(x) over functionals with root weight m_i; with avoid set, over
   * functionals whose trees contain no node of the avoided weight.  The call
   * with avoid == i asks for the banned-weight sup with no root constraint
   * (a root of the banned weight would be contradictory). */
  NormResult max_action(const SparseVector& x, long i, long avoid = -1) {
    if (!sched_.has(i)) throw ScheduleExhausted("root weight outside schedule");
    if (avoid == i) return norm_impl(x, avoid);
    Key key{1, i, avoid, x};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    NormResult r;
    if (x.zero()) {
      r = {Rat(0), TreeAnalysis::leaf(+1, 1)};
    } else {
      FamilyDescriptor fam = desc_.family_for(sched_, i);
      auto pb = best_partition(x, fam, 1, avoid);
      if (!pb) throw Error("internal: one-part partition always exists");
      r.value = Rat(Int(1), sched_.m(i)) * pb->value;
      r.cert = TreeAnalysis::weighted(i, fam, pb->certs);
    }
    check_cache(key, r.value);
    memo_.emplace(key, r);
    return r;
  }

  std::string cache_key(int mode, long root, long avoid, const SparseVector& x) const {
    std::string c = "m" + std::to_string(mode) + "r" + std::to_string(root) + "a" +
                    std::to_string(avoid);
    return sched_.id() + "|" + desc_.id() + "|" + format_vec(x) + "|" + c;
  }

 private:
  using Key = std::tuple<int, long, long, SparseVector>;  // mode, root, avoid, x

  struct PartBest {
    Rat value;
    std::vector<TreePtr> certs;
  };

  void check_cache(const Key& k, const Rat& v) {
    if (!cache_) return;
    std::string ck = cache_key(std::get<0>(k), std::get<1>(k), std::get<2>(k),
                               std::get<3>(k));
    if (auto hit = cache_->get(ck)) {
      if (*hit != v) throw Error("cache value mismatch for " + ck);
    } else {
      cache_->put(ck, v);
    }
  }

  NormResult norm_impl(const SparseVector& x, long avoid) {
    Key key{0, -1, avoid, x};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    NormResult best;
    best.value = 0;
    best.cert = TreeAnalysis::leaf(+1, 1);
    for (auto& [k, c] : x.entries()) {
      Rat a = rabs(c);
      if (a > best.value) {
        best.value = a;
        best.cert = TreeAnalysis::leaf(c > 0 ? +1 : -1, k);
      }
    }
    if (x.zero()) {
      memo_.emplace(key, best);
      return best;
    }

    Rat sumabs = l1_mass(x);
    long j = 0;
    while (true) {
      if (!sched_.has(j)) {
        // all later weights have m >= m(j-1)+1, so their actions stay at or
        // below sumabs/(m(j-1)+1)
        Rat tail = sumabs / Rat(sched_.m(j - 1) + 1);
        if (tail > best.value)
          throw ScheduleExhausted("norm needs weight index " + std::to_string(j));
        break;
      }
      Rat bound = sumabs / Rat(sched_.m(j));
      if (bound <= best.value) break;
      if (j != avoid) {
        FamilyDescriptor fam = desc_.family_for(sched_, j);
        auto pb = best_partition(x, fam, 2, avoid);
        if (pb) {
          Rat v = Rat(Int(1), sched_.m(j)) * pb->value;
          if (v > best.value) {
            best.value = v;
            best.cert = TreeAnalysis::weighted(j, fam, pb->certs);
          }
        }
      }
      ++j;
    }
    check_cache(key, best.value);
    memo_.emplace(key, best);
    return best;
  }

  /* maximize sum of chunk norms over splits of x's support into consecutive
   * chunks, admissible for fam, with at least minParts chunks */
  std::optional<PartBest> best_partition(const SparseVector& x,
                                         const FamilyDescriptor& fam, size_t minParts,
                                         long avoid) {
    FiniteSet pts = support_of(x);
    size_t t = pts.size();
    if ((long)t > supportBudget_)
      throw BudgetExceeded("partition search over " + std::to_string(t) + " points");
    if (fam.kind == FamilyKind::AN) {
      size_t cap = fam.order > Int((long)t) ? t : fam.order.convert_to<size_t>();
      if (cap < minParts || t < minParts) return std::nullopt;

      auto chunk = [&](size_t a, size_t b) {  // points a..b inclusive
        return norm_impl(restrict_to(x, Interval(pts[a], pts[b])), avoid);
      };
      // g[k][p]: best split of the first p points into exactly k chunks
      std::vector<std::vector<Rat>> g(cap + 1, std::vector<Rat>(t + 1, Rat(-1)));
      std::vector<std::vector<size_t>> from(cap + 1, std::vector<size_t>(t + 1, 0));
      // the full-support chunk would recurse into this very call; it is only
      // needed when a one-part split is allowed
      size_t pmax = minParts <= 1 ? t : t - 1;
      for (size_t p = 1; p <= pmax; ++p) g[1][p] = chunk(0, p - 1).value;
      for (size_t k = 2; k <= cap; ++k)
        for (size_t p = k; p <= t; ++p)
          for (size_t q = k - 1; q < p; ++q) {
            if (g[k - 1][q] < 0) continue;
            Rat v = g[k - 1][q] + chunk(q, p - 1).value;
            if (v > g[k][p]) {
              g[k][p] = v;
              from[k][p] = q;
            }
          }
      size_t bestK = 0;
      for (size_t k = std::max<size_t>(minParts, 1); k <= cap; ++k)
        if (g[k][t] >= 0 && (bestK == 0 || g[k][t] > g[bestK][t])) bestK = k;
      if (bestK == 0) return std::nullopt;
      PartBest pb;
      pb.value = g[bestK][t];
      std::vector<std::pair<size_t, size_t>> chunks;
      size_t p = t;
      for (size_t k = bestK; k >= 1; --k) {
        size_t q = k == 1 ? 0 : from[k][p];
        chunks.emplace_back(q, p - 1);
        p = q;
      }
      std::reverse(chunks.begin(), chunks.end());
      for (auto& [a, b] : chunks) pb.certs.push_back(chunk(a, b).cert);
      return pb;
    }
    // Schreier-kind families: explicit enumeration
    if (t > 16) throw BudgetExceeded("Schreier partition search over " + std::to_string(t));
    std::optional<PartBest> bestPb;
    for (auto& part : admissible_partitions(fam, pts)) {
      if (part.size() < minParts) continue;
      Rat v(0);
      std::vector<TreePtr> certs;
      for (auto& iv : part) {
        auto nr = norm_impl(restrict_to(x, iv), avoid);
        v += nr.value;
        certs.push_back(nr.cert);
      }
      if (!bestPb || v > bestPb->value) bestPb = PartBest{v, std::move(certs)};
    }
    return bestPb;
  }

  ParamSchedule sched_;
  SetDescriptor desc_;
  long supportBudget_;
  ValueCache* cache_;
  std::map<Key, NormResult> memo_;
};

}  // namespace hix
