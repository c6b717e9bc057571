#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "norm.hpp"
#include "reports.hpp"

namespace hix {

/* Certified two-sided bounds for sup f(1_t), the best action of the norming
 * set on a flat 0/1 vector over t consecutive points, at supports far too
 * large to materialize (the bound checks need t around 2^20).
 *
 * Upper bounds: group the leaves of any candidate tree by the multiset of
 * weights on their root path.  A profile with l_j nodes of weight index j
 * contributes value v_p = prod m_j^{-l_j} per leaf and consumes Kraft
 * capacity k_p = prod D_j^{-l_j}, D_j the arity cap of the family at j.
 * Every admissible tree satisfies sum c_p k_p <= R (R = 1 free, R = min(D_i,t)
 * below a prescribed root) and sum c_p <= t, because contributing leaves sit
 * at distinct points.  So sup f(1_t) <= the LP maximum of sum c_p v_p, which
 * is computed exactly: vertices of a two-constraint LP use at most two
 * profiles; a dual pair (lam, mu) with lam k_p + mu >= v_p for all enumerated
 * profiles and mu at least the enumeration cutoff covers the infinite tail
 * (deeper profiles have v_p below the cutoff) and certifies lam R + mu t.
 *
 * Lower bounds: explicit balanced split trees, evaluated exactly but never
 * materialized; the witness is the split shape.
 *
 * Verdicts combine: upper <= bound gives Pass, lower > bound gives Fail,
 * anything else is Indeterminate. */
class FlatSupEngine {
 public:
  FlatSupEngine(const ParamSchedule& sched, const SetDescriptor& desc)
      : sched_(sched), desc_(desc) {
    if (!desc.an_kind()) throw InputError("flat engine needs AN-kind descriptors");
    for (long j = 0; sched_.has(j); ++j) {
      weights_.push_back(j);
      if (sched_.mode() != ScheduleMode::DeskTable && j >= 8) break;
    }
  }

  struct Bounds {
    Rat lower;
    Rat upper;
    std::string witness;  // split shape attaining lower
  };

  /* sup over functionals whose root is a weight-m_i operation; avoid bans a
   * weight index from the entire tree */
  Bounds root_sup(long i, long t, long avoid = -1) {
    if (i == avoid) throw InputError("root weight equals the banned weight");
    Rat inv(Int(1), sched_.m(i));
    long cap = cap_for(i, t);
    auto [lo, wit] = best_split(i, t, avoid);
    Bounds b;
    b.lower = lo;
    b.witness = wit;
    b.upper = inv * lp_upper(Rat(cap), t, avoid);
    if (b.upper < b.lower) throw Error("internal: bound inversion");
    return b;
  }

  /* sup over the whole set (leaves included) with one weight index banned */
  Bounds free_sup(long t, long avoid = -1) {
    Bounds best{Rat(1), Rat(1), "leaf"};
    for (long i : weights_) {
      if (i == avoid) continue;
      auto b = root_sup(i, t, avoid);
      if (b.lower > best.lower) {
        best.lower = b.lower;
        best.witness = b.witness;
      }
    }
    best.upper = std::max(Rat(1), lp_upper(Rat(1), t, avoid));
    if (best.upper < best.lower) throw Error("internal: bound inversion");
    return best;
  }

 private:
  struct Profile {
    Rat v, k;
  };

  long cap_for(long i, long t) {
    Int d = desc_.family_for(sched_, i).order;
    return d > Int(t) ? t : d.convert_to<long>();
  }

  /* balanced split lower bound: L(t) = best over weight j and part count k of
   * m_j^{-1} (r L(q+1) + (k-r) L(q)), t = k q + r; leaves give L(1) = 1 */
  Rat lower_value(long t, long avoid) {
    if (t <= 1) return Rat(1);
    auto key = std::make_pair(t, avoid);
    if (auto it = lmemo_.find(key); it != lmemo_.end()) return it->second;
    lmemo_[key] = Rat(1);  // cut cycles defensively; overwritten below
    Rat best(1);
    for (long j : weights_) {
      if (j == avoid) continue;
      Rat v = std::get<0>(split_for(j, t, avoid));
      if (v > best) best = v;
    }
    lmemo_[key] = best;
    return best;
  }

  std::tuple<Rat, std::string> split_for(long j, long t, long avoid) {
    long cap = cap_for(j, t);
    Rat inv(Int(1), sched_.m(j));
    Rat best(0);
    long bestK = 1;
    for (long k : split_candidates(t, cap)) {
      if (k == 1 && t > 1) continue;  // a 1-part split never improves anything
      long q = t / k, r = t % k;
      Rat v = inv * (Rat(k - r) * lower_value(q, avoid));
      if (r) v += inv * Rat(r) * lower_value(q + 1, avoid);
      if (v > best) {
        best = v;
        bestK = k;
      }
    }
    std::ostringstream wit;
    wit << "w" << j << " x" << bestK << " over " << t;
    return {best, wit.str()};
  }

  std::tuple<Rat, std::string> best_split(long i, long t, long avoid) {
    return split_for(i, t, avoid);
  }

  static std::vector<long> split_candidates(long t, long cap) {
    std::vector<long> ks;
    auto add = [&](long k) {
      if (k >= 1 && k <= cap && k <= t &&
          std::find(ks.begin(), ks.end(), k) == ks.end())
        ks.push_back(k);
    };
    add(std::min(cap, t));
    for (long b = 1; b <= 8; ++b) add((t + b - 1) / b);
    add(1);
    add(2);
    return ks;
  }

  std::vector<Profile> profiles(long avoid, const Rat& vcut) {
    std::vector<Profile> out;
    std::vector<std::pair<Rat, Rat>> dims;  // (1/m_j, 1/D_j)
    for (long j : weights_) {
      if (j == avoid) continue;
      dims.push_back({Rat(Int(1), sched_.m(j)),
                      Rat(Int(1), desc_.family_for(sched_, j).order)});
    }
    std::function<void(size_t, Rat, Rat)> rec = [&](size_t d, Rat v, Rat k) {
      if (d == dims.size()) {
        out.push_back({v, k});
        return;
      }
      while (v >= vcut) {
        rec(d + 1, v, k);
        v *= dims[d].first;
        k *= dims[d].second;
      }
    };
    rec(0, Rat(1), Rat(1));
    // Pareto frontier: sorted by v descending, keep strictly shrinking k
    std::sort(out.begin(), out.end(), [](const Profile& a, const Profile& b) {
      return a.v != b.v ? a.v > b.v : a.k < b.k;
    });
    std::vector<Profile> front;
    for (auto& p : out)
      if (front.empty() || p.k < front.back().k) front.push_back(p);
    return front;
  }

  /* exact optimum of max sum c_p v_p, sum c_p k_p <= R, sum c_p <= T, c >= 0,
   * over all profiles including the unenumerated tail */
  Rat lp_upper(const Rat& R, long t, long avoid) {
    Rat T(t);
    Rat vcut = Rat(1, 4) / (T * Rat(sched_.m(weights_.back())));
    auto P = profiles(avoid, vcut);
    if (P.empty()) throw Error("internal: empty profile set");

    // primal vertices
    Rat z(0);
    for (auto& p : P) {
      Rat c = std::min(Rat(R / p.k), T);
      Rat val = c * p.v;
      z = std::max(z, val);
    }
    for (size_t a = 0; a < P.size(); ++a)
      for (size_t b = a + 1; b < P.size(); ++b) {
        const auto &p = P[a], &q = P[b];
        if (p.k == q.k) continue;
        Rat cp = (R - T * q.k) / (p.k - q.k);
        Rat cq = T - cp;
        if (cp < 0 || cq < 0) continue;
        Rat val = cp * p.v + cq * q.v;
        z = std::max(z, val);
      }

    // dual certificates; tail profiles have v <= vcut <= mu
    Rat best(-1);
    auto consider = [&](const Rat& lam, const Rat& mu) {
      if (lam < 0 || mu < vcut) return;
      for (auto& p : P)
        if (lam * p.k + mu < p.v) return;
      Rat u = lam * R + mu * T;
      if (best < 0 || u < best) best = u;
    };
    for (auto& p : P) consider(Rat(0), std::max(p.v, vcut));
    for (size_t a = 0; a < P.size(); ++a)
      for (size_t b = a + 1; b < P.size(); ++b) {
        const auto &p = P[a], &q = P[b];
        if (p.k == q.k) continue;
        Rat lam = (p.v - q.v) / (p.k - q.k);
        consider(lam, p.v - lam * p.k);
      }
    if (best < 0 || best < z)
      throw Error("internal: no dual certificate for the profile relaxation");
    return best;
  }

  const ParamSchedule& sched_;
  SetDescriptor desc_;
  std::vector<long> weights_;
  std::map<std::pair<long, long>, Rat> lmemo_;
};

/* The three displayed estimates for the action of weighted functionals on the
 * scaled flat averages x_j = (m_j/n_j) sum_{k<=n_j} e_k over the auxiliary
 * descriptor: with root weight m_i the action is at most 2/m_i when i < j and
 * m_j/m_i when i >= j; with weight m_j banned from the whole tree it is at
 * most 2/m_j^2.  Small supports run the exact constrained recursion, large
 * ones the certified flat engine. */
inline Report verify_flat_average_bounds(const ParamSchedule& sched,
                                         SetDescriptor desc = {SetBase::Aux},
                                         long smallLimit = 24) {
  Report rep;
  rep.title = "flat-average action bounds at " + sched.id() + " over " + desc.id();
  std::vector<long> table;
  for (long j = 0; sched.has(j); ++j) {
    table.push_back(j);
    if (sched.mode() != ScheduleMode::DeskTable && j >= 2) break;
  }
  FlatSupEngine flat(sched, desc);
  for (long j : table) {
    if (sched.n(j) > Int(1) << 24) {
      rep.add("avg" + std::to_string(j), "support too large", "-",
              Verdict::Indeterminate, "n_j exceeds engine range");
      continue;
    }
    long t = sched.n(j).convert_to<long>();
    Rat scale(sched.m(j), sched.n(j));
    bool small = t <= smallLimit;
    NormEngine eng(sched, desc, std::max<long>(smallLimit, 4));
    SparseVector x;
    if (small)
      for (long k = 1; k <= t; ++k) x.set(k, scale);

    for (long i : table) {
      Rat bound = i < j ? Rat(Int(2), sched.m(i)) : Rat(sched.m(j), sched.m(i));
      std::string name = "root m" + std::to_string(i) + " on avg" + std::to_string(j);
      std::string stmt = i < j ? "|f(x_j)| <= 2/m_i for root weight m_i, i < j"
                               : "|f(x_j)| <= m_j/m_i for root weight m_i, i >= j";
      if (small) {
        Rat val = eng.max_action(x, i).value;
        rep.add(name, stmt, to_string(val) + " <= " + to_string(bound),
                val <= bound ? Verdict::Pass : Verdict::Fail, "exact recursion");
      } else {
        auto b = flat.root_sup(i, t);
        Rat lo = scale * b.lower, up = scale * b.upper;
        Verdict v = up <= bound  ? Verdict::Pass
                    : lo > bound ? Verdict::Fail
                                 : Verdict::Indeterminate;
        rep.add(name, stmt,
                "[" + to_string(lo) + ", " + to_string(up) + "] vs " + to_string(bound),
                v, "certified interval; witness " + b.witness);
      }
    }

    Rat bound = Rat(Int(2), sched.m(j) * sched.m(j));
    std::string name = "banned m" + std::to_string(j) + " on avg" + std::to_string(j);
    std::string stmt = "|f(x_j)| <= 2/m_j^2 when no node of f has weight m_j";
    if (small) {
      Rat val = eng.norm_avoiding(x, j).value;
      rep.add(name, stmt, to_string(val) + " <= " + to_string(bound),
              val <= bound ? Verdict::Pass : Verdict::Fail, "exact recursion");
    } else {
      auto b = flat.free_sup(t, j);
      Rat lo = scale * b.lower, up = scale * b.upper;
      Verdict v = up <= bound  ? Verdict::Pass
                  : lo > bound ? Verdict::Fail
                               : Verdict::Indeterminate;
      rep.add(name, stmt,
              "[" + to_string(lo) + ", " + to_string(up) + "] vs " + to_string(bound),
              v, "certified interval; witness " + b.witness);
    }
  }
  return rep;
}

}  // namespace hix
