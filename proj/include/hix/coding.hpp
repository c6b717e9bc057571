#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reports.hpp"
#include "tree.hpp"

namespace hix {

/* A finite block sequence of nonzero rational functionals with successive
 * supports; the input alphabet of the first coding map. */
using QsSequence = std::vector<SparseVector>;

inline void validate_qs(const QsSequence& seq) {
  if (seq.empty()) throw InputError("empty sequence");
  long last = 0;
  for (auto& f : seq) {
    if (f.zero()) throw InputError("zero functional in sequence");
    if (f.min_supp() <= last) throw NonSuccessive("sequence supports not successive");
    last = f.max_supp();
  }
}

inline std::string serialize_qs(const QsSequence& seq) {
  std::string s;
  for (auto& f : seq) {
    if (!s.empty()) s += ";";
    s += format_vec(f);
  }
  return s;
}

inline std::string serialize_set(const FiniteSet& f) {
  std::string s;
  for (long t : f) {
    if (!s.empty()) s += ",";
    s += std::to_string(t);
  }
  return s;
}

inline FiniteSet parse_set(const std::string& s) {
  FiniteSet f;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) f.push_back(std::stol(tok));
  for (size_t i = 1; i < f.size(); ++i)
    if (f[i] <= f[i - 1]) throw InputError("set not strictly increasing");
  return f;
}

/* All coding allocations in one place so injectivity survives restarts: the
 * caller persists `log` and replays it into a fresh state.  One writer. */
struct CodingState {
  std::map<std::string, long> sigmaBySeq;          // canonical sequence -> index
  std::set<long> sigmaUsed;                        // consumed output indices
  std::map<std::string, FiniteSet> rhoByInput;     // "k|i|vec" -> chosen F
  std::map<long, std::set<FiniteSet>> poolTaken;   // pool k -> allocated sets
  std::vector<std::string> log;                    // append-only, replayable
};

/* First coding map.  Two disjoint infinite index classes: class one holds the
 * odd j (free first-weights 2j), class two the even j >= 2; outputs are the
 * even-indexed weights 2j with j in class two, i.e. weight indices 4,8,12,...
 * The output is the least fresh such index whose weight exceeds
 *   max{1/|f_i(e_t)|} * maxsupp(f_l),
 * so later members of any special sequence are tiny on earlier supports. */
inline long sigma(const QsSequence& seq, const ParamSchedule& sched,
                  CodingState& state) {
  validate_qs(seq);
  std::string key = serialize_qs(seq);
  if (auto it = state.sigmaBySeq.find(key); it != state.sigmaBySeq.end())
    return it->second;

  Rat growth(0);
  for (auto& f : seq)
    for (auto& [t, c] : f.entries()) {
      Rat inv = Rat(1) / rabs(c);
      growth = std::max(growth, inv);
    }
  growth *= Rat(seq.back().max_supp());

  for (long j = 2;; j += 2) {
    long w = 2 * j;
    if (!sched.has(w))
      throw ScheduleExhausted("no fresh index with weight above " + to_string(growth));
    if (state.sigmaUsed.count(w)) continue;
    if (Rat(sched.m(w)) > growth) {
      state.sigmaUsed.insert(w);
      state.sigmaBySeq[key] = w;
      state.log.push_back("SIGMA|" + key + "|" + std::to_string(w));
      return w;
    }
  }
}

namespace detail {

inline long ruler_pool(long a) {
  long k = 1;
  while (a % 2 == 0) {
    a /= 2;
    ++k;
  }
  return k;
}

}  // namespace detail

/* Second coding map, pool k at even weight index 2i: sends a weight-m_{2i}
 * functional supported on the odd coordinates to m_{2i}^{-1} sum_{t in F} e*_t
 * with #F = n_{2i}, min F in pool k (pool = one plus the dyadic valuation of
 * the minimum, so every pool has unbounded minima) and 2 min F > maxsupp(f):
 * the doubled image starts strictly after f ends.  Least unallocated F in
 * lexicographic order; the increment-last-element walk below visits
 * lex-consecutive sets, so the first free one is the lex-least. */
inline ConstructionRecord rho(long k, long i, const ConstructionRecord& f,
                              const ParamSchedule& sched, CodingState& state,
                              long supportCap = 0) {
  if (k < 1 || i < 0) throw InputError("bad pool or weight position");
  if (!f.tag.weighted || *f.tag.weighted != 2 * i)
    throw PreconditionFailed("input weight is not the even-indexed target");
  if (f.vec.zero()) throw PreconditionFailed("zero functional");
  for (auto& [t, c] : f.vec.entries())
    if (t % 2 == 0) throw PreconditionFailed("input not supported on odd coordinates");

  Int nBig = sched.n(2 * i);
  if (nBig > 1 << 20) throw BudgetExceeded("image support too large to materialize");
  long n = nBig.convert_to<long>();
  long s = f.vec.max_supp();

  std::string key = std::to_string(k) + "|" + std::to_string(i) + "|" + format_vec(f.vec);
  FiniteSet F;
  if (auto it = state.rhoByInput.find(key); it != state.rhoByInput.end()) {
    F = it->second;
  } else {
    long a = s / 2 + 1;  // least with 2a > s
    while (detail::ruler_pool(a) != k) ++a;
    F.resize(n);
    for (long t = 0; t < n; ++t) F[t] = a + t;
    auto& taken = state.poolTaken[k];
    while (taken.count(F)) {
      if (n == 1) {  // the minimum moves, keep it inside the pool
        do ++F[0];
        while (detail::ruler_pool(F[0]) != k);
      } else {
        ++F.back();
      }
    }
    if (supportCap > 0 && F.back() > supportCap)
      throw PoolExhausted("no free pool set inside the configured support range");
    taken.insert(F);
    state.rhoByInput[key] = F;
    state.log.push_back("RHO|" + std::to_string(k) + "|" + std::to_string(i) + "|" +
                        serialize_set(F) + "|" + format_vec(f.vec));
  }

  std::vector<TreePtr> leaves;
  for (long t : F) leaves.push_back(TreeAnalysis::leaf(+1, t));
  auto tree = TreeAnalysis::weighted(
      2 * i, SetDescriptor{SetBase::WmT}.family_for(sched, 2 * i), std::move(leaves));
  return make_record(std::move(tree), sched);
}

/* Rebuilds allocator state from a persisted log; duplicate keys, reused
 * output indices and reused pool sets are data corruption, not history. */
inline CodingState replay_log(const std::vector<std::string>& lines) {
  CodingState st;
  for (auto& line : lines) {
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
      size_t bar = line.find('|', pos);
      if (bar == std::string::npos) {
        parts.push_back(line.substr(pos));
        break;
      }
      parts.push_back(line.substr(pos, bar - pos));
      pos = bar + 1;
    }
    if (parts.empty()) throw InputError("empty log line");
    if (parts[0] == "SIGMA") {
      if (parts.size() != 3) throw InputError("bad SIGMA line");
      long w = std::stol(parts[2]);
      if (st.sigmaBySeq.count(parts[1])) throw InputError("duplicate SIGMA input");
      if (!st.sigmaUsed.insert(w).second) throw InputError("reused SIGMA index");
      st.sigmaBySeq[parts[1]] = w;
    } else if (parts[0] == "RHO") {
      if (parts.size() != 5) throw InputError("bad RHO line");
      long k = std::stol(parts[1]);
      FiniteSet F = parse_set(parts[3]);
      std::string key = parts[1] + "|" + parts[2] + "|" + parts[4];
      if (st.rhoByInput.count(key)) throw InputError("duplicate RHO input");
      if (!st.poolTaken[k].insert(F).second) throw InputError("reused pool set");
      st.rhoByInput[key] = F;
    } else {
      throw InputError("unknown log line kind: " + parts[0]);
    }
    st.log.push_back(line);
  }
  return st;
}

/* The defining rigidity of coded sequences: indices past the first are
 * allocator outputs, so sharing a weight at positions t, s >= 2 forces t = s
 * and element-wise equality of everything before t; past the first
 * difference the remaining weights of the two sequences never meet. */
inline Report verify_tree_property(
    const std::vector<std::vector<ConstructionRecord>>& seqs) {
  Report rep;
  rep.title = "tree rigidity over " + std::to_string(seqs.size()) + " sequences";
  long pairs = 0, violations = 0;
  auto widx = [](const ConstructionRecord& r) -> long {
    return r.tag.weighted ? *r.tag.weighted : -1;
  };
  for (size_t p = 0; p < seqs.size(); ++p)
    for (size_t q = p; q < seqs.size(); ++q) {
      ++pairs;
      auto &A = seqs[p], &B = seqs[q];
      for (size_t t = 1; t < A.size(); ++t)
        for (size_t s = 1; s < B.size(); ++s) {
          if (p == q && t == s) continue;
          if (widx(A[t]) != widx(B[s])) continue;
          bool ok = t == s;
          for (size_t u = 0; ok && u < t; ++u)
            if (!(A[u].vec == B[u].vec)) ok = false;
          if (!ok) {
            ++violations;
            rep.add("pair " + std::to_string(p) + "," + std::to_string(q),
                    "equal coded weights force equal position and prefix",
                    "positions " + std::to_string(t) + "," + std::to_string(s) +
                        " weight " + std::to_string(widx(A[t])),
                    Verdict::Fail);
          }
        }
      // explicit disjointness after the first difference
      size_t d = 0;
      size_t common = std::min(A.size(), B.size());
      while (d < common && A[d].vec == B[d].vec) ++d;
      for (size_t t = d + 1; t < A.size(); ++t)
        for (size_t s = d + 1; s < B.size(); ++s) {
          if (p == q) continue;
          if (widx(A[t]) == widx(B[s])) {
            ++violations;
            rep.add("pair " + std::to_string(p) + "," + std::to_string(q),
                    "weights disjoint after the first difference",
                    "diverge at " + std::to_string(d) + "; weight " +
                        std::to_string(widx(A[t])) + " at " + std::to_string(t) +
                        "," + std::to_string(s),
                    Verdict::Fail);
          }
        }
    }
  rep.add("summary", "coded-sequence rigidity",
          std::to_string(pairs) + " pairs, " + std::to_string(violations) +
              " violations",
          violations ? Verdict::Fail : Verdict::Pass);
  return rep;
}

}  // namespace hix
