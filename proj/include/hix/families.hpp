#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"
#include "vec.hpp"

namespace hix {

enum class FamilyKind { AN, Schreier, SchreierFlat, FlatProductA2 };

struct FamilyDescriptor {
  FamilyKind kind = FamilyKind::AN;
  Int order = 1;  // the n of A_n / S_n / S_n^f / S_n^f (x) A_2

  bool operator==(const FamilyDescriptor& o) const {
    return kind == o.kind && order == o.order;
  }
};

inline std::string format_family(const FamilyDescriptor& d) {
  switch (d.kind) {
    case FamilyKind::AN: return "AN:" + d.order.str();
    case FamilyKind::Schreier: return "S:" + d.order.str();
    case FamilyKind::SchreierFlat: return "SF:" + d.order.str();
    case FamilyKind::FlatProductA2: return "SFxA2:" + d.order.str();
  }
  return "?";
}

inline FamilyDescriptor parse_family(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("bad family: " + s);
  std::string tag = s.substr(0, colon);
  Int order(s.substr(colon + 1));
  FamilyDescriptor d;
  d.order = order;
  if (tag == "AN") d.kind = FamilyKind::AN;
  else if (tag == "S") d.kind = FamilyKind::Schreier;
  else if (tag == "SF") d.kind = FamilyKind::SchreierFlat;
  else if (tag == "SFxA2") d.kind = FamilyKind::FlatProductA2;
  else throw InputError("bad family: " + s);
  if (d.order < 1) throw InputError("family order must be >= 1");
  return d;
}

using FiniteSet = std::vector<long>;  // strictly increasing

namespace detail {

/* S_1: #F <= min F (so {1} is a member).
 * S_1^f: {1}, or 2#F <= min F.
 * Either way membership of the minima set of a k-block split depends only on
 * k and the first minimum; return the largest k allowed. */
inline long max_blocks(FamilyKind kind, long firstMin) {
  if (kind == FamilyKind::Schreier) return firstMin;
  // SchreierFlat
  if (firstMin == 1) return 1;  // via {1} in S_1^f
  return firstMin / 2;
}

inline bool schreier_member(FamilyKind kind, long n, const long* a, size_t len) {
  if (len == 0) return true;
  if (n == 1) {
    if (kind == FamilyKind::SchreierFlat && len == 1 && a[0] == 1) return true;
    long bound = kind == FamilyKind::Schreier ? a[0] : a[0] / 2;
    return (long)len <= bound;
  }
  long kmax = max_blocks(kind, a[0]);
  // split into at most kmax successive blocks, each a member at level n-1
  std::function<bool(size_t, long)> rec = [&](size_t pos, long blocks) -> bool {
    if (pos == len) return true;
    if (blocks == 0) return false;
    for (size_t l = 1; pos + l <= len; ++l)
      if (schreier_member(kind, n - 1, a + pos, l) && rec(pos + l, blocks - 1))
        return true;
    return false;
  };
  return rec(0, kmax);
}

/* Grouping sorted elements into consecutive runs of <= 2, pairs first and a
 * possible singleton last, yields the smallest-count maxima set that is
 * pointwise largest among all smallest-count groupings; merging two singleton
 * blocks only shrinks a maxima set, so by hereditariness and spreading of
 * S_n^f this grouping decides membership in S_n^f (x) A_2. */
inline FiniteSet left_pair_maxima(const FiniteSet& f) {
  FiniteSet maxima;
  size_t i = 0;
  while (i < f.size()) {
    size_t j = std::min(i + 1, f.size() - 1);
    maxima.push_back(f[j]);
    i = j + 1;
  }
  return maxima;
}

}  // namespace detail

inline bool member(const FamilyDescriptor& d, const FiniteSet& f) {
  if (f.empty()) return true;
  switch (d.kind) {
    case FamilyKind::AN:
      return Int(f.size()) <= d.order;
    case FamilyKind::Schreier:
    case FamilyKind::SchreierFlat:
      return detail::schreier_member(d.kind, (long)d.order, f.data(), f.size());
    case FamilyKind::FlatProductA2: {
      FamilyDescriptor sf{FamilyKind::SchreierFlat, d.order};
      return member(sf, detail::left_pair_maxima(f));
    }
  }
  return false;
}

/* exhaustive grouping search, used to cross-check the greedy rule in tests */
inline bool member_flat_product_brute(const FamilyDescriptor& d, const FiniteSet& f) {
  if (f.empty()) return true;
  FamilyDescriptor sf{FamilyKind::SchreierFlat, d.order};
  std::function<bool(size_t, FiniteSet&)> rec = [&](size_t pos, FiniteSet& maxima) -> bool {
    if (pos == f.size()) return member(sf, maxima);
    for (size_t sz = 1; sz <= 2 && pos + sz <= f.size(); ++sz) {
      maxima.push_back(f[pos + sz - 1]);
      if (rec(pos + sz, maxima)) return true;
      maxima.pop_back();
    }
    return false;
  };
  FiniteSet maxima;
  return rec(0, maxima);
}

inline void require_successive(const std::vector<FiniteSet>& supports) {
  long prev = 0;
  for (auto& s : supports) {
    if (s.empty()) continue;
    if (s.front() <= prev) throw NonSuccessive();
    prev = s.back();
  }
}

inline bool block_admissible(const FamilyDescriptor& d,
                             const std::vector<FiniteSet>& supports) {
  require_successive(supports);
  FiniteSet minima;
  size_t count = 0;
  for (auto& s : supports) {
    if (s.empty()) continue;
    ++count;
    minima.push_back(s.front());
  }
  if (count == 0) return true;
  if (d.kind == FamilyKind::AN) return Int(count) <= d.order;
  return member(d, minima);
}

/* Every split of s's points into consecutive nonempty groups whose nonempty
 * restrictions are block-admissible; intervals span each group. */
inline std::vector<std::vector<Interval>> admissible_partitions(
    const FamilyDescriptor& d, const FiniteSet& s) {
  std::vector<std::vector<Interval>> out;
  if (s.empty()) return out;
  size_t n = s.size();
  std::vector<size_t> cuts;  // indices where a new group starts (excluding 0)
  // enumerate cut sets over gaps 1..n-1
  std::function<void(size_t)> gen = [&](size_t gap) {
    if (gap == n) {
      std::vector<FiniteSet> groups;
      std::vector<Interval> ivs;
      size_t start = 0;
      for (size_t c : cuts) {
        groups.emplace_back(s.begin() + start, s.begin() + c);
        ivs.emplace_back(s[start], s[c - 1]);
        start = c;
      }
      groups.emplace_back(s.begin() + start, s.end());
      ivs.emplace_back(s[start], s.back());
      if (block_admissible(d, groups)) out.push_back(std::move(ivs));
      return;
    }
    gen(gap + 1);
    cuts.push_back(gap);
    gen(gap + 1);
    cuts.pop_back();
  };
  gen(1);
  return out;
}

inline FiniteSet support_of(const SparseVector& v) {
  FiniteSet s;
  for (auto& [k, c] : v.entries()) s.push_back(k);
  return s;
}

}  // namespace hix
