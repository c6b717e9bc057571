#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "rational.hpp"

namespace hix {

/* Closed integer interval [lo,hi] of 1-based indices; lo>hi means empty. */
struct Interval {
  long lo = 1, hi = 0;
  Interval() = default;
  Interval(long a, long b) : lo(a), hi(b) {}
  bool empty() const { return lo > hi; }
  bool contains(long k) const { return lo <= k && k <= hi; }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

enum class Parity { Even, Odd };

/* Finite-support map index -> nonzero rational. Serves as both vector and
 * functional; "functional" is a role, not a type. */
class SparseVector {
 public:
  using Map = std::map<long, Rat>;

  SparseVector() = default;

  static SparseVector unit(long k, Rat c = Rat(1)) {
    SparseVector v;
    v.set(k, c);
    return v;
  }

  void set(long k, const Rat& c) {
    if (k < 1) throw std::invalid_argument("index must be >= 1");
    if (c == 0)
      m_.erase(k);
    else
      m_[k] = c;
  }

  Rat at(long k) const {
    auto it = m_.find(k);
    return it == m_.end() ? Rat(0) : it->second;
  }

  const Map& entries() const { return m_; }
  bool zero() const { return m_.empty(); }
  size_t support_size() const { return m_.size(); }
  long min_supp() const { return m_.empty() ? 0 : m_.begin()->first; }
  long max_supp() const { return m_.empty() ? 0 : m_.rbegin()->first; }

  SparseVector& operator+=(const SparseVector& o) {
    for (auto& [k, c] : o.m_) {
      auto it = m_.find(k);
      if (it == m_.end()) {
        m_.emplace(k, c);
      } else {
        it->second += c;
        if (it->second == 0) m_.erase(it);
      }
    }
    return *this;
  }

  friend SparseVector operator+(SparseVector a, const SparseVector& b) {
    a += b;
    return a;
  }

  friend SparseVector operator*(const Rat& c, const SparseVector& v) {
    SparseVector r;
    if (c == 0) return r;
    for (auto& [k, x] : v.m_) r.m_.emplace(k, c * x);
    return r;
  }

  friend SparseVector operator-(const SparseVector& v) { return Rat(-1) * v; }

  bool operator==(const SparseVector& o) const { return m_ == o.m_; }
  bool operator<(const SparseVector& o) const { return m_ < o.m_; }

 private:
  Map m_;
};

inline SparseVector restrict_to(const SparseVector& v, const Interval& e) {
  SparseVector r;
  if (e.empty()) return r;
  auto& m = v.entries();
  for (auto it = m.lower_bound(e.lo); it != m.end() && it->first <= e.hi; ++it)
    r.set(it->first, it->second);
  return r;
}

inline SparseVector restrict_to(const SparseVector& v, Parity p) {
  SparseVector r;
  for (auto& [k, c] : v.entries())
    if ((k % 2 == 0) == (p == Parity::Even)) r.set(k, c);
  return r;
}

/* hat(g)(2i) = g(i); embeds into the even coordinates */
inline SparseVector hat(const SparseVector& g) {
  SparseVector r;
  for (auto& [k, c] : g.entries()) r.set(2 * k, c);
  return r;
}

/* inverse of hat on even-supported vectors */
inline SparseVector unhat(const SparseVector& g) {
  SparseVector r;
  for (auto& [k, c] : g.entries()) {
    if (k % 2 != 0) throw std::invalid_argument("unhat: odd-coordinate entry");
    r.set(k / 2, c);
  }
  return r;
}

inline Rat evaluate(const SparseVector& f, const SparseVector& x) {
  Rat s(0);
  auto &a = f.entries(), &b = x.entries();
  auto it = a.begin();
  auto jt = b.begin();
  while (it != a.end() && jt != b.end()) {
    if (it->first < jt->first)
      ++it;
    else if (jt->first < it->first)
      ++jt;
    else {
      s += it->second * jt->second;
      ++it;
      ++jt;
    }
  }
  return s;
}

inline Rat l1_mass(const SparseVector& v) {
  Rat s(0);
  for (auto& [k, c] : v.entries()) s += rabs(c);
  return s;
}

inline Rat sup_coord(const SparseVector& v) {
  Rat s(0);
  for (auto& [k, c] : v.entries())
    if (rabs(c) > s) s = rabs(c);
  return s;
}

/* text format: `idx:num/den` pairs, strictly increasing indices */
inline std::string format_vec(const SparseVector& v) {
  std::ostringstream os;
  bool first = true;
  for (auto& [k, c] : v.entries()) {
    if (!first) os << ' ';
    os << k << ':' << to_string(c);
    first = false;
  }
  return os.str();
}

inline SparseVector parse_vec(const std::string& line) {
  SparseVector v;
  std::istringstream is(line);
  std::string tok;
  long prev = 0;
  while (is >> tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("bad vector token: " + tok);
    long idx = std::stol(tok.substr(0, colon));
    if (idx <= prev)
      throw std::invalid_argument("indices must be strictly increasing");
    prev = idx;
    Rat c = parse_rat(tok.substr(colon + 1));
    if (c == 0) throw std::invalid_argument("explicit zero entry");
    v.set(idx, c);
  }
  return v;
}

}  // namespace hix
