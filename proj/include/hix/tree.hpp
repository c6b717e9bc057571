#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "schedule.hpp"
#include "vec.hpp"

namespace hix {

enum class NodeKind { Leaf, WeightedOp, ConvexComb, Restrict };

struct TreeAnalysis;
using TreePtr = std::shared_ptr<const TreeAnalysis>;

struct TreeAnalysis {
  NodeKind kind = NodeKind::Leaf;
  // Leaf
  int sign = +1;
  long index = 1;
  // WeightedOp
  long weightIndex = 0;
  FamilyDescriptor family;
  // ConvexComb
  std::vector<Rat> weights;
  // Restrict
  Interval interval;
  std::vector<TreePtr> children;

  static TreePtr leaf(int sign, long index) {
    auto t = std::make_shared<TreeAnalysis>();
    t->kind = NodeKind::Leaf;
    t->sign = sign >= 0 ? +1 : -1;
    t->index = index;
    return t;
  }
  static TreePtr weighted(long j, FamilyDescriptor fam, std::vector<TreePtr> ch) {
    auto t = std::make_shared<TreeAnalysis>();
    t->kind = NodeKind::WeightedOp;
    t->weightIndex = j;
    t->family = fam;
    t->children = std::move(ch);
    return t;
  }
  static TreePtr convex(std::vector<Rat> ws, std::vector<TreePtr> ch) {
    auto t = std::make_shared<TreeAnalysis>();
    t->kind = NodeKind::ConvexComb;
    t->weights = std::move(ws);
    t->children = std::move(ch);
    return t;
  }
  static TreePtr restrict(Interval e, TreePtr ch) {
    auto t = std::make_shared<TreeAnalysis>();
    t->kind = NodeKind::Restrict;
    t->interval = e;
    t->children = {std::move(ch)};
    return t;
  }
};

/* Validates structure against the schedule and returns the functional the
 * tree denotes: leaves are +-e*_n, a weighted node divides the sum of its
 * children by m_j after an admissibility check for its stated family. */
inline SparseVector realize(const TreeAnalysis& t, const ParamSchedule& sched) {
  switch (t.kind) {
    case NodeKind::Leaf: {
      if (t.index < 1) throw InvalidTree("leaf index < 1");
      return SparseVector::unit(t.index, Rat(t.sign));
    }
    case NodeKind::WeightedOp: {
      if (!sched.has(t.weightIndex)) throw InvalidTree("weight index outside schedule");
      if (t.children.empty()) throw InvalidTree("weighted node needs children");
      SparseVector sum;
      std::vector<FiniteSet> supports;
      for (auto& c : t.children) {
        SparseVector v = realize(*c, sched);
        supports.push_back(support_of(v));
        sum += v;
      }
      try {
        if (!block_admissible(t.family, supports))
          throw InvalidTree("children not admissible for " + format_family(t.family));
      } catch (const NonSuccessive&) {
        throw InvalidTree("children supports not successive");
      }
      return Rat(Int(1), sched.m(t.weightIndex)) * sum;
    }
    case NodeKind::ConvexComb: {
      if (t.children.size() != t.weights.size() || t.children.empty())
        throw InvalidTree("convex node weight/child mismatch");
      Rat total(0);
      SparseVector sum;
      for (size_t i = 0; i < t.children.size(); ++i) {
        if (t.weights[i] <= 0) throw InvalidTree("convex weight must be positive");
        total += t.weights[i];
        sum += t.weights[i] * realize(*t.children[i], sched);
      }
      if (total != 1) throw InvalidTree("convex weights must sum to 1");
      return sum;
    }
    case NodeKind::Restrict:
      return restrict_to(realize(*t.children[0], sched), t.interval);
  }
  throw InvalidTree("corrupt node");
}

struct WeightTag {
  std::optional<long> weighted;  // weight index j, or nullopt = unweighted
  bool operator==(const WeightTag& o) const { return weighted == o.weighted; }
  bool operator<(const WeightTag& o) const { return weighted < o.weighted; }
};

/* Root classification. A restriction or convex node is not itself the result
 * of an operation, so it is unweighted; construction records can keep the
 * inner weight separately. */
inline WeightTag weight_of(const TreeAnalysis& t) {
  if (t.kind == NodeKind::WeightedOp) return {t.weightIndex};
  return {std::nullopt};
}

struct ConstructionRecord {
  SparseVector vec;
  TreePtr tree;
  WeightTag tag;
};

inline ConstructionRecord make_record(TreePtr t, const ParamSchedule& sched) {
  ConstructionRecord r;
  r.vec = realize(*t, sched);
  r.tag = weight_of(*t);
  r.tree = std::move(t);
  return r;
}

inline Rat certify(const TreeAnalysis& t, const SparseVector& x, const ParamSchedule& sched) {
  return evaluate(realize(t, sched), x);
}

/* Pushes restrictions to the leaves and drops vanished children; value
 * preserving, leaves convex nodes with weighted-or-leaf children only. */
inline TreePtr normalize(const TreePtr& t, const ParamSchedule& sched,
                         std::optional<Interval> e = std::nullopt) {
  auto hit = [&](long idx) { return !e || e->contains(idx); };
  switch (t->kind) {
    case NodeKind::Leaf:
      return hit(t->index) ? t : nullptr;
    case NodeKind::Restrict: {
      Interval inner = t->interval;
      if (e) {
        inner.lo = std::max(inner.lo, e->lo);
        inner.hi = std::min(inner.hi, e->hi);
      }
      return normalize(t->children[0], sched, inner);
    }
    case NodeKind::WeightedOp: {
      std::vector<TreePtr> ch;
      for (auto& c : t->children) {
        auto nc = normalize(c, sched, e);
        if (nc && !realize(*nc, sched).zero()) ch.push_back(nc);
      }
      if (ch.empty()) return nullptr;
      return TreeAnalysis::weighted(t->weightIndex, t->family, std::move(ch));
    }
    case NodeKind::ConvexComb: {
      // weights must keep summing to 1, so vanished children stay as
      // explicitly empty restrictions instead of being dropped
      std::vector<TreePtr> all;
      for (auto& c : t->children) {
        auto nc = normalize(c, sched, e);
        all.push_back(nc ? nc : TreeAnalysis::restrict(Interval(1, 0), c));
      }
      return TreeAnalysis::convex(t->weights, std::move(all));
    }
  }
  return t;
}

/* text format: `(w j f...)`, `(cv p/q f ...)`, `(r a b f)`, `(+ n)`, `(- n)` */
inline void format_tree(const TreeAnalysis& t, std::ostream& os) {
  switch (t.kind) {
    case NodeKind::Leaf:
      os << '(' << (t.sign > 0 ? '+' : '-') << ' ' << t.index << ')';
      return;
    case NodeKind::WeightedOp:
      os << "(w " << t.weightIndex;
      for (auto& c : t.children) {
        os << ' ';
        format_tree(*c, os);
      }
      os << ')';
      return;
    case NodeKind::ConvexComb:
      os << "(cv";
      for (size_t i = 0; i < t.children.size(); ++i) {
        os << ' ' << to_string(t.weights[i]) << ' ';
        format_tree(*t.children[i], os);
      }
      os << ')';
      return;
    case NodeKind::Restrict:
      os << "(r " << t.interval.lo << ' ' << t.interval.hi << ' ';
      format_tree(*t.children[0], os);
      os << ')';
      return;
  }
}

inline std::string format_tree(const TreeAnalysis& t) {
  std::ostringstream os;
  format_tree(t, os);
  return os.str();
}

namespace detail {

struct TreeParser {
  const std::string& s;
  size_t pos = 0;
  const ParamSchedule& sched;
  const SetDescriptor& desc;

  void skip_ws() {
    while (pos < s.size() && isspace((unsigned char)s[pos])) ++pos;
  }
  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c)
      throw InputError("tree parse: expected '" + std::string(1, c) + "' at " +
                       std::to_string(pos));
    ++pos;
  }
  std::string token() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && !isspace((unsigned char)s[pos]) && s[pos] != '(' && s[pos] != ')')
      ++pos;
    if (start == pos) throw InputError("tree parse: token expected");
    return s.substr(start, pos - start);
  }
  bool at_close() {
    skip_ws();
    return pos < s.size() && s[pos] == ')';
  }

  TreePtr parse() {
    expect('(');
    std::string head = token();
    TreePtr result;
    if (head == "+" || head == "-") {
      long idx = std::stol(token());
      result = TreeAnalysis::leaf(head == "+" ? +1 : -1, idx);
    } else if (head == "w") {
      long j = std::stol(token());
      std::vector<TreePtr> ch;
      while (!at_close()) ch.push_back(parse());
      result = TreeAnalysis::weighted(j, desc.family_for(sched, j), std::move(ch));
    } else if (head == "cv") {
      std::vector<Rat> ws;
      std::vector<TreePtr> ch;
      while (!at_close()) {
        ws.push_back(parse_rat(token()));
        ch.push_back(parse());
      }
      result = TreeAnalysis::convex(std::move(ws), std::move(ch));
    } else if (head == "r") {
      long a = std::stol(token());
      long b = std::stol(token());
      result = TreeAnalysis::restrict(Interval(a, b), parse());
    } else {
      throw InputError("tree parse: unknown head " + head);
    }
    expect(')');
    return result;
  }
};

}  // namespace detail

inline TreePtr parse_tree(const std::string& text, const ParamSchedule& sched,
                          const SetDescriptor& desc) {
  detail::TreeParser p{text, 0, sched, desc};
  auto t = p.parse();
  p.skip_ws();
  if (p.pos != text.size()) throw InputError("tree parse: trailing input");
  return t;
}

}  // namespace hix
