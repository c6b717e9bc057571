#pragma once

#include <memory>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "rational.hpp"

namespace hix {

enum class ScheduleMode { PaperA, PaperSchreier, DeskTable };
enum class SchreierReading { PowSelf, PowGeom };

/* The (m_j), (n_j), (s_j) parameter sequences.
 *
 * PaperA:        m_0 = 2, m_{j+1} = m_j^5;
 *                n_0 = 4, n_{j+1} = (12 n_j)^{s_j},
 *                s_j minimal with 2^{s_j} >= m_{j+1}^3.
 * PaperSchreier: m_0 = 2 and either m_{j+1} = m_j^{m_j}   (PowSelf, default)
 *                or m_{j+1} = m_j^{m_0^{j+1}}             (PowGeom);
 *                n_0 = 1, n_{j+1} = m_1^{2 m_{j+1}} n_j.
 *                Values explode; accessors are lazy and refuse to build
 *                integers past a bit budget (ScheduleExhausted).
 * DeskTable:     explicit finite lists, named and frozen in config.
 */
class ParamSchedule {
 public:
  static ParamSchedule paper_a() {
    ParamSchedule s;
    s.mode_ = ScheduleMode::PaperA;
    s.m_ = {Int(2)};
    s.n_ = {Int(4)};
    return s;
  }

  static ParamSchedule paper_schreier(SchreierReading r = SchreierReading::PowSelf) {
    ParamSchedule s;
    s.mode_ = ScheduleMode::PaperSchreier;
    s.reading_ = r;
    s.m_ = {Int(2)};
    s.n_ = {Int(1)};
    return s;
  }

  static ParamSchedule desk(std::string name, std::vector<Int> m, std::vector<Int> n) {
    if (m.empty() || m.size() != n.size())
      throw InputError("desk table needs equal-length nonempty m,n");
    if (m[0] < 2) throw InputError("m(0) must be >= 2");
    for (size_t i = 1; i < m.size(); ++i) {
      if (m[i] <= m[i - 1]) throw InputError("m must be strictly increasing");
      if (n[i] <= n[i - 1]) throw InputError("n must be strictly increasing");
    }
    ParamSchedule s;
    s.mode_ = ScheduleMode::DeskTable;
    s.name_ = std::move(name);
    s.m_ = std::move(m);
    s.n_ = std::move(n);
    return s;
  }

  ScheduleMode mode() const { return mode_; }

  /* last valid weight index for desk tables; -1 = unbounded (paper modes) */
  long max_weight_index() const {
    return mode_ == ScheduleMode::DeskTable ? (long)m_.size() - 1 : -1;
  }

  bool has(long j) const {
    if (j < 0) return false;
    if (mode_ == ScheduleMode::DeskTable) return j <= max_weight_index();
    return j <= kLazyCap;
  }

  const Int& m(long j) const {
    extend_m(j);
    return m_[j];
  }
  const Int& n(long j) const {
    extend_n(j);
    return n_[j];
  }
  /* PaperA only: the exponent s_j used to build n_{j+1} */
  Int s(long j) const {
    if (mode_ != ScheduleMode::PaperA) throw InputError("s(j) only for PaperA");
    extend_m(j + 1);
    return s_min(j);
  }

  std::string id() const {
    switch (mode_) {
      case ScheduleMode::PaperA: return "paperA.smin";
      case ScheduleMode::PaperSchreier:
        return reading_ == SchreierReading::PowSelf ? "paperSchreier.powself"
                                                    : "paperSchreier.powgeom";
      case ScheduleMode::DeskTable: {
        std::ostringstream os;
        os << "desk." << name_ << ".m";
        for (auto& v : m_) os << "_" << v;
        os << ".n";
        for (auto& v : n_) os << "_" << v;
        return os.str();
      }
    }
    return "?";
  }

  const std::string& name() const { return name_; }

 private:
  static constexpr long kLazyCap = 16;
  static constexpr unsigned kBitBudget = 1u << 22;  // refuse >4Mbit integers

  Int s_min(long j) const {
    // minimal s with 2^s >= m_{j+1}^3
    Int target = m_[j + 1] * m_[j + 1] * m_[j + 1];
    Int s = 0, pow = 1;
    while (pow < target) {
      pow <<= 1;
      ++s;
    }
    return s;
  }

  static Int checked_pow(const Int& base, const Int& exp) {
    double bits = (double)msb(base) + 1.0;
    if (exp > Int(kBitBudget) || bits * exp.convert_to<double>() > kBitBudget)
      throw ScheduleExhausted("parameter too large to materialize");
    Int r = 1, b = base, e = exp;
    while (e > 0) {
      if ((e & 1) != 0) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  /* refuses to run past a desk table or the lazy cap */
  void range_check(long j) const {
    if (j < 0) throw InputError("negative weight index");
    if (mode_ == ScheduleMode::DeskTable) {
      if (j > max_weight_index())
        throw ScheduleExhausted("desk table has no weight index " + std::to_string(j));
    } else if (j > kLazyCap) {
      throw ScheduleExhausted("weight index beyond lazy cap");
    }
  }

  void extend_m(long j) const {
    range_check(j);
    while ((long)m_.size() <= j) {
      Int mk = m_.back();
      long k = (long)m_.size() - 1;  // building index k+1
      if (mode_ == ScheduleMode::PaperA) {
        m_.push_back(checked_pow(mk, Int(5)));
      } else {
        Int exp = reading_ == SchreierReading::PowSelf ? mk : checked_pow(Int(2), Int(k + 1));
        m_.push_back(checked_pow(mk, exp));
      }
    }
  }

  void extend_n(long j) const {
    range_check(j);
    if ((long)n_.size() > j) return;
    extend_m(j);  // n_{k+1} needs m_{k+1}
    while ((long)n_.size() <= j) {
      long k = (long)n_.size() - 1;  // building index k+1
      if (mode_ == ScheduleMode::PaperA) {
        n_.push_back(checked_pow(Int(12) * n_[k], s_min(k)));
      } else {
        n_.push_back(checked_pow(m_[1], Int(2) * m_[k + 1]) * n_[k]);
      }
    }
  }

  ScheduleMode mode_ = ScheduleMode::DeskTable;
  SchreierReading reading_ = SchreierReading::PowSelf;
  std::string name_;
  mutable std::vector<Int> m_, n_;
};

/* Which admissibility family each weight index uses.  Ext doubles the order
 * at odd indices: its odd operations take interleaved pairs. */
enum class SetBase { WmT, Aux, Aux2, Ext, WmTSchreier };

struct SetDescriptor {
  SetBase base = SetBase::WmT;

  FamilyDescriptor family_for(const ParamSchedule& sched, long j) const {
    switch (base) {
      case SetBase::WmT:
        return {FamilyKind::AN, sched.n(j)};
      case SetBase::Aux:
        return {FamilyKind::AN, Int(4) * sched.n(j)};
      case SetBase::Aux2:
        return {FamilyKind::AN, Int(12) * sched.n(j)};
      case SetBase::Ext:
        return {FamilyKind::AN, (j % 2 == 0 ? Int(1) : Int(2)) * sched.n(j)};
      case SetBase::WmTSchreier:
        return {j % 2 == 0 ? FamilyKind::SchreierFlat : FamilyKind::FlatProductA2,
                sched.n(j)};
    }
    return {FamilyKind::AN, Int(1)};
  }

  bool an_kind() const { return base != SetBase::WmTSchreier; }

  std::string id() const {
    switch (base) {
      case SetBase::WmT: return "WmT";
      case SetBase::Aux: return "Aux";
      case SetBase::Aux2: return "Aux2";
      case SetBase::Ext: return "Ext";
      case SetBase::WmTSchreier: return "WmTSchreier";
    }
    return "?";
  }
};

inline SetDescriptor parse_descriptor(const std::string& s) {
  if (s == "WmT") return {SetBase::WmT};
  if (s == "Aux") return {SetBase::Aux};
  if (s == "Aux2") return {SetBase::Aux2};
  if (s == "Ext") return {SetBase::Ext};
  if (s == "WmTSchreier") return {SetBase::WmTSchreier};
  throw InputError("unknown descriptor: " + s);
}

/* Frozen desk tables. desk-main drives the norm oracle, desk-aux the
 * auxiliary-space bound checks, desk-hi the special-sequence machinery,
 * desk-tiny small worked examples. */
inline ParamSchedule desk_table(const std::string& name) {
  auto I = [](long v) { return Int(v); };
  if (name == "desk-main")
    return ParamSchedule::desk(name, {I(2), I(4), I(16), I(64)}, {I(2), I(3), I(4), I(6)});
  if (name == "desk-aux")
    return ParamSchedule::desk(name, {I(2), I(4)}, {I(4), I(1048576)});
  if (name == "desk-hi")
    return ParamSchedule::desk(
        name, {I(2), I(4), I(16), I(64), I(512), I(2048), I(8192), I(32768), I(262144)},
        {I(2), I(3), I(4), I(5), I(6), I(7), I(8), I(9), I(10)});
  if (name == "desk-tiny")
    return ParamSchedule::desk(name, {I(2), I(4)}, {I(2), I(4)});
  throw InputError("unknown desk table: " + name);
}

inline ParamSchedule schedule_by_id(const std::string& name) {
  if (name == "paperA") return ParamSchedule::paper_a();
  if (name == "paperSchreier") return ParamSchedule::paper_schreier();
  if (name == "paperSchreier-powgeom")
    return ParamSchedule::paper_schreier(SchreierReading::PowGeom);
  return desk_table(name);
}

}  // namespace hix
