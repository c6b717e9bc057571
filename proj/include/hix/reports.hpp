#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "rational.hpp"

namespace hix {

enum class Verdict { Pass, Fail, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

/* One verified inequality or identity.  `statement` is the mathematical claim
 * in plain text, `values` the exact rationals entering the comparison,
 * `note` truncation levels and certificate references. */
struct CheckLine {
  std::string name;
  std::string statement;
  std::string values;
  Verdict verdict = Verdict::Indeterminate;
  std::string note;
};

struct Report {
  std::string title;
  std::vector<CheckLine> lines;

  bool all_pass() const {
    for (auto& l : lines)
      if (l.verdict != Verdict::Pass) return false;
    return true;
  }

  void add(std::string name, std::string statement, std::string values, Verdict v,
           std::string note = "") {
    lines.push_back({std::move(name), std::move(statement), std::move(values), v,
                     std::move(note)});
  }

  /* deterministic, byte-stable rendering */
  std::string render() const {
    std::ostringstream os;
    os << "# " << title << "\n";
    for (auto& l : lines) {
      os << l.name << " | " << l.statement << " | " << l.values << " | "
         << to_string(l.verdict);
      if (!l.note.empty()) os << " | " << l.note;
      os << "\n";
    }
    os << (all_pass() ? "ALL-PASS" : "NOT-ALL-PASS") << "\n";
    return os.str();
  }
};

}  // namespace hix
