#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace hix {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat(long n, long d = 1) { return Rat(n, d); }

inline std::string to_string(const Rat& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

/* parse "num/den" or "num"; throws on garbage */
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("nonpositive denominator");
    return Rat(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational: " + s);
  }
}

inline Rat rabs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

}  // namespace hix
