#include "kslice/numeric.hpp"

#include <cmath>
#include <cstdio>

namespace kslice {

std::string decimal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string decimal(const Real& x, int digits) {
  return x.str(digits, std::ios_base::fmtflags(0));
}

std::string decimal(const Rational& x) { return x.str(); }

}  // namespace kslice
