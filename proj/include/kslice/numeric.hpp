#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace kslice {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

/// 50 significant decimal digits; used wherever exact counts meet real arithmetic.
using Real = boost::multiprecision::cpp_bin_float_50;
using Complex = boost::multiprecision::cpp_complex_50;

/// Vertex subsets of graphs with at most 64 vertices.
using Mask = std::uint64_t;

inline Real to_real(const BigInt& x) { return static_cast<Real>(x); }
inline Real to_real(const Rational& x) { return static_cast<Real>(x); }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }
inline double to_double(const Real& x) { return x.convert_to<double>(); }

/// Fixed-precision decimal rendering used by every report writer.
std::string decimal(double x);
std::string decimal(const Real& x, int digits = 30);
std::string decimal(const Rational& x);

}  // namespace kslice
