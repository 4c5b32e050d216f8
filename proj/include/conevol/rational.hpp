#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <string>
#include <vector>

#include "conevol/errors.hpp"

namespace conevol {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>;

inline Integer num(const Rational& q) { return Integer(boost::multiprecision::numerator(q)); }
inline Integer den(const Rational& q) { return Integer(boost::multiprecision::denominator(q)); }

inline bool is_integral(const Rational& q) { return den(q) == 1; }

inline Integer floor_q(const Rational& q) {
  Integer n = num(q), d = den(q);
  Integer f = n / d;
  if (n < 0 && n % d != 0) --f;
  return f;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Parses "p", "-p", or "p/q" with q > 0 after normalization. Decimal
// literals are rejected on purpose: inputs are exact or not accepted.
Rational parse_rational(const std::string& s);

// Renders "p" or "p/q" (canonical GMP form, q > 0, gcd(p,q)=1).
std::string format_rational(const Rational& q);

// Exact value of the double (doubles are dyadic rationals).
inline Rational rational_from_double(double x) { return Rational(x); }

// Best rational approximation of x with denominator <= max_den, via
// continued-fraction convergents of the exact dyadic value.
Rational rational_reconstruct(double x, const Integer& max_den);

}  // namespace conevol
