#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace momgen {

using Integer = mpz_class;
using Rational = mpq_class;

/// n!! for n >= 0 (0!! = 1).
Integer double_factorial(unsigned long n);
Integer factorial(unsigned long n);
Integer binomial(unsigned long n, unsigned long k);

/// Exact value of a finite double (every double is a dyadic rational).
Rational exact(double x);

/// Correctly rounded conversion (ties to even through mpq comparison).
double nearest_double(const Rational& q);

/// "num/den" form, always with an explicit denominator.
std::string to_string(const Rational& q);
Rational parse_rational(std::string_view text);

/// Cast helper so templated numerics can take exact coefficients.
template <typename Scalar>
Scalar rational_cast(const Rational& q);

template <>
inline Rational rational_cast<Rational>(const Rational& q) { return q; }

template <>
inline double rational_cast<double>(const Rational& q) { return nearest_double(q); }

}  // namespace momgen
