#include "momgen/gaussian.hpp"

namespace momgen {

namespace {

bool accumulate_factor_moment(Integer& acc, std::uint32_t exponent) {
  if (exponent % 2 != 0) return false;
  if (exponent > 2) acc *= double_factorial(exponent - 1);
  return true;
}

}  // namespace

Rational gaussian_monomial_expectation(const Monomial& m) {
  Integer acc = 1;
  for (const auto& [v, e] : m.factors())
    if (!accumulate_factor_moment(acc, e)) return Rational(0);
  return Rational(acc);
}

Rational gaussian_expectation(const ExactPoly& p) {
  Rational total = 0;
  for (const auto& [m, c] : p.terms()) {
    const Rational e = gaussian_monomial_expectation(m);
    if (e != 0) total += c * e;
  }
  return total;
}

Rational gaussian_expectation(const Monomial& m, const ExactPoly& p) {
  Rational total = 0;
  for (const auto& [mp, c] : p.terms()) {
    const Rational e = gaussian_monomial_expectation(m * mp);
    if (e != 0) total += c * e;
  }
  return total;
}

}  // namespace momgen
