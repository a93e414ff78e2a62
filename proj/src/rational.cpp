#include "momgen/rational.hpp"

#include <cmath>
#include <limits>

#include "momgen/error.hpp"

namespace momgen {

Integer double_factorial(unsigned long n) {
  Integer out;
  mpz_2fac_ui(out.get_mpz_t(), n);
  return out;
}

Integer factorial(unsigned long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

Integer binomial(unsigned long n, unsigned long k) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

Rational exact(double x) {
  if (!std::isfinite(x)) throw ValidationError("cannot represent non-finite value exactly");
  Rational q(x);
  q.canonicalize();
  return q;
}

double nearest_double(const Rational& q) {
  // mpq_get_d truncates toward zero; pick the closer neighbour.
  double t = q.get_d();
  if (!std::isfinite(t)) return t;
  const double away = std::nextafter(t, q > 0 ? std::numeric_limits<double>::infinity()
                                              : -std::numeric_limits<double>::infinity());
  if (!std::isfinite(away)) return t;
  const Rational dt = abs(q - Rational(t));
  const Rational da = abs(Rational(away) - q);
  if (da < dt) return away;
  if (da == dt) {
    // tie: even mantissa
    int e = 0;
    const double m = std::frexp(away, &e);
    const auto bits = static_cast<long long>(std::ldexp(m, 53));
    return (bits % 2 == 0) ? away : t;
  }
  return t;
}

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  Rational q;
  const std::string s(text);
  if (s.empty() || q.set_str(s, 10) != 0) throw ValidationError("malformed rational '" + s + "'");
  if (q.get_den() == 0) throw ValidationError("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

}  // namespace momgen
