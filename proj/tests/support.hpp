#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "momgen/polynomial.hpp"
#include "momgen/rational.hpp"

namespace testing {

using momgen::ExactPoly;
using momgen::Monomial;
using momgen::Rational;

inline Rational rat(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Random nonzero rational with |num| <= max_num and 1 <= den <= max_den.
inline Rational random_rational(std::mt19937_64& rng, long max_num = 9, long max_den = 5) {
  std::uniform_int_distribution<long> num(-max_num, max_num);
  std::uniform_int_distribution<long> den(1, max_den);
  long n = 0;
  while (n == 0) n = num(rng);
  return rat(n, den(rng));
}

/// Random polynomial over `vars` variables, total degree <= max_deg.
inline ExactPoly random_poly(std::mt19937_64& rng, int vars, int max_deg, int terms) {
  std::uniform_int_distribution<int> var(0, vars - 1);
  std::uniform_int_distribution<int> deg(0, max_deg);
  ExactPoly p;
  for (int t = 0; t < terms; ++t) {
    std::vector<Monomial::Factor> f;
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) f.emplace_back(static_cast<std::uint32_t>(var(rng)), 1U);
    p.add_term(Monomial(std::move(f)), random_rational(rng));
  }
  return p;
}

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean and standard error of f(w) over n draws of w ~ N(0, I_dim).
inline McEstimate monte_carlo(int dim, std::uint64_t n, std::uint64_t seed,
                              const std::function<double(const std::vector<double>&)>& f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> w(static_cast<std::size_t>(dim));
  // Welford
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    for (auto& x : w) x = normal(rng);
    const double v = f(w);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (v - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

/// E[w^k] for a standard normal, by the recursion E[w^k] = (k-1) E[w^{k-2}].
inline Rational normal_moment(unsigned k) {
  if (k % 2) return 0;
  Rational m = 1;
  for (unsigned j = k; j >= 2; j -= 2) m *= j - 1;
  return m;
}

}  // namespace testing
