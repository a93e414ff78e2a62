#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "momgen/error.hpp"
#include "momgen/rational.hpp"

namespace momgen {

/// Product of variables w_v^e with e > 0; the empty monomial is the constant 1.
class Monomial {
 public:
  using Factor = std::pair<std::uint32_t, std::uint32_t>;  // (variable, exponent)

  Monomial() = default;

  /// Merges repeated variables and drops zero exponents.
  explicit Monomial(std::vector<Factor> factors) {
    std::sort(factors.begin(), factors.end());
    for (const auto& [v, e] : factors) {
      if (e == 0) continue;
      if (!factors_.empty() && factors_.back().first == v)
        factors_.back().second += e;
      else
        factors_.emplace_back(v, e);
    }
  }

  static Monomial variable(std::uint32_t var, std::uint32_t exponent = 1) {
    return Monomial({{var, exponent}});
  }

  /// Builds from a dense exponent vector (index = variable).
  static Monomial from_exponents(std::span<const std::uint32_t> exponents) {
    std::vector<Factor> f;
    for (std::size_t v = 0; v < exponents.size(); ++v)
      if (exponents[v] != 0) f.emplace_back(static_cast<std::uint32_t>(v), exponents[v]);
    return Monomial(std::move(f));
  }

  const std::vector<Factor>& factors() const { return factors_; }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& f : factors_) d += f.second;
    return d;
  }

  std::uint32_t exponent(std::uint32_t var) const {
    for (const auto& [v, e] : factors_)
      if (v == var) return e;
    return 0;
  }

  std::size_t num_distinct_vars() const { return factors_.size(); }

  /// Dense exponents over `nvars` variables.
  std::vector<std::uint32_t> exponents(std::size_t nvars) const {
    std::vector<std::uint32_t> out(nvars, 0);
    for (const auto& [v, e] : factors_) {
      if (v >= nvars) throw ValidationError("monomial variable out of range");
      out[v] = e;
    }
    return out;
  }

  bool is_constant() const { return factors_.empty(); }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.factors_.reserve(a.factors_.size() + b.factors_.size());
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() || j != b.factors_.end()) {
      if (j == b.factors_.end() || (i != a.factors_.end() && i->first < j->first)) {
        out.factors_.push_back(*i++);
      } else if (i == a.factors_.end() || j->first < i->first) {
        out.factors_.push_back(*j++);
      } else {
        out.factors_.emplace_back(i->first, i->second + j->second);
        ++i;
        ++j;
      }
    }
    return out;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }

  std::string str() const {
    if (factors_.empty()) return "1";
    std::string s;
    for (const auto& [v, e] : factors_) {
      if (!s.empty()) s += "*";
      s += "w" + std::to_string(v + 1);
      if (e != 1) s += "^" + std::to_string(e);
    }
    return s;
  }

 private:
  std::vector<Factor> factors_;  // sorted by variable, exponents > 0
};

/// Graded lexicographic order: total degree first, then exponent of w1, w2, ...
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const auto da = a.degree();
    const auto db = b.degree();
    if (da != db) return da < db;
    const auto& fa = a.factors();
    const auto& fb = b.factors();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < fa.size() || j < fb.size()) {
      const std::uint32_t va = i < fa.size() ? fa[i].first : UINT32_MAX;
      const std::uint32_t vb = j < fb.size() ? fb[j].first : UINT32_MAX;
      const std::uint32_t v = std::min(va, vb);
      const std::uint32_t ea = va == v ? fa[i].second : 0;
      const std::uint32_t eb = vb == v ? fb[j].second : 0;
      if (ea != eb) return ea < eb;
      if (va == v) ++i;
      if (vb == v) ++j;
    }
    return false;
  }
};

inline constexpr std::size_t kDefaultTermCap = 5'000'000;

/// Sparse multivariate polynomial with coefficients in `Scalar`.
/// Zero coefficients are never stored; iteration follows GradedLex.
template <typename Scalar>
class Polynomial {
 public:
  using TermMap = std::map<Monomial, Scalar, GradedLex>;

  Polynomial() = default;

  static Polynomial constant(const Scalar& c) {
    Polynomial p;
    p.add_term(Monomial{}, c);
    return p;
  }

  static Polynomial monomial(const Monomial& m, const Scalar& c = Scalar(1)) {
    Polynomial p;
    p.add_term(m, c);
    return p;
  }

  static Polynomial variable(std::uint32_t var, const Scalar& c = Scalar(1)) {
    return monomial(Monomial::variable(var), c);
  }

  void add_term(const Monomial& m, const Scalar& c) {
    if (c == Scalar(0)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Scalar(0)) terms_.erase(it);
    }
  }

  Scalar coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Scalar(0) : it->second;
  }

  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  std::uint32_t degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, Scalar(-c));
    return *this;
  }
  Polynomial& operator*=(const Scalar& s) {
    if (s == Scalar(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Scalar& s) { return a *= s; }
  friend Polynomial operator*(const Scalar& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) { return multiply(a, b); }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  /// Product with a term-count budget; exceeding it throws TermCapExceeded.
  static Polynomial multiply(const Polynomial& a, const Polynomial& b,
                             std::size_t cap = kDefaultTermCap) {
    Polynomial out;
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        out.add_term(ma * mb, ca * cb);
        if (out.terms_.size() > cap)
          throw TermCapExceeded("polynomial product exceeds " + std::to_string(cap) + " terms");
      }
    }
    return out;
  }

  /// Value at a point given by dense variable values.
  template <typename Point>
  double evaluate(const Point& x) const {
    double total = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = to_double(c);
      for (const auto& [v, e] : m.factors()) {
        double xv = static_cast<double>(x[v]);
        double pw = 1.0;
        for (std::uint32_t k = 0; k < e; ++k) pw *= xv;
        t *= pw;
      }
      total += t;
    }
    return total;
  }

 private:
  static double to_double(const Scalar& c) {
    if constexpr (std::is_same_v<Scalar, Rational>)
      return nearest_double(c);
    else
      return static_cast<double>(c);
  }

  TermMap terms_;
};

using ExactPoly = Polynomial<Rational>;

inline ExactPoly poly_mul(const ExactPoly& a, const ExactPoly& b,
                          std::size_t cap = kDefaultTermCap) {
  return ExactPoly::multiply(a, b, cap);
}

/// k-th power by binary exponentiation, k >= 1.
template <typename Scalar>
Polynomial<Scalar> poly_pow(const Polynomial<Scalar>& a, unsigned k,
                            std::size_t cap = kDefaultTermCap) {
  if (k == 0) throw ValidationError("poly_pow requires k >= 1");
  Polynomial<Scalar> result;
  bool have = false;
  Polynomial<Scalar> base = a;
  while (k > 0) {
    if (k & 1U) {
      result = have ? Polynomial<Scalar>::multiply(result, base, cap) : base;
      have = true;
    }
    k >>= 1U;
    if (k > 0) base = Polynomial<Scalar>::multiply(base, base, cap);
  }
  return result;
}

/// Sum_v d^2/dw_v^2 applied termwise.
template <typename Scalar>
Polynomial<Scalar> laplacian(const Polynomial<Scalar>& a) {
  Polynomial<Scalar> out;
  for (const auto& [m, c] : a.terms()) {
    for (const auto& [v, e] : m.factors()) {
      if (e < 2) continue;
      std::vector<Monomial::Factor> f = m.factors();
      for (auto& fe : f)
        if (fe.first == v) fe.second -= 2;
      out.add_term(Monomial(std::move(f)), c * Scalar(static_cast<double>(e) * (e - 1)));
    }
  }
  return out;
}

/// Terms of total degree exactly `deg`.
template <typename Scalar>
Polynomial<Scalar> homogeneous_part(const Polynomial<Scalar>& a, std::uint32_t deg) {
  Polynomial<Scalar> out;
  for (const auto& [m, c] : a.terms())
    if (m.degree() == deg) out.add_term(m, c);
  return out;
}

}  // namespace momgen
