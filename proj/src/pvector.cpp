#include "momgen/pvector.hpp"

#include <cmath>
#include <map>

#include "momgen/error.hpp"
#include "momgen/polynomial.hpp"

namespace momgen {

namespace {

// C(p, 2i) * (2i - 1)!!
Integer gaussian_factor(int p, int i) {
  Integer f = binomial(static_cast<unsigned long>(p), static_cast<unsigned long>(2 * i));
  if (i > 0) f *= double_factorial(static_cast<unsigned long>(2 * i - 1));
  return f;
}

template <typename Scalar>
Scalar to_scalar(const Integer& z) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return Rational(z);
  else
    return z.get_d();
}

}  // namespace

template <typename Scalar>
std::vector<Scalar> pvector_from_overlap(const OddBasis& basis, const std::vector<Scalar>& beta,
                                         const std::vector<std::vector<Scalar>>& P) {
  const int r = basis.r;
  const int p = basis.p;
  if (static_cast<int>(beta.size()) != r || static_cast<int>(P.size()) != r)
    throw ValidationError("p-vector: shapes disagree with basis");
  std::vector<Scalar> q2(static_cast<std::size_t>(r), Scalar(1));
  for (int b = 0; b < r; ++b)
    for (int x = 0; x < r; ++x) q2[static_cast<std::size_t>(b)] -= P[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)] * P[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)];

  std::vector<Scalar> out(basis.size(), Scalar(0));
  for (std::size_t m = 0; m < basis.size(); ++m) {
    const Monomial& mono = basis.monomials[m];
    const int i = (p - static_cast<int>(mono.degree())) / 2;
    Scalar sum(0);
    for (int b = 0; b < r; ++b) {
      Scalar term = beta[static_cast<std::size_t>(b)];
      for (int k = 0; k < i; ++k) term *= q2[static_cast<std::size_t>(b)];
      for (const auto& [x, e] : mono.factors())
        for (std::uint32_t k = 0; k < e; ++k) term *= P[x][static_cast<std::size_t>(b)];
      sum += term;
    }
    out[m] = sum * to_scalar<Scalar>(gaussian_factor(p, i) * basis.multiplicity(m));
  }
  return out;
}

template std::vector<Rational> pvector_from_overlap(const OddBasis&, const std::vector<Rational>&,
                                                    const std::vector<std::vector<Rational>>&);
template std::vector<double> pvector_from_overlap(const OddBasis&, const std::vector<double>&,
                                                  const std::vector<std::vector<double>>&);

Eigen::VectorXd pvector_from_overlap(const OddBasis& basis, const Eigen::VectorXd& beta, const Eigen::MatrixXd& P) {
  const int r = basis.r;
  std::vector<double> b(beta.data(), beta.data() + beta.size());
  std::vector<std::vector<double>> pm(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(r)));
  for (int x = 0; x < r; ++x)
    for (int c = 0; c < r; ++c) pm[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] = P(x, c);
  const auto v = pvector_from_overlap<double>(basis, b, pm);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd pvector_jacobian(const OddBasis& basis, const Eigen::VectorXd& beta, const Eigen::MatrixXd& P) {
  const int r = basis.r;
  const int p = basis.p;
  if (beta.size() != r || P.rows() != r || P.cols() != r) throw ValidationError("p-vector: shapes disagree with basis");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(basis.size()), r * r);
  for (std::size_t m = 0; m < basis.size(); ++m) {
    const Monomial& mono = basis.monomials[m];
    const int i = (p - static_cast<int>(mono.degree())) / 2;
    const double factor = Integer(gaussian_factor(p, i) * basis.multiplicity(m)).get_d();
    for (int b = 0; b < r; ++b) {
      const double q2 = 1.0 - P.col(b).squaredNorm();
      double prod = 1.0;
      for (const auto& [x, e] : mono.factors()) prod *= std::pow(P(static_cast<Eigen::Index>(x), b), static_cast<int>(e));
      for (int y = 0; y < r; ++y) {
        double d = 0.0;
        if (i > 0) d += i * std::pow(q2, i - 1) * (-2.0 * P(y, b)) * prod;
        const auto ey = static_cast<int>(mono.exponent(static_cast<std::uint32_t>(y)));
        if (ey > 0) {
          double rest = ey * std::pow(P(y, b), ey - 1);
          for (const auto& [x, e] : mono.factors())
            if (static_cast<int>(x) != y) rest *= std::pow(P(static_cast<Eigen::Index>(x), b), static_cast<int>(e));
          d += std::pow(q2, i) * rest;
        }
        J(static_cast<Eigen::Index>(m), y + r * b) = factor * beta(b) * d;
      }
    }
  }
  return J;
}

PVector decode_pvector(const OddBasis& basis, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) != basis.size())
    throw ValidationError("p-vector length does not match the basis");
  const int r = basis.r;
  const int p = basis.p;
  using Poly = Polynomial<double>;

  // A_e: degree-e part with the Gaussian factor divided out
  std::map<int, Poly> a;
  for (std::size_t m = 0; m < basis.size(); ++m) {
    const int e = static_cast<int>(basis.monomials[m].degree());
    const int i = (p - e) / 2;
    a[e].add_term(basis.monomials[m], values(static_cast<Eigen::Index>(m)) / gaussian_factor(p, i).get_d());
  }
  // B_e = sum_b beta_b (P_b . w)^e, from the top degree down
  std::map<int, Poly> b;
  b[p] = a[p];
  for (int e = p - 2; e >= 1; e -= 2) {
    const int i = (p - e) / 2;
    Poly be = a[e];
    for (int l = 1; l <= i; ++l) {
      Poly lap = b[e + 2 * l];
      for (int k = 0; k < l; ++k) lap = laplacian(lap);
      // (e+2l)! / e!
      double falling = 1.0;
      for (int k = e + 1; k <= e + 2 * l; ++k) falling *= k;
      const double c = binomial(static_cast<unsigned long>(i), static_cast<unsigned long>(l)).get_d() *
                       ((l % 2) ? -1.0 : 1.0) / falling;
      be -= lap * c;
    }
    b[e] = be;
  }

  PVector out;
  out.values = values;
  out.linear = Eigen::VectorXd::Zero(r);
  for (int x = 0; x < r; ++x) out.linear(x) = b[1].coeff(Monomial::variable(static_cast<std::uint32_t>(x)));
  if (p >= 3) {
    out.tensor = SymTensor3d(r);
    for (int x = 0; x < r; ++x)
      for (int y = x; y < r; ++y)
        for (int z = y; z < r; ++z) {
          const Monomial m({{static_cast<std::uint32_t>(x), 1}, {static_cast<std::uint32_t>(y), 1},
                            {static_cast<std::uint32_t>(z), 1}});
          Integer mult = factorial(3);
          for (const auto& [v, e] : m.factors()) mult /= factorial(e);
          out.tensor.set(x, y, z, b[3].coeff(m) / mult.get_d());
        }
  }
  return out;
}

}  // namespace momgen
