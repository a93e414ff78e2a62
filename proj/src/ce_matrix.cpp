#include "momgen/ce_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "momgen/error.hpp"
#include "momgen/gaussian.hpp"
#include "momgen/random.hpp"

namespace momgen {

namespace {

void compositions(int remaining, int var, int r, std::vector<std::uint32_t>& cur,
                  std::vector<std::vector<std::uint32_t>>& out) {
  if (var == r - 1) {
    cur[static_cast<std::size_t>(var)] = static_cast<std::uint32_t>(remaining);
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[static_cast<std::size_t>(var)] = static_cast<std::uint32_t>(e);
    compositions(remaining - e, var + 1, r, cur, out);
  }
}

}  // namespace

Integer OddBasis::multiplicity(std::size_t i) const {
  const Monomial& m = monomials.at(i);
  Integer out = factorial(m.degree());
  for (const auto& [v, e] : m.factors()) out /= factorial(e);
  return out;
}

std::size_t odd_basis_size(int r, int p) {
  std::size_t k = 0;
  for (int i = 1; i <= (p + 1) / 2; ++i)
    k += binomial(static_cast<unsigned long>(r + 2 * i - 2), static_cast<unsigned long>(2 * i - 1))
             .get_ui();
  return k;
}

OddBasis enumerate_basis(int r, int p) {
  if (r < 1) throw ValidationError("basis needs r >= 1");
  if (p < 1 || p % 2 == 0) throw ValidationError("activation degree must be odd and positive");
  OddBasis basis{r, p, {}};
  for (int deg = p; deg >= 1; deg -= 2) {
    std::vector<std::vector<std::uint32_t>> exps;
    std::vector<std::uint32_t> cur(static_cast<std::size_t>(r), 0);
    compositions(deg, 0, r, cur, exps);  // lexicographically descending
    std::stable_sort(exps.begin(), exps.end(), [](const auto& a, const auto& b) {
      auto nz = [](const auto& v) { return std::count_if(v.begin(), v.end(), [](auto e) { return e != 0; }); };
      return nz(a) < nz(b);
    });
    for (const auto& e : exps) basis.monomials.push_back(Monomial::from_exponents(e));
  }
  return basis;
}

CEMatrix::CEMatrix(int r, int p, std::vector<Rational> alpha, OddBasis basis,
                   std::vector<Rational> entries)
    : r_(r), p_(p), alpha_(std::move(alpha)), basis_(std::move(basis)), entries_(std::move(entries)) {
  const auto k = static_cast<Eigen::Index>(size());
  scaled_.resize(k, k);
  column_exp_.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    // power of two near the largest magnitude in the column
    long exp2 = 0;
    bool any = false;
    for (Eigen::Index i = 0; i < k; ++i) {
      const Rational& q = exact(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (q == 0) continue;
      long en = 0;
      long ed = 0;
      mpz_get_d_2exp(&en, q.get_num_mpz_t());
      mpz_get_d_2exp(&ed, q.get_den_mpz_t());
      const long e = en - ed;
      exp2 = any ? std::max(exp2, e) : e;
      any = true;
    }
    column_exp_(j) = static_cast<int>(exp2);
    for (Eigen::Index i = 0; i < k; ++i) {
      Rational q = exact(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (exp2 > 0)
        mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(exp2));
      else if (exp2 < 0)
        mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-exp2));
      scaled_(i, j) = nearest_double(q);
    }
  }
  const std::size_t n = size();
  std::vector<Rational> t(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t[i * n + j] = exact(j, i);
  ExactKernel kernel = null_space(std::move(t), n, n);
  rank_ = kernel.rank;
  left_null_ = std::move(kernel.basis);
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(std::vector<Rational>& a, std::size_t rows, std::size_t cols,
                              std::vector<Rational>* rhs = nullptr) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < rows; ++c) {
    std::size_t piv = row;
    while (piv < rows && a[piv * cols + c] == 0) ++piv;
    if (piv == rows) continue;
    if (piv != row) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(a[row * cols + j], a[piv * cols + j]);
      if (rhs) std::swap((*rhs)[row], (*rhs)[piv]);
    }
    const Rational inv = 1 / a[row * cols + c];
    for (std::size_t j = c; j < cols; ++j) a[row * cols + j] *= inv;
    if (rhs) (*rhs)[row] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row || a[i * cols + c] == 0) continue;
      const Rational f = a[i * cols + c];
      for (std::size_t j = c; j < cols; ++j) a[i * cols + j] -= f * a[row * cols + j];
      if (rhs) (*rhs)[i] -= f * (*rhs)[row];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

}  // namespace

ExactKernel null_space(std::vector<Rational> a, std::size_t rows, std::size_t cols) {
  if (a.size() != rows * cols) throw ValidationError("null_space: shape mismatch");
  const auto pivots = rref(a, rows, cols);
  ExactKernel k;
  k.rank = pivots.size();
  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivots) is_pivot[c] = true;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[f] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -a[i * cols + f];
    k.basis.push_back(std::move(v));
  }
  return k;
}

std::vector<Rational> solve_exact_consistent(std::vector<Rational> a, std::vector<Rational> b,
                                             std::size_t rows, std::size_t cols) {
  if (a.size() != rows * cols || b.size() != rows) throw ValidationError("solve_exact_consistent: shape mismatch");
  const auto pivots = rref(a, rows, cols, &b);
  if (pivots.size() != cols) throw NumericalError("solve", "exact system is underdetermined");
  for (std::size_t i = cols; i < rows; ++i)
    if (b[i] != 0) throw NumericalError("solve", "exact system is inconsistent");
  b.resize(cols);
  for (auto& v : b) v.canonicalize();
  return b;
}

Eigen::MatrixXd CEMatrix::float_mirror() const {
  const auto k = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      m(i, j) = nearest_double(exact(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  return m;
}

CEMatrix build_ce_matrix(std::span<const Rational> alpha, int p, std::size_t term_cap) {
  const int r = static_cast<int>(alpha.size());
  if (r < 1) throw ValidationError("CE matrix needs a nonempty weight vector");
  OddBasis basis = enumerate_basis(r, p);
  const std::size_t k = basis.size();

  ExactPoly q;
  for (int t = 0; t < r; ++t)
    q.add_term(Monomial::variable(static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(p)),
               alpha[static_cast<std::size_t>(t)]);
  const ExactPoly q2 = poly_mul(q, q, term_cap);

  std::vector<Rational> entries(k * k);
  ExactPoly power = q;  // Q^{2j-1}
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) power = poly_mul(power, q2, term_cap);
    for (std::size_t i = 0; i < k; ++i) entries[i * k + j] = gaussian_expectation(basis.monomials[i], power);
  }
  return CEMatrix(r, p, std::vector<Rational>(alpha.begin(), alpha.end()), std::move(basis),
                  std::move(entries));
}

CEMatrix build_ce_matrix(std::span<const double> alpha, int p, std::size_t term_cap) {
  std::vector<Rational> a;
  a.reserve(alpha.size());
  for (double x : alpha) a.push_back(exact(x));
  return build_ce_matrix(std::span<const Rational>(a), p, term_cap);
}

Rational determinant(std::vector<Rational> a, std::size_t n) {
  if (a.size() != n * n) throw ValidationError("determinant: shape mismatch");
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv * n + c] == 0) ++piv;
    if (piv == n) return Rational(0);
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
      det = -det;
    }
    const Rational pv = a[c * n + c];
    det *= pv;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a[i * n + c] == 0) continue;
      const Rational f = a[i * n + c] / pv;
      for (std::size_t j = c; j < n; ++j) a[i * n + j] -= f * a[c * n + j];
    }
  }
  det.canonicalize();
  return det;
}

std::vector<Rational> solve_exact(std::vector<Rational> a, std::vector<Rational> b, std::size_t n) {
  if (a.size() != n * n || b.size() != n) throw ValidationError("solve_exact: shape mismatch");
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv * n + c] == 0) ++piv;
    if (piv == n) throw NumericalError("solve", "singular matrix in exact solve");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
      std::swap(b[c], b[piv]);
    }
    const Rational pv = a[c * n + c];
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i * n + c] == 0) continue;
      const Rational f = a[i * n + c] / pv;
      for (std::size_t j = c; j < n; ++j) a[i * n + j] -= f * a[c * n + j];
      b[i] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    b[i] /= a[i * n + i];
    b[i].canonicalize();
  }
  return b;
}

GenericCertificate generic_condition_check(int r, int p, int trials, std::uint64_t seed,
                                           std::size_t term_cap) {
  if (trials < 1) throw ValidationError("generic_condition_check needs at least one trial");
  Rng rng(seed);
  std::uniform_int_distribution<long> pick(1, 18);
  GenericCertificate cert;
  for (int t = 0; t < trials; ++t) {
    std::vector<long> lambda(static_cast<std::size_t>(r), 1);
    if (t > 0)
      for (auto& l : lambda) {
        const long v = pick(rng);
        l = v <= 9 ? v : 9 - v;  // {1..9} u {-1..-9}
      }
    std::vector<Rational> a;
    for (long l : lambda) a.emplace_back(l);
    const CEMatrix ce = build_ce_matrix(std::span<const Rational>(a), p, term_cap);
    std::vector<Rational> entries;
    for (std::size_t i = 0; i < ce.size(); ++i)
      for (std::size_t j = 0; j < ce.size(); ++j) entries.push_back(ce.exact(i, j));
    cert.determinant = determinant(std::move(entries), ce.size());
    cert.witness = lambda;
    cert.rank = ce.rank();
    cert.size = ce.size();
    cert.trials_used = t + 1;
    if (cert.determinant != 0) {
      cert.status = GenericStatus::Holds;
      return cert;
    }
  }
  return cert;
}

}  // namespace momgen
