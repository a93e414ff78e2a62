#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "momgen/polynomial.hpp"
#include "momgen/rational.hpp"

namespace momgen {

/// Odd-degree monomials of degree <= p over r variables.
///
/// Order: degree descending (p, p-2, ..., 1); within a degree, by number of
/// distinct variables ascending, then exponent vector lexicographically
/// descending. For p = 3 this gives cubes, then w_x^2 w_y, then w_x w_y w_z,
/// then the linear monomials.
struct OddBasis {
  int r = 0;
  int p = 0;
  std::vector<Monomial> monomials;

  std::size_t size() const { return monomials.size(); }

  /// Multinomial count deg! / prod e_v! of monomial i.
  Integer multiplicity(std::size_t i) const;
};

/// sum_{1 <= i <= (p+1)/2} C(r + 2i - 2, 2i - 1)
std::size_t odd_basis_size(int r, int p);

OddBasis enumerate_basis(int r, int p);

/// Expectation matrix T_ij = E[P_i * Q^{2j-1}], Q = sum_t alpha_t w_t^p.
///
/// Exact entries are kept alongside a float mirror. Column j of the mirror is
/// divided by 2^column_exponent[j] before rounding so high-order columns stay
/// in double range; `scaled(i, j) * 2^column_exponent[j]` is the entry.
class CEMatrix {
 public:
  CEMatrix(int r, int p, std::vector<Rational> alpha, OddBasis basis, std::vector<Rational> entries);

  int r() const { return r_; }
  int p() const { return p_; }
  std::size_t size() const { return basis_.size(); }
  const std::vector<Rational>& alpha() const { return alpha_; }
  const OddBasis& basis() const { return basis_; }

  const Rational& exact(std::size_t i, std::size_t j) const { return entries_[i * size() + j]; }

  /// Unscaled rounding of the exact entries (may overflow for large r, p).
  Eigen::MatrixXd float_mirror() const;

  const Eigen::MatrixXd& scaled() const { return scaled_; }
  const Eigen::VectorXi& column_exponent() const { return column_exp_; }

  /// Exact rank and a basis of {n : n^T T = 0}. The basis is empty exactly
  /// when T is invertible.
  std::size_t rank() const { return rank_; }
  const std::vector<std::vector<Rational>>& left_null_space() const { return left_null_; }

 private:
  int r_;
  int p_;
  std::vector<Rational> alpha_;
  OddBasis basis_;
  std::vector<Rational> entries_;  // row-major
  Eigen::MatrixXd scaled_;
  Eigen::VectorXi column_exp_;
  std::size_t rank_ = 0;
  std::vector<std::vector<Rational>> left_null_;
};

CEMatrix build_ce_matrix(std::span<const Rational> alpha, int p,
                         std::size_t term_cap = kDefaultTermCap);

/// Convenience overload; each double is taken at its exact binary value.
CEMatrix build_ce_matrix(std::span<const double> alpha, int p,
                         std::size_t term_cap = kDefaultTermCap);

/// Exact determinant by fraction-free elimination over Q.
Rational determinant(std::vector<Rational> a, std::size_t n);

/// Exact solve A x = b (A row-major n x n). Throws on a singular matrix.
std::vector<Rational> solve_exact(std::vector<Rational> a, std::vector<Rational> b, std::size_t n);

struct ExactKernel {
  std::size_t rank = 0;
  std::vector<std::vector<Rational>> basis;  // each of length cols
};

/// Rank and null space of a rows x cols row-major rational matrix (reduced
/// row echelon form; one basis vector per free column).
ExactKernel null_space(std::vector<Rational> a, std::size_t rows, std::size_t cols);

/// Unique solution of a consistent rows x cols system of full column rank.
/// Throws NumericalError when the system is inconsistent or underdetermined.
std::vector<Rational> solve_exact_consistent(std::vector<Rational> a, std::vector<Rational> b,
                                             std::size_t rows, std::size_t cols);

enum class GenericStatus { Holds, Unknown };

struct GenericCertificate {
  GenericStatus status = GenericStatus::Unknown;
  std::vector<long> witness;  // lambda at which det != 0
  Rational determinant;       // value at the witness (or last trial)
  std::size_t rank = 0;       // exact rank at the witness (or last trial)
  std::size_t size = 0;
  int trials_used = 0;
};

/// Evaluates det(CE[lambda]) exactly at integer points: all-ones first, then
/// random nonzero integers in [-9, 9]. One nonzero value certifies that the
/// determinant polynomial is not identically zero.
GenericCertificate generic_condition_check(int r, int p, int trials, std::uint64_t seed,
                                           std::size_t term_cap = kDefaultTermCap);

}  // namespace momgen
