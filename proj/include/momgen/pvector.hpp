#pragma once

#include <Eigen/Dense>
#include <vector>

#include "momgen/ce_matrix.hpp"
#include "momgen/rational.hpp"
#include "momgen/tensor.hpp"

namespace momgen {

/// E[w^a (a + Q z)^p] bookkeeping: the monomial m of degree e = p - 2i gets
/// C(p, 2i) * (2i-1)!! * multinom(m) * sum_b beta_b * Q_b^{2i} * prod_x P_xb^{m_x}.
/// Then E[basis_row * Qpoly^{2k-1}] . pvector = S_{2k-1}.
template <typename Scalar>
std::vector<Scalar> pvector_from_overlap(const OddBasis& basis, const std::vector<Scalar>& beta,
                                         const std::vector<std::vector<Scalar>>& P);  // P[x][b]

/// d pvector / d P in double precision; column x + r * b holds the derivative
/// with respect to P(x, b).
Eigen::MatrixXd pvector_jacobian(const OddBasis& basis, const Eigen::VectorXd& beta, const Eigen::MatrixXd& P);

/// Double-precision convenience form of pvector_from_overlap.
Eigen::VectorXd pvector_from_overlap(const OddBasis& basis, const Eigen::VectorXd& beta, const Eigen::MatrixXd& P);

/// Decoded parts of a p-vector.
struct PVector {
  Eigen::VectorXd values;   // basis layout
  SymTensor3d tensor;       // sum_b beta_b P_b^{(x)3}; empty for p = 1
  Eigen::VectorXd linear;   // sum_b beta_b P_b
};

/// Inverts the layout above: strips the Gaussian factors per degree and
/// removes the Q_b^{2i} = (1 - |P_b|^2)^i admixture with Laplacians of the
/// higher-degree parts.
PVector decode_pvector(const OddBasis& basis, const Eigen::VectorXd& values);

}  // namespace momgen
