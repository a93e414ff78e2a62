#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace momgen {

/// G_k(w) = sum_i alpha(k, i) * (V[k].row(i) . w)^p for k < D, w in R^d.
struct GeneratorSpec {
  int D = 0;
  int d = 0;
  int r = 0;
  int p = 3;
  Eigen::MatrixXd alpha;           // D x r
  std::vector<Eigen::MatrixXd> V;  // D blocks of r x d, orthonormal rows

  /// Shape and orthonormality checks; throws ValidationError.
  void validate(double ortho_tol = 1e-10) const;

  /// All D*r direction rows stacked component-major (Dr x d).
  Eigen::MatrixXd direction_stack() const;
};

/// r x d matrix with orthonormal rows, Haar distributed: Gaussian d x d
/// matrix, QR, columns of Q sign-fixed so R has a positive diagonal, first r
/// columns transposed.
Eigen::MatrixXd haar_orthogonal_block(int d, int r, std::uint64_t seed);

struct SynthesisParams {
  int D = 3;
  int d = 4;
  int r = 2;
  int p = 3;
  double M = 3.0;      // weight mean
  double sigma = 1.0;  // weight standard deviation
  double tau = 0.1;
  double A = 10.0;
  int max_redraws = 10000;  // per component
};

/// tau < alpha < A and pairwise gaps > tau.
bool is_robust(const Eigen::VectorXd& weights, double tau, double A);

/// Draws a (tau, A)-robust target. Weights of each component are drawn i.i.d.
/// N(M, sigma^2) and redrawn as a group until robust, then sorted ascending.
GeneratorSpec synthesize_target(const SynthesisParams& params, std::uint64_t seed);

Eigen::VectorXd evaluate(const GeneratorSpec& g, const Eigen::Ref<const Eigen::VectorXd>& omega);

/// Outputs for a batch of latents (columns of omega, d x n) as a D x n matrix.
Eigen::MatrixXd evaluate_batch(const GeneratorSpec& g, const Eigen::Ref<const Eigen::MatrixXd>& omega);

/// Overlap matrices P^{(k,l)} = V_k V_l^T and residual norms Q_b.
struct OverlapTruth {
  Eigen::MatrixXd P;  // r x r
  Eigen::VectorXd Q;  // Q_b = sqrt(max(0, 1 - sum_a P_ab^2))
};

OverlapTruth overlap_truth(const GeneratorSpec& g, int k, int l);

/// FNV-1a over the serialised bytes of every field; used for determinism checks.
std::uint64_t spec_hash(const GeneratorSpec& g);

}  // namespace momgen
