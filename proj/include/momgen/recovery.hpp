#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "momgen/ce_matrix.hpp"
#include "momgen/generator.hpp"
#include "momgen/moments.hpp"
#include "momgen/pvector.hpp"
#include "momgen/symmetric_functions.hpp"
#include "momgen/tensor.hpp"

namespace momgen {

struct RecoveryOptions {
  RootOptions roots;
  JennrichOptions jennrich;
  double refine_threshold = 1e8;  // condition number that triggers exact-residual refinement
  double cond_limit = 1e12;       // equilibrated condition number treated as singular
  int refine_iters = 20;
  double zero_tol = 1e-8;     // ||Tensor(p)||_F / sum(beta) below this means P = 0
  double tensor_rank_tol = 1e-7;
  double tie_tol = 1e-12;     // assignment margin / (1 + |q|) below this is ambiguous
  int consistency_starts = 512;    // restarts when the CE kernel leaves the p-vector undetermined
  double consistency_tol = 1e-9;   // relative residual that ends the restarts early
  double gram_rank_tol = 0.25;  // lambda_{d+1} / lambda_1 above this is a model misfit
  bool strict = true;         // false: collect per-stage failures and continue
  std::uint64_t seed = 0;
  std::size_t term_cap = kDefaultTermCap;
  unsigned threads = 0;
};

struct WeightRecovery {
  int component = 0;
  std::vector<double> alpha;  // ascending
  double max_imag = 0.0;
  std::vector<std::string> warnings;
};

/// Weights of component k: power sums from the even moments, then roots.
WeightRecovery recover_weights(const MomentTable& table, int k, const RecoveryOptions& opts = {});

struct CESolve {
  Eigen::VectorXd x;
  double cond = 0.0;            // 2-norm condition of the equilibrated system on its range
  int null_dim = 0;             // dimension of {n : n^T T = 0}
  Eigen::MatrixXd null_basis;   // orthonormal, K x null_dim
  bool refined = false;
  int refine_iters = 0;
  bool exact_fallback = false;
  double relative_residual = 0.0;  // ||T^T x - s|| / ||s||, evaluated exactly
};

/// Least-squares solution of T^T x = s orthogonal to the kernel of T^T.
/// `s_exact`, when given, is used for the refinement residual.
CESolve solve_ce(const CEMatrix& ce, const Eigen::VectorXd& s, const std::vector<Rational>* s_exact,
                 const RecoveryOptions& opts = {});

struct OverlapRecovery {
  Pair pair{0, 0};
  Eigen::MatrixXd P;  // r x r, entries in [-1, 1]
  CESolve ce;
  PVector pvector;
  bool zero_tensor = false;
  int tensor_rank = 0;
  double jennrich_residual = 0.0;  // relative
  double margin = 0.0;             // second-best minus best assignment score
  double best_score = 0.0;
  int clamped_entries = 0;
  int clamped_q = 0;  // columns with 1 - |P_b|^2 < 0
  double consistency_residual = 0.0;  // relative, when the kernel is nontrivial
  int consistency_starts_used = 0;
  std::vector<std::string> notes;
};

/// Overlap matrix of pair (i, j) from E[G_i^{2k-1} G_j] and the weights of both components.
OverlapRecovery recover_overlaps(const MomentTable& table, const std::vector<double>& alpha_i,
                                 const std::vector<double>& alpha_j, Pair pair,
                                 const RecoveryOptions& opts = {}, const CEMatrix* ce = nullptr);

struct GramEstimate {
  int D = 0;
  int r = 0;
  Eigen::MatrixXd matrix;               // Dr x Dr
  double symmetrization_residual = 0.0;  // max over pairs of ||P^{ij} - P^{ji T}||_F
};

/// Blocks (i, i) = I; blocks (i, j) and (j, i) from the average of the two
/// ordered estimates. Missing ordered pairs fall back to the available one,
/// and to zero when both are missing.
GramEstimate assemble_gram(const std::map<Pair, Eigen::MatrixXd>& overlaps, int D, int r);

struct GramFactor {
  Eigen::MatrixXd stack;  // Dr x d
  Eigen::VectorXd eigenvalues;  // of the input, descending
  double psd_defect = 0.0;      // max(0, -lambda_min)
  double rank_excess = 0.0;     // lambda_{d+1} / lambda_1
  double raw_residual = 0.0;        // before per-block re-orthonormalisation
  double projected_residual = 0.0;  // after
};

GramFactor factor_gram(const GramEstimate& gram, int d, const RecoveryOptions& opts = {});

struct StageFailure {
  std::string stage;
  std::string what;
};

struct Metrics {
  double weight_error = 0.0;
  double gram_distance = 0.0;             // ||K K^T - K* K*^T||_F, rows alpha^{1/p} v
  double gram_distance_unweighted = 0.0;  // ||V V^T - V* V*^T||_F
  double direction_error = 0.0;           // min_W ||V W - V*||_F over orthogonal W
  std::optional<double> sliced_w1;
  std::optional<double> sliced_w1_stderr;
};

struct RecoveryReport {
  GeneratorSpec learner;
  std::vector<WeightRecovery> weights;
  std::vector<OverlapRecovery> overlaps;
  std::optional<GramEstimate> gram;
  std::optional<GramFactor> factor;
  std::vector<std::string> flags;
  std::vector<StageFailure> failures;
  std::optional<Metrics> metrics;

  bool ok() const { return failures.empty(); }
};

/// Full pipeline from a moment table. In strict mode the first failure is
/// rethrown; otherwise failures are recorded and later stages use what is left.
RecoveryReport recover_full(const MomentTable& table, int d, const RecoveryOptions& opts = {});

/// Distances between two generators of identical shape. Weights and rows are
/// matched by sorting each component's weights.
Metrics parameter_distance(const GeneratorSpec& g, const GeneratorSpec& gstar);

struct SlicedW1 {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Mean over L random unit directions of the 1-D W1 distance between N
/// projected samples of each generator. With shared_latents both generators
/// see the same latent draws.
SlicedW1 sliced_w1(const GeneratorSpec& g, const GeneratorSpec& gstar, std::uint64_t N, int L,
                   std::uint64_t seed, bool shared_latents = false);

}  // namespace momgen
