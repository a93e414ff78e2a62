#include "momgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "momgen/error.hpp"
#include "momgen/random.hpp"

namespace momgen {

namespace {

double ipow(double x, int p) {
  double out = 1.0;
  for (int i = 0; i < p; ++i) out *= x;
  return out;
}

}  // namespace

void GeneratorSpec::validate(double ortho_tol) const {
  if (D < 1 || d < 1 || r < 1) throw ValidationError("generator: D, d, r must be positive");
  if (p < 1 || p % 2 == 0) throw ValidationError("generator: p must be odd and positive");
  if (r > d) throw ValidationError("generator: r must not exceed d");
  if (alpha.rows() != D || alpha.cols() != r) throw ValidationError("generator: alpha must be D x r");
  if (static_cast<int>(V.size()) != D) throw ValidationError("generator: need D direction blocks");
  for (int k = 0; k < D; ++k) {
    if (V[k].rows() != r || V[k].cols() != d)
      throw ValidationError("generator: direction block " + std::to_string(k) + " must be r x d");
    const double err = (V[k] * V[k].transpose() - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
    if (!(err <= ortho_tol))
      throw ValidationError("generator: rows of block " + std::to_string(k) + " are not orthonormal (" +
                            std::to_string(err) + ")");
  }
  if (!alpha.allFinite()) throw ValidationError("generator: non-finite weight");
}

Eigen::MatrixXd GeneratorSpec::direction_stack() const {
  Eigen::MatrixXd out(D * r, d);
  for (int k = 0; k < D; ++k) out.middleRows(k * r, r) = V[k];
  return out;
}

Eigen::MatrixXd haar_orthogonal_block(int d, int r, std::uint64_t seed) {
  if (r < 1 || r > d) throw ValidationError("haar_orthogonal_block: need 1 <= r <= d");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (rr(j, j) < 0) q.col(j) = -q.col(j);
  return q.leftCols(r).transpose();
}

bool is_robust(const Eigen::VectorXd& w, double tau, double A) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > tau && w(i) < A)) return false;
    for (Eigen::Index j = i + 1; j < w.size(); ++j)
      if (!(std::abs(w(i) - w(j)) > tau)) return false;
  }
  return true;
}

GeneratorSpec synthesize_target(const SynthesisParams& s, std::uint64_t seed) {
  if (s.D < 1 || s.d < 1 || s.r < 1) throw ValidationError("D, d, r must be positive");
  if (s.r > s.d) throw ValidationError("r must not exceed d");
  if (s.p < 1 || s.p % 2 == 0) throw ValidationError("p must be odd and positive");
  if (!(s.tau < s.A)) throw ValidationError("tau must be below A");
  if (!(s.sigma >= 0.0) || !(s.tau >= 0.0)) throw ValidationError("sigma and tau must be non-negative");

  GeneratorSpec g;
  g.D = s.D;
  g.d = s.d;
  g.r = s.r;
  g.p = s.p;
  g.alpha.resize(s.D, s.r);
  g.V.resize(static_cast<std::size_t>(s.D));

  for (int k = 0; k < s.D; ++k) {
    Rng rng(derive_seed(seed, SeedStream::Synthesis, 2 * static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> normal(s.M, s.sigma);
    Eigen::VectorXd w(s.r);
    bool ok = false;
    for (int attempt = 0; attempt < s.max_redraws && !ok; ++attempt) {
      for (int i = 0; i < s.r; ++i) w(i) = normal(rng);
      ok = is_robust(w, s.tau, s.A);
    }
    if (!ok)
      throw NumericalError("synthesis", "no robust weights for component " + std::to_string(k) + " after " +
                                            std::to_string(s.max_redraws) + " draws (tau/sigma infeasible)");
    std::sort(w.data(), w.data() + w.size());
    g.alpha.row(k) = w.transpose();
    g.V[static_cast<std::size_t>(k)] =
        haar_orthogonal_block(s.d, s.r, derive_seed(seed, SeedStream::Synthesis, 2 * static_cast<std::uint64_t>(k) + 1));
  }
  return g;
}

Eigen::VectorXd evaluate(const GeneratorSpec& g, const Eigen::Ref<const Eigen::VectorXd>& omega) {
  if (omega.size() != g.d) throw ValidationError("evaluate: latent has wrong dimension");
  Eigen::VectorXd out(g.D);
  for (int k = 0; k < g.D; ++k) {
    const Eigen::VectorXd proj = g.V[static_cast<std::size_t>(k)] * omega;
    double s = 0.0;
    for (int i = 0; i < g.r; ++i) s += g.alpha(k, i) * ipow(proj(i), g.p);
    out(k) = s;
  }
  return out;
}

Eigen::MatrixXd evaluate_batch(const GeneratorSpec& g, const Eigen::Ref<const Eigen::MatrixXd>& omega) {
  if (omega.rows() != g.d) throw ValidationError("evaluate: latent has wrong dimension");
  const Eigen::MatrixXd stack = g.direction_stack();
  const Eigen::MatrixXd proj = stack * omega;  // Dr x n
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.D, omega.cols());
  for (Eigen::Index n = 0; n < omega.cols(); ++n)
    for (int k = 0; k < g.D; ++k) {
      double s = 0.0;
      for (int i = 0; i < g.r; ++i) s += g.alpha(k, i) * ipow(proj(k * g.r + i, n), g.p);
      out(k, n) = s;
    }
  return out;
}

OverlapTruth overlap_truth(const GeneratorSpec& g, int k, int l) {
  if (k < 0 || l < 0 || k >= g.D || l >= g.D) throw ValidationError("overlap_truth: component out of range");
  OverlapTruth t;
  t.P = g.V[static_cast<std::size_t>(k)] * g.V[static_cast<std::size_t>(l)].transpose();
  t.Q.resize(g.r);
  for (int b = 0; b < g.r; ++b) t.Q(b) = std::sqrt(std::max(0.0, 1.0 - t.P.col(b).squaredNorm()));
  return t;
}

std::uint64_t spec_hash(const GeneratorSpec& g) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const int dims[4] = {g.D, g.d, g.r, g.p};
  feed(dims, sizeof(dims));
  feed(g.alpha.data(), sizeof(double) * static_cast<std::size_t>(g.alpha.size()));
  for (const auto& v : g.V) feed(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  return h;
}

}  // namespace momgen
