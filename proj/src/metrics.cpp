#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "momgen/error.hpp"
#include "momgen/random.hpp"
#include "momgen/recovery.hpp"

namespace momgen {

namespace {

// weights ascending per component, rows permuted to match
void canonical(const GeneratorSpec& g, Eigen::MatrixXd& alpha, Eigen::MatrixXd& stack) {
  alpha.resize(g.D, g.r);
  stack.resize(g.D * g.r, g.d);
  for (int k = 0; k < g.D; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(g.r));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return g.alpha(k, a) < g.alpha(k, b); });
    for (int i = 0; i < g.r; ++i) {
      alpha(k, i) = g.alpha(k, idx[static_cast<std::size_t>(i)]);
      stack.row(k * g.r + i) = g.V[static_cast<std::size_t>(k)].row(idx[static_cast<std::size_t>(i)]);
    }
  }
}

Eigen::MatrixXd weighted(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& stack, int p) {
  Eigen::MatrixXd k = stack;
  for (Eigen::Index k0 = 0; k0 < alpha.rows(); ++k0)
    for (Eigen::Index i = 0; i < alpha.cols(); ++i) {
      const double a = alpha(k0, i);
      const double s = std::copysign(std::pow(std::abs(a), 1.0 / p), a);
      k.row(k0 * alpha.cols() + i) *= s;
    }
  return k;
}

}  // namespace

Metrics parameter_distance(const GeneratorSpec& g, const GeneratorSpec& gstar) {
  if (g.D != gstar.D || g.d != gstar.d || g.r != gstar.r || g.p != gstar.p)
    throw ValidationError("parameter_distance: generators differ in shape");
  Eigen::MatrixXd a, v, as, vs;
  canonical(g, a, v);
  canonical(gstar, as, vs);

  Metrics m;
  for (int k = 0; k < g.D; ++k) m.weight_error = std::max(m.weight_error, (a.row(k) - as.row(k)).norm());
  const Eigen::MatrixXd K = weighted(a, v, g.p);
  const Eigen::MatrixXd Ks = weighted(as, vs, g.p);
  m.gram_distance = (K * K.transpose() - Ks * Ks.transpose()).norm();
  m.gram_distance_unweighted = (v * v.transpose() - vs * vs.transpose()).norm();

  // orthogonal Procrustes: W = U V^T from the SVD of V^T V*
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v.transpose() * vs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd w = svd.matrixU() * svd.matrixV().transpose();
  m.direction_error = (v * w - vs).norm();
  return m;
}

SlicedW1 sliced_w1(const GeneratorSpec& g, const GeneratorSpec& gstar, std::uint64_t N, int L,
                   std::uint64_t seed, bool shared_latents) {
  if (N < 1 || L < 1) throw ValidationError("sliced_w1 needs N >= 1 and L >= 1");
  if (g.D != gstar.D || g.d != gstar.d) throw ValidationError("sliced_w1: generators differ in shape");

  auto draw = [&](std::uint64_t index) {
    Rng rng(derive_seed(seed, SeedStream::Evaluation, index));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd omega(g.d, static_cast<Eigen::Index>(N));
    for (Eigen::Index c = 0; c < omega.cols(); ++c)
      for (int i = 0; i < g.d; ++i) omega(i, c) = normal(rng);
    return omega;
  };
  const Eigen::MatrixXd wa = draw(0);
  const Eigen::MatrixXd x = evaluate_batch(g, wa);
  const Eigen::MatrixXd y = evaluate_batch(gstar, shared_latents ? wa : draw(1));

  Rng rng(derive_seed(seed, SeedStream::Evaluation, 2));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> per_dir;
  std::vector<double> a(N), b(N);
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd theta(g.D);
    do {
      for (int k = 0; k < g.D; ++k) theta(k) = normal(rng);
    } while (theta.norm() == 0.0);
    theta.normalize();
    Eigen::Map<Eigen::RowVectorXd>(a.data(), static_cast<Eigen::Index>(N)) = theta.transpose() * x;
    Eigen::Map<Eigen::RowVectorXd>(b.data(), static_cast<Eigen::Index>(N)) = theta.transpose() * y;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t n = 0; n < N; ++n) s += std::abs(a[n] - b[n]);
    per_dir.push_back(s / static_cast<double>(N));
  }
  SlicedW1 out;
  out.value = std::accumulate(per_dir.begin(), per_dir.end(), 0.0) / L;
  if (L > 1) {
    double var = 0.0;
    for (double v : per_dir) var += (v - out.value) * (v - out.value);
    out.stderr_ = std::sqrt(var / (L - 1) / L);
  }
  return out;
}

}  // namespace momgen
