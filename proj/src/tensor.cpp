#include "momgen/tensor.hpp"

#include <algorithm>
#include <random>

#include "momgen/random.hpp"

namespace momgen {

namespace {

Eigen::VectorXd gaussian_unit(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
  } while (x.norm() == 0.0);
  return x.normalized();
}

bool leading_positive(const Eigen::VectorXd& ev, double pd_tol, Eigen::Index rank) {
  const double radius = ev.cwiseAbs().maxCoeff();
  if (radius == 0.0) return false;
  for (Eigen::Index i = 0; i < rank; ++i)
    if (ev(i) <= pd_tol * radius) return false;
  return true;
}

}  // namespace

bool is_separating(const SymTensor3d& t, const Eigen::VectorXd& x, double pd_tol, Eigen::Index rank) {
  if (rank < 0) rank = t.dim();
  const auto eig = sym_eig(slice_combine(t, x));
  return leading_positive(eig.values, pd_tol, rank);
}

SeparatingVector find_separating_vector(const SymTensor3d& t, int max_tries, std::uint64_t seed,
                                        double pd_tol, Eigen::Index rank) {
  const Eigen::Index n = t.dim();
  if (rank < 0) rank = n;
  Rng rng(seed);

  // Range of the mode-1 unfolding; on it lambda_min(L_x) is concave in x, so a
  // rejected draw is pushed along the supergradient T(., v, v) of the smallest
  // eigenpair before the next draw.
  Eigen::MatrixXd unfold(n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) unfold(i, j * n + k) = t(i, j, k);
  const Eigen::MatrixXd frame = Eigen::JacobiSVD<Eigen::MatrixXd>(unfold, Eigen::ComputeThinU).matrixU().leftCols(rank);
  const SymTensor3d reduced = contract(t, Eigen::MatrixXd(frame.transpose()));

  auto accept = [&](const Eigen::VectorXd& cand, SymEig<double>& eig) {
    eig = sym_eig(slice_combine(t, cand));
    if (!leading_positive(eig.values, pd_tol, rank)) return false;
    // the remaining n - rank eigenvalues must be negligible
    for (Eigen::Index i = rank; i < n; ++i)
      if (std::abs(eig.values(i)) > 0.5 * eig.values(rank - 1) && eig.values(i) < 0) return false;
    return true;
  };

  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Eigen::VectorXd x;
    if (attempt == 0) {
      x = t.trace_vector();
      if (x.norm() == 0.0) continue;
      x.normalize();
    } else {
      x = gaussian_unit(n, rng);
    }
    SymEig<double> eig;
    for (int sign = 0; sign < 2; ++sign) {
      const Eigen::VectorXd cand = sign == 0 ? x : Eigen::VectorXd(-x);
      if (accept(cand, eig)) return {cand, eig.values, attempt + 1};
    }
    if (attempt == 0) continue;

    Eigen::VectorXd z = (frame.transpose() * x).normalized();
    if (!z.allFinite()) continue;
    constexpr int kAscentSteps = 200;
    for (int step = 0; step < kAscentSteps; ++step) {
      const auto red = sym_eig(slice_combine(reduced, z));
      const Eigen::VectorXd v = red.vectors.col(rank - 1);
      Eigen::VectorXd g(rank);
      for (Eigen::Index i = 0; i < rank; ++i) g(i) = v.dot(slice_combine(reduced, Eigen::VectorXd::Unit(rank, i)) * v);
      if (red.values(rank - 1) > pd_tol * red.values.cwiseAbs().maxCoeff()) {
        const Eigen::VectorXd cand = (frame * z).normalized();
        if (accept(cand, eig)) return {cand, eig.values, attempt + 1};
      }
      if (g.norm() == 0.0) break;
      z = (z + g.normalized() / std::sqrt(static_cast<double>(step + 1))).normalized();
    }
  }
  throw NumericalError("jennrich", "no separating vector found after " + std::to_string(max_tries) +
                                       " tries; tensor is not a positive rank-" + std::to_string(rank) +
                                       " combination or is too noisy");
}

DecompResult jennrich(const SymTensor3d& t, Eigen::Index r_target, std::uint64_t seed,
                      const JennrichOptions& opts) {
  const Eigen::Index n = t.dim();
  if (r_target < 1 || r_target > n) throw ValidationError("jennrich: target rank must be in [1, dim]");
  DecompResult out;

  // whitening
  const SeparatingVector sep = find_separating_vector(t, opts.max_tries_x, derive_seed(seed, 0), opts.pd_tol, r_target);
  out.x_tries = sep.tries;
  const auto lx = sym_eig(slice_combine(t, sep.x));
  const Eigen::MatrixXd q = lx.vectors.leftCols(r_target);
  const Eigen::VectorXd dvals = lx.values.head(r_target);
  // W = D^{-1/2} Q^T, so W u_i are orthogonal
  const Eigen::MatrixXd w = dvals.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  const Eigen::MatrixXd w_inv = q * dvals.cwiseSqrt().asDiagonal();
  const SymTensor3d whitened = contract(t, w);

  // second slice: eigenvalues must be separated
  Rng rng(derive_seed(seed, 1));
  SymEig<double> ty;
  Eigen::VectorXd y;
  bool separated = false;
  for (int attempt = 0; attempt < opts.y_retries && !separated; ++attempt) {
    y = gaussian_unit(r_target, rng);
    ty = sym_eig(slice_combine(whitened, y));
    const double radius = ty.values.cwiseAbs().maxCoeff();
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i + 1 < r_target; ++i) gap = std::min(gap, ty.values(i) - ty.values(i + 1));
    out.min_eigengap = r_target > 1 ? gap / std::max(radius, 1e-300) : 1.0;
    out.y_tries = attempt + 1;
    separated = r_target == 1 || gap > opts.gap_tol * radius;
  }
  if (!separated)
    throw NumericalError("jennrich", "slice eigenvalues collide after " + std::to_string(opts.y_retries) + " draws");

  // sign so that lambda_i = d_i / (v_i . y) > 0; magnitude from T(v, v, v)
  std::vector<TensorComponent> comps;
  for (Eigen::Index i = 0; i < r_target; ++i) {
    Eigen::VectorXd vi = ty.vectors.col(i);
    const double proj = vi.dot(y);
    if ((proj != 0.0 && ty.values(i) / proj < 0.0) || (proj == 0.0 && whitened.apply(vi) < 0.0)) vi = -vi;
    const double lambda = whitened.apply(vi);
    if (!(lambda > 0.0)) throw NumericalError("jennrich", "non-positive component weight");
    const Eigen::VectorXd u = std::cbrt(lambda) * (w_inv * vi);
    const double nu = u.norm();
    comps.push_back({nu * nu * nu, u / nu});
  }
  std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });

  // diagnostics
  double ortho = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const Eigen::VectorXd a = (w * comps[i].vector).normalized();
      const Eigen::VectorXd b = (w * comps[j].vector).normalized();
      ortho = std::max(ortho, std::abs(a.dot(b)));
    }
  out.whitened_orthogonality = ortho;
  SymTensor3d recon(n);
  for (const auto& c : comps) recon.add_rank_one(c.vector, c.weight);
  out.residual = (recon - t).frobenius_norm();
  const double tn = t.frobenius_norm();
  out.relative_residual = tn > 0 ? out.residual / tn : out.residual;
  out.components = std::move(comps);
  if (out.relative_residual > opts.max_relative_residual)
    throw NumericalError("jennrich", "reconstruction residual " + std::to_string(out.relative_residual) +
                                         " exceeds " + std::to_string(opts.max_relative_residual));
  return out;
}

}  // namespace momgen
