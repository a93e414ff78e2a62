#include "momgen/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "momgen/error.hpp"
#include "momgen/parallel.hpp"
#include "momgen/random.hpp"

namespace momgen {

namespace {

std::string pair_name(Pair p) { return "(" + std::to_string(p.first) + ", " + std::to_string(p.second) + ")"; }

// s - T^T x, exactly, with each entry divided by 2^c_i
std::vector<Rational> exact_residual(const CEMatrix& ce, const std::vector<Rational>& s, const Eigen::VectorXd& x) {
  const std::size_t k = ce.size();
  std::vector<Rational> xe(k);
  for (std::size_t m = 0; m < k; ++m) xe[m] = exact(x(static_cast<Eigen::Index>(m)));
  std::vector<Rational> res(k);
  for (std::size_t i = 0; i < k; ++i) {
    Rational acc = s[i];
    for (std::size_t m = 0; m < k; ++m) acc -= ce.exact(m, i) * xe[m];
    res[i] = acc;
  }
  return res;
}

double rational_norm(const std::vector<Rational>& v) {
  double s = 0.0;
  for (const auto& q : v) {
    const double d = nearest_double(q);
    s += d * d;
  }
  return std::sqrt(s);
}

Rational scale_pow2(Rational q, int e) {
  if (e > 0)
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  else if (e < 0)
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  return q;
}

}  // namespace

WeightRecovery recover_weights(const MomentTable& table, int k, const RecoveryOptions& opts) {
  if (k < 0 || k >= table.D) throw ValidationError("component index out of range");
  const auto& row = table.intra.at(static_cast<std::size_t>(k));
  if (static_cast<int>(row.size()) != table.r)
    throw ValidationError("component " + std::to_string(k) + " has " + std::to_string(row.size()) +
                          " intra moments, expected " + std::to_string(table.r));
  PowerSums<double> F;
  if (!table.intra_exact.empty()) {
    const auto& ex = table.intra_exact.at(static_cast<std::size_t>(k));
    const auto Fe = moments_to_power_sums<Rational>(std::span<const Rational>(ex), table.r, table.p);
    for (const auto& v : Fe.values) F.values.push_back(nearest_double(v));
  } else {
    F = moments_to_power_sums<double>(std::span<const double>(row), table.r, table.p);
  }
  try {
    const WeightSolution sol = power_sums_to_weights(F, opts.roots);
    return {k, sol.alpha, sol.max_imag, sol.warnings};
  } catch (const NumericalError& e) {
    throw NumericalError("roots", "component " + std::to_string(k) + ": " + e.what());
  }
}

CESolve solve_ce(const CEMatrix& ce, const Eigen::VectorXd& s, const std::vector<Rational>* s_exact,
                 const RecoveryOptions& opts) {
  const auto k = static_cast<Eigen::Index>(ce.size());
  if (s.size() != k) throw ValidationError("joint moment vector has the wrong length");
  const Eigen::VectorXi& cexp = ce.column_exponent();
  const auto& kernel = ce.left_null_space();
  const auto m = static_cast<Eigen::Index>(kernel.size());

  // T = S diag(2^c)  =>  T^T x = s  <=>  S^T x = 2^{-c} s
  Eigen::MatrixXd a = ce.scaled().transpose();
  Eigen::VectorXd row_scale(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double mx = a.row(i).cwiseAbs().maxCoeff();
    row_scale(i) = mx > 0 ? 1.0 / mx : 1.0;
  }
  a = row_scale.asDiagonal() * a;
  Eigen::VectorXd b(k);
  for (Eigen::Index i = 0; i < k; ++i) b(i) = row_scale(i) * std::ldexp(s(i), -cexp(i));

  CESolve out;
  out.null_dim = static_cast<int>(m);
  out.null_basis.resize(k, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < k; ++i)
      out.null_basis(i, j) = nearest_double(kernel[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
    out.null_basis.col(j) /= out.null_basis.col(j).cwiseAbs().maxCoeff();
  }
  if (m > 0) out.null_basis = Eigen::HouseholderQR<Eigen::MatrixXd>(out.null_basis).householderQ() * Eigen::MatrixXd::Identity(k, m);

  // conditioning on the range of T^T
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  const double smin = sv(k - 1 - m);
  out.cond = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(out.cond <= opts.cond_limit))
    throw NumericalError("ce_solve", "CE matrix condition number " + std::to_string(out.cond) + " exceeds " +
                                         std::to_string(opts.cond_limit));

  // least squares on [A; N^T] x = [b; 0]: the particular solution orthogonal to the kernel
  Eigen::MatrixXd aug(k + m, k);
  aug << a, out.null_basis.transpose();
  Eigen::VectorXd rhs(k + m);
  rhs << b, Eigen::VectorXd::Zero(m);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aug);
  out.x = qr.solve(rhs);

  std::vector<Rational> se;
  if (s_exact) {
    se = *s_exact;
  } else {
    for (Eigen::Index i = 0; i < k; ++i) se.push_back(exact(s(i)));
  }
  const double s_norm = std::max(rational_norm(se), std::numeric_limits<double>::min());

  if (out.cond > opts.refine_threshold) {
    out.refined = true;
    bool converged = false;
    for (int it = 0; it < opts.refine_iters && !converged; ++it) {
      const auto res = exact_residual(ce, se, out.x);
      Eigen::VectorXd rb(k + m);
      for (Eigen::Index i = 0; i < k; ++i)
        rb(i) = row_scale(i) * nearest_double(scale_pow2(res[static_cast<std::size_t>(i)], cexp(i)));
      rb.tail(m) = -out.null_basis.transpose() * out.x;
      const Eigen::VectorXd dx = qr.solve(rb);
      out.x += dx;
      out.refine_iters = it + 1;
      converged = dx.norm() <= 4 * std::numeric_limits<double>::epsilon() * out.x.norm();
    }
    if ((!converged || !out.x.allFinite()) && s_exact) {
      // exact tables are consistent, so [T^T; N^T] x = [s; 0] has one solution
      std::vector<Rational> t(static_cast<std::size_t>((k + m) * k));
      std::vector<Rational> rhs_e = se;
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
          t[static_cast<std::size_t>(i * k + j)] = ce.exact(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
      for (Eigen::Index n = 0; n < m; ++n) {
        for (Eigen::Index j = 0; j < k; ++j)
          t[static_cast<std::size_t>((k + n) * k + j)] = kernel[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
        rhs_e.emplace_back(0);
      }
      const auto xe = solve_exact_consistent(std::move(t), std::move(rhs_e), static_cast<std::size_t>(k + m),
                                             static_cast<std::size_t>(k));
      for (Eigen::Index i = 0; i < k; ++i) out.x(i) = nearest_double(xe[static_cast<std::size_t>(i)]);
      out.exact_fallback = true;
    }
  }
  out.relative_residual = rational_norm(exact_residual(ce, se, out.x)) / s_norm;
  return out;
}

namespace {

// || (I - N N^T) (pvector(beta, P) - p0) || plus a penalty keeping |P_b| <= 1
struct ConsistencyFunctor : Eigen::DenseFunctor<double> {
  ConsistencyFunctor(const OddBasis& basis, const Eigen::VectorXd& beta, const Eigen::VectorXd& p0,
                     const Eigen::MatrixXd& proj, double penalty)
      : Eigen::DenseFunctor<double>(basis.r * basis.r, static_cast<int>(basis.size()) + basis.r),
        basis_(basis), beta_(beta), p0_(p0), proj_(proj), penalty_(penalty) {}

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    const int r = basis_.r;
    const Eigen::Map<const Eigen::MatrixXd> P(x.data(), r, r);
    const auto k = static_cast<Eigen::Index>(basis_.size());
    f.resize(k + r);
    f.head(k) = proj_ * (pvector_from_overlap(basis_, beta_, P) - p0_);
    for (int b = 0; b < r; ++b) f(k + b) = penalty_ * std::max(0.0, P.col(b).squaredNorm() - 1.0);
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    const int r = basis_.r;
    const Eigen::Map<const Eigen::MatrixXd> P(x.data(), r, r);
    const auto k = static_cast<Eigen::Index>(basis_.size());
    j = Eigen::MatrixXd::Zero(k + r, r * r);
    j.topRows(k) = proj_ * pvector_jacobian(basis_, beta_, P);
    for (int b = 0; b < r; ++b)
      if (P.col(b).squaredNorm() > 1.0)
        for (int y = 0; y < r; ++y) j(k + b, y + r * b) = penalty_ * 2.0 * P(y, b);
    return 0;
  }

  const OddBasis& basis_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd p0_;
  Eigen::MatrixXd proj_;
  double penalty_;
};

struct Assignment {
  Eigen::MatrixXd P;
  double best = 0.0;
  double margin = 0.0;
};

// Assigns decomposition components to columns by the linear-part score.
Assignment assign_components(const std::vector<Eigen::VectorXd>& u, const Eigen::VectorXd& beta,
                             const Eigen::VectorXd& q, int r, double tie_tol, Pair pair) {
  const int rank = static_cast<int>(u.size());
  std::vector<int> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm;
  std::vector<int> prev_prefix;
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> prefix(perm.begin(), perm.begin() + rank);
    if (prefix == prev_prefix) continue;
    prev_prefix = prefix;
    Eigen::VectorXd acc = -q;
    for (int m = 0; m < rank; ++m) {
      const double bm = beta(prefix[static_cast<std::size_t>(m)]);
      acc += std::cbrt(bm * bm) * u[static_cast<std::size_t>(m)];
    }
    const double score = acc.norm();
    if (score < best) {
      second = best;
      best = score;
      best_perm = prefix;
    } else if (score < second) {
      second = score;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  Assignment out;
  out.best = best;
  out.margin = second - best;
  if (out.margin / (1.0 + q.norm()) < tie_tol)
    throw NumericalError("assignment", "pair " + pair_name(pair) + ": ambiguous column assignment (margin " +
                                           std::to_string(out.margin) + ")");
  out.P = Eigen::MatrixXd::Zero(r, r);
  for (int m = 0; m < rank; ++m) {
    const int col = best_perm[static_cast<std::size_t>(m)];
    out.P.col(col) = u[static_cast<std::size_t>(m)] / std::cbrt(beta(col));
  }
  return out;
}

}  // namespace

OverlapRecovery recover_overlaps(const MomentTable& table, const std::vector<double>& alpha_i,
                                 const std::vector<double>& alpha_j, Pair pair, const RecoveryOptions& opts,
                                 const CEMatrix* ce_in) {
  const int r = table.r;
  const int p = table.p;
  if (static_cast<int>(alpha_i.size()) != r || static_cast<int>(alpha_j.size()) != r)
    throw ValidationError("overlap recovery needs r weights per component");
  auto it = table.inter.find(pair);
  if (it == table.inter.end()) throw ValidationError("missing joint moments for pair " + pair_name(pair));
  if (static_cast<int>(it->second.size()) != table.K)
    throw ValidationError("pair " + pair_name(pair) + " has the wrong number of joint moments");

  std::optional<CEMatrix> owned;
  if (!ce_in) owned = build_ce_matrix(std::span<const double>(alpha_i), p, opts.term_cap);
  const CEMatrix& ce = ce_in ? *ce_in : *owned;

  OverlapRecovery out;
  out.pair = pair;
  const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(it->second.data(), table.K);
  const std::vector<Rational>* s_exact = nullptr;
  if (auto ex = table.inter_exact.find(pair); ex != table.inter_exact.end()) s_exact = &ex->second;
  out.ce = solve_ce(ce, s, s_exact, opts);
  out.pvector = decode_pvector(ce.basis(), out.ce.x);
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(alpha_j.data(), r);
  const std::uint64_t pair_seed =
      derive_seed(opts.seed, SeedStream::Recovery, static_cast<std::uint64_t>(pair.first * table.D + pair.second));

  out.P = Eigen::MatrixXd::Zero(r, r);
  out.margin = std::numeric_limits<double>::infinity();
  if (p == 1) {
    // only sum_b beta_b P_b is visible
    if (r != 1) throw ValidationError("p = 1 identifies overlaps only for r = 1");
    out.P(0, 0) = out.pvector.linear(0) / beta(0);
    out.tensor_rank = 1;
  } else if (out.ce.x.norm() < opts.zero_tol * beta.cwiseAbs().sum()) {
    out.zero_tensor = true;
  } else {
    // decomposition of the decoded tensor
    std::optional<Assignment> decoded;
    try {
      const SymTensor3d& t = out.pvector.tensor;
      Eigen::MatrixXd unfold(r, r * r);
      for (int x = 0; x < r; ++x)
        for (int y = 0; y < r; ++y)
          for (int z = 0; z < r; ++z) unfold(x, y * r + z) = t(x, y, z);
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(unfold).singularValues();
      int rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > opts.tensor_rank_tol * sv(0)) ++rank;
      out.tensor_rank = rank;
      const DecompResult dec = jennrich(t, rank, pair_seed, opts.jennrich);
      out.jennrich_residual = dec.relative_residual;
      std::vector<Eigen::VectorXd> u;
      for (const auto& c : dec.components) u.push_back(std::cbrt(c.weight) * c.vector);
      decoded = assign_components(u, beta, out.pvector.linear, r, opts.tie_tol, pair);
    } catch (const Error& e) {
      if (out.ce.null_dim == 0) throw;
      out.notes.push_back(std::string("decomposition of the minimum-norm tensor failed: ") + e.what());
    }

    if (out.ce.null_dim == 0) {
      out.P = decoded->P;
      out.best_score = decoded->best;
      out.margin = decoded->margin;
    } else {
      // The kernel directions of T^T leave the p-vector undetermined along
      // out.ce.null_basis; pick the overlap matrix whose p-vector matches
      // out.ce.x off the kernel.
      const auto k = static_cast<Eigen::Index>(ce.size());
      const Eigen::MatrixXd proj =
          Eigen::MatrixXd::Identity(k, k) - out.ce.null_basis * out.ce.null_basis.transpose();
      const double scale = std::max(out.ce.x.norm(), std::numeric_limits<double>::min());
      ConsistencyFunctor fn(ce.basis(), beta, out.ce.x, proj, scale);

      std::vector<Eigen::MatrixXd> starts;
      if (decoded) starts.push_back(decoded->P.cwiseMax(-1.0).cwiseMin(1.0));
      for (int n = 0; n < opts.consistency_starts; ++n) {
        const Eigen::MatrixXd o = haar_orthogonal_block(r + 1, r + 1, derive_seed(pair_seed, static_cast<std::uint64_t>(n)));
        starts.push_back(o.topLeftCorner(r, r));
      }
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXd best_x;
      int used = 0;
      for (const auto& st : starts) {
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(st.data(), r * r);
        Eigen::LevenbergMarquardt<ConsistencyFunctor> lm(fn);
        lm.setXtol(1e-15);
        lm.setFtol(1e-15);
        lm.setGtol(0.0);
        lm.setMaxfev(400);
        lm.minimize(x);
        Eigen::VectorXd f;
        fn(x, f);
        const double res = f.norm() / scale;
        ++used;
        if (res < best) {
          best = res;
          best_x = x;
        }
        if (best < opts.consistency_tol) break;
      }
      out.consistency_residual = best;
      out.consistency_starts_used = used;
      out.P = Eigen::Map<const Eigen::MatrixXd>(best_x.data(), r, r);

      // assignment margin of the final decomposition
      std::vector<Eigen::VectorXd> u;
      for (int b = 0; b < r; ++b) u.push_back(std::cbrt(beta(b)) * out.P.col(b));
      const Eigen::VectorXd q = out.P * beta;
      try {
        const Assignment fin = assign_components(u, beta, q, r, opts.tie_tol, pair);
        out.best_score = fin.best;
        out.margin = fin.margin;
      } catch (const Error&) {
        out.margin = 0.0;
        throw;
      }
    }
  }

  for (Eigen::Index i = 0; i < out.P.size(); ++i) {
    double& v = out.P.data()[i];
    if (v > 1.0 || v < -1.0) {
      v = std::clamp(v, -1.0, 1.0);
      ++out.clamped_entries;
    }
  }
  for (int b = 0; b < r; ++b)
    if (out.P.col(b).squaredNorm() > 1.0) ++out.clamped_q;
  return out;
}

GramEstimate assemble_gram(const std::map<Pair, Eigen::MatrixXd>& overlaps, int D, int r) {
  GramEstimate g;
  g.D = D;
  g.r = r;
  g.matrix = Eigen::MatrixXd::Identity(D * r, D * r);
  for (int i = 0; i < D; ++i)
    for (int j = i + 1; j < D; ++j) {
      auto ij = overlaps.find({i, j});
      auto ji = overlaps.find({j, i});
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(r, r);
      if (ij != overlaps.end() && ji != overlaps.end()) {
        block = (ij->second + ji->second.transpose()) / 2.0;
        g.symmetrization_residual = std::max(g.symmetrization_residual, (ij->second - ji->second.transpose()).norm());
      } else if (ij != overlaps.end()) {
        block = ij->second;
      } else if (ji != overlaps.end()) {
        block = ji->second.transpose();
      }
      g.matrix.block(i * r, j * r, r, r) = block;
      g.matrix.block(j * r, i * r, r, r) = block.transpose();
    }
  return g;
}

GramFactor factor_gram(const GramEstimate& gram, int d, const RecoveryOptions& opts) {
  const auto n = gram.matrix.rows();
  if (d < 1) throw ValidationError("latent dimension must be positive");
  if (d < gram.r) throw ValidationError("latent dimension d must be at least r");
  const auto eig = sym_eig(gram.matrix);
  GramFactor f;
  f.eigenvalues = eig.values;
  f.psd_defect = std::max(0.0, -eig.values(n - 1));
  const double top = std::max(eig.values(0), 0.0);
  f.rank_excess = (n > d && top > 0) ? std::max(0.0, eig.values(d)) / top : 0.0;
  if (f.rank_excess > opts.gram_rank_tol)
    throw NumericalError("factor_gram", "Gram rank exceeds d = " + std::to_string(d) + " (lambda_{d+1}/lambda_1 = " +
                                            std::to_string(f.rank_excess) + ")");
  const Eigen::Index keep = std::min<Eigen::Index>(d, n);
  f.stack = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index c = 0; c < keep; ++c)
    f.stack.col(c) = eig.vectors.col(c) * std::sqrt(std::max(0.0, eig.values(c)));
  f.raw_residual = (f.stack * f.stack.transpose() - gram.matrix).norm();

  // nearest orthonormal frame per component block
  for (int k = 0; k < gram.D; ++k) {
    const Eigen::MatrixXd block = f.stack.middleRows(k * gram.r, gram.r);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f.stack.middleRows(k * gram.r, gram.r) = svd.matrixU() * svd.matrixV().transpose();
  }
  f.projected_residual = (f.stack * f.stack.transpose() - gram.matrix).norm();
  return f;
}

RecoveryReport recover_full(const MomentTable& table, int d, const RecoveryOptions& opts) {
  table.validate();
  const int D = table.D;
  const int r = table.r;
  if (d < r) throw ValidationError("latent dimension d = " + std::to_string(d) + " is below r = " + std::to_string(r));

  RecoveryReport rep;
  if (d == r) rep.flags.push_back("d_equals_r: no residual latent direction, Q_b = 0 forced");

  // weights
  std::vector<std::optional<WeightRecovery>> weights(static_cast<std::size_t>(D));
  std::vector<std::exception_ptr> werr(static_cast<std::size_t>(D));
  parallel_for(static_cast<std::size_t>(D), opts.threads, [&](std::size_t k) {
    try {
      weights[k] = recover_weights(table, static_cast<int>(k), opts);
    } catch (...) {
      werr[k] = std::current_exception();
    }
  });
  for (int k = 0; k < D; ++k) {
    if (werr[static_cast<std::size_t>(k)]) {
      try {
        std::rethrow_exception(werr[static_cast<std::size_t>(k)]);
      } catch (const Error& e) {
        if (opts.strict) throw;
        rep.failures.push_back({"weights", e.what()});
      }
    } else {
      rep.weights.push_back(*weights[static_cast<std::size_t>(k)]);
    }
  }

  // overlaps
  std::map<Pair, Eigen::MatrixXd> overlap_map;
  if (D > 1) {
    std::vector<std::optional<CEMatrix>> ce(static_cast<std::size_t>(D));
    std::vector<std::exception_ptr> cerr(static_cast<std::size_t>(D));
    parallel_for(static_cast<std::size_t>(D), opts.threads, [&](std::size_t k) {
      if (!weights[k]) return;
      try {
        ce[k] = build_ce_matrix(std::span<const double>(weights[k]->alpha), table.p, opts.term_cap);
      } catch (...) {
        cerr[k] = std::current_exception();
      }
    });
    for (int k = 0; k < D; ++k)
      if (cerr[static_cast<std::size_t>(k)]) {
        try {
          std::rethrow_exception(cerr[static_cast<std::size_t>(k)]);
        } catch (const Error& e) {
          if (opts.strict) throw;
          rep.failures.push_back({"ce_matrix", e.what()});
        }
      }

    std::vector<Pair> pairs;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        if (i != j && ce[static_cast<std::size_t>(i)] && weights[static_cast<std::size_t>(j)]) pairs.emplace_back(i, j);
    std::vector<std::optional<OverlapRecovery>> ov(pairs.size());
    std::vector<std::exception_ptr> oerr(pairs.size());
    parallel_for(pairs.size(), opts.threads, [&](std::size_t n) {
      const auto [i, j] = pairs[n];
      try {
        ov[n] = recover_overlaps(table, weights[static_cast<std::size_t>(i)]->alpha,
                                 weights[static_cast<std::size_t>(j)]->alpha, pairs[n], opts,
                                 &*ce[static_cast<std::size_t>(i)]);
      } catch (...) {
        oerr[n] = std::current_exception();
      }
    });
    for (std::size_t n = 0; n < pairs.size(); ++n) {
      if (oerr[n]) {
        try {
          std::rethrow_exception(oerr[n]);
        } catch (const Error& e) {
          if (opts.strict) throw;
          rep.failures.push_back({"overlaps", "pair " + pair_name(pairs[n]) + ": " + e.what()});
        }
      } else {
        overlap_map[pairs[n]] = ov[n]->P;
        rep.overlaps.push_back(std::move(*ov[n]));
      }
    }
  }

  // learner
  GeneratorSpec learner;
  learner.D = D;
  learner.d = d;
  learner.r = r;
  learner.p = table.p;
  learner.alpha = Eigen::MatrixXd::Constant(D, r, std::numeric_limits<double>::quiet_NaN());
  for (const auto& w : rep.weights)
    learner.alpha.row(w.component) = Eigen::Map<const Eigen::RowVectorXd>(w.alpha.data(), r);

  if (D == 1) {
    rep.flags.push_back("single_component: directions unidentifiable, canonical frame e_1..e_r used");
    learner.V.push_back(Eigen::MatrixXd::Identity(r, d));
    rep.gram = assemble_gram({}, 1, r);
  } else {
    rep.gram = assemble_gram(overlap_map, D, r);
    try {
      rep.factor = factor_gram(*rep.gram, d, opts);
      for (int k = 0; k < D; ++k) learner.V.push_back(rep.factor->stack.middleRows(k * r, r));
    } catch (const Error& e) {
      if (opts.strict) throw;
      rep.failures.push_back({"factor_gram", e.what()});
    }
  }
  rep.learner = std::move(learner);

  if (table.target && rep.learner.alpha.allFinite() && static_cast<int>(rep.learner.V.size()) == D) {
    const auto& t = *table.target;
    if (t.D == D && t.r == r && t.p == table.p && t.d == d) rep.metrics = parameter_distance(rep.learner, t);
  }
  return rep;
}

}  // namespace momgen
