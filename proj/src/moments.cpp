#include "momgen/moments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "momgen/ce_matrix.hpp"
#include "momgen/error.hpp"
#include "momgen/parallel.hpp"
#include "momgen/pvector.hpp"
#include "momgen/random.hpp"
#include "momgen/symmetric_functions.hpp"

namespace momgen {

namespace {

double pairwise_sum(const double* x, std::size_t n, std::size_t stride, bool square) {
  if (n <= 64) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[i * stride];
      s += square ? v * v : v;
    }
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half, stride, square) + pairwise_sum(x + half * stride, n - half, stride, square);
}

std::vector<Pair> ordered_pairs(int D) {
  std::vector<Pair> out;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      if (i != j) out.emplace_back(i, j);
  return out;
}

struct ShardSums {
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

}  // namespace

void MomentTable::validate() const {
  if (D < 1 || r < 1) throw ValidationError("moment table: D and r must be positive");
  if (p < 1 || p % 2 == 0) throw ValidationError("moment table: p must be odd");
  if (K != static_cast<int>(odd_basis_size(r, p)))
    throw ValidationError("moment table: K = " + std::to_string(K) + " does not match the basis size " +
                          std::to_string(odd_basis_size(r, p)));
  if (static_cast<int>(intra.size()) != D)
    throw ValidationError("moment table: intra moments for " + std::to_string(intra.size()) + " of " +
                          std::to_string(D) + " components");
  for (int k = 0; k < D; ++k)
    if (static_cast<int>(intra[static_cast<std::size_t>(k)].size()) != r)
      throw ValidationError("moment table: component " + std::to_string(k) + " needs " + std::to_string(r) +
                            " intra moments");
  for (const auto& [i, j] : ordered_pairs(D)) {
    auto it = inter.find({i, j});
    if (it == inter.end())
      throw ValidationError("moment table: missing joint moments for pair (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
    if (static_cast<int>(it->second.size()) != K)
      throw ValidationError("moment table: pair (" + std::to_string(i) + ", " + std::to_string(j) + ") needs " +
                            std::to_string(K) + " joint moments");
  }
  if (!intra_exact.empty() && intra_exact.size() != intra.size())
    throw ValidationError("moment table: exact intra values incomplete");
  if (!inter_exact.empty() && inter_exact.size() != inter.size())
    throw ValidationError("moment table: exact joint values incomplete");
}

MomentTable empirical_moment_table(const GeneratorSpec& g, std::uint64_t N, std::uint64_t seed,
                                   const SamplingOptions& opts) {
  g.validate();
  if (N < 1) throw ValidationError("sample count must be at least 1");
  const int D = g.D;
  const int r = g.r;
  const int K = static_cast<int>(odd_basis_size(r, g.p));
  const auto pairs = ordered_pairs(D);
  const std::size_t nq = static_cast<std::size_t>(D * r) + pairs.size() * static_cast<std::size_t>(K);
  const std::uint64_t shard_size = std::max<std::uint64_t>(1, opts.shard_size);
  const std::uint64_t shards = (N + shard_size - 1) / shard_size;

  std::vector<ShardSums> totals(shards);
  auto run_shard = [&](std::size_t s) {
    const std::uint64_t begin = s * shard_size;
    const auto n = static_cast<Eigen::Index>(std::min(shard_size, N - begin));
    Rng rng(derive_seed(seed, SeedStream::Moments, s));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd omega(g.d, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (int i = 0; i < g.d; ++i) omega(i, c) = normal(rng);
    const Eigen::MatrixXd out = evaluate_batch(g, omega);

    // values(sample, quantity), one contiguous column per quantity
    Eigen::MatrixXd values(n, static_cast<Eigen::Index>(nq));
    std::vector<double> odd(static_cast<std::size_t>(D * K));
    for (Eigen::Index c = 0; c < n; ++c) {
      for (int k = 0; k < D; ++k) {
        const double x = out(k, c);
        const double x2 = x * x;
        double acc = 1.0;
        for (int m = 0; m < r; ++m) {
          acc *= x2;
          values(c, k * r + m) = acc;
        }
        acc = x;
        for (int m = 0; m < K; ++m) {
          odd[static_cast<std::size_t>(k * K + m)] = acc;
          acc *= x2;
        }
      }
      Eigen::Index q = D * r;
      for (const auto& [i, j] : pairs) {
        const double xj = out(j, c);
        for (int m = 0; m < K; ++m) values(c, q++) = odd[static_cast<std::size_t>(i * K + m)] * xj;
      }
    }
    ShardSums sums{std::vector<double>(nq), std::vector<double>(nq)};
    for (std::size_t q = 0; q < nq; ++q) {
      const double* col = values.col(static_cast<Eigen::Index>(q)).data();
      sums.sum[q] = pairwise_sum(col, static_cast<std::size_t>(n), 1, false);
      sums.sum_sq[q] = pairwise_sum(col, static_cast<std::size_t>(n), 1, true);
    }
    totals[s] = std::move(sums);
  };

  parallel_for(static_cast<std::size_t>(shards), opts.threads, run_shard);

  // merge in shard order
  std::vector<double> mean(nq);
  std::vector<double> stderr_(nq);
  std::vector<double> buf(shards);
  std::vector<double> buf_sq(shards);
  const double n = static_cast<double>(N);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::uint64_t s = 0; s < shards; ++s) {
      buf[s] = totals[s].sum[q];
      buf_sq[s] = totals[s].sum_sq[q];
    }
    const double m = pairwise_sum(buf.data(), shards, 1, false) / n;
    const double m2 = pairwise_sum(buf_sq.data(), shards, 1, false) / n;
    mean[q] = m;
    stderr_[q] = N > 1 ? std::sqrt(std::max(0.0, m2 - m * m) / (n - 1.0)) : std::nan("");
  }

  MomentTable t;
  t.D = D;
  t.r = r;
  t.p = g.p;
  t.K = K;
  t.source = "empirical";
  t.N = N;
  t.seed = seed;
  t.intra.assign(static_cast<std::size_t>(D), {});
  t.intra_stderr.assign(static_cast<std::size_t>(D), {});
  for (int k = 0; k < D; ++k)
    for (int m = 0; m < r; ++m) {
      t.intra[static_cast<std::size_t>(k)].push_back(mean[static_cast<std::size_t>(k * r + m)]);
      t.intra_stderr[static_cast<std::size_t>(k)].push_back(stderr_[static_cast<std::size_t>(k * r + m)]);
    }
  std::size_t q = static_cast<std::size_t>(D * r);
  for (const auto& pr : pairs) {
    auto& v = t.inter[pr];
    auto& e = t.inter_stderr[pr];
    for (int m = 0; m < K; ++m, ++q) {
      v.push_back(mean[q]);
      e.push_back(stderr_[q]);
    }
  }
  t.target = g;
  return t;
}

MomentTable exact_moment_table(const GeneratorSpec& g, std::size_t term_cap) {
  g.validate();
  const int D = g.D;
  const int r = g.r;
  MomentTable t;
  t.D = D;
  t.r = r;
  t.p = g.p;
  t.K = static_cast<int>(odd_basis_size(r, g.p));
  t.source = "exact";
  t.N = 0;

  std::vector<std::vector<Rational>> alpha(static_cast<std::size_t>(D));
  for (int k = 0; k < D; ++k)
    for (int i = 0; i < r; ++i) alpha[static_cast<std::size_t>(k)].push_back(exact(g.alpha(k, i)));

  for (int k = 0; k < D; ++k) {
    PowerSums<Rational> F;
    for (int n = 1; n <= r; ++n) {
      Rational s = 0;
      for (const auto& a : alpha[static_cast<std::size_t>(k)]) {
        Rational y = a * a;
        Rational pw = 1;
        for (int m = 0; m < n; ++m) pw *= y;
        s += pw;
      }
      F.values.push_back(s);
    }
    std::vector<Rational> row;
    for (int n = 1; n <= r; ++n) {
      Rational m = 0;
      for (const auto& c : moment_expansion_coeffs(n, r, g.p)) m += c.multiplier * f_value<Rational>(c.partition, F);
      row.push_back(m);
    }
    std::vector<double> rowd;
    for (const auto& v : row) rowd.push_back(nearest_double(v));
    t.intra.push_back(rowd);
    t.intra_stderr.emplace_back(static_cast<std::size_t>(r), 0.0);
    t.intra_exact.push_back(std::move(row));
  }

  if (D > 1) {
    std::vector<CEMatrix> ce;
    for (int k = 0; k < D; ++k) ce.push_back(build_ce_matrix(std::span<const Rational>(alpha[static_cast<std::size_t>(k)]), g.p, term_cap));
    for (const auto& [i, j] : ordered_pairs(D)) {
      const OverlapTruth truth = overlap_truth(g, i, j);
      std::vector<std::vector<Rational>> P(static_cast<std::size_t>(r), std::vector<Rational>(static_cast<std::size_t>(r)));
      for (int x = 0; x < r; ++x)
        for (int b = 0; b < r; ++b) P[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)] = exact(truth.P(x, b));
      const CEMatrix& T = ce[static_cast<std::size_t>(i)];
      const auto pv = pvector_from_overlap<Rational>(T.basis(), alpha[static_cast<std::size_t>(j)], P);
      std::vector<Rational> s(static_cast<std::size_t>(t.K), Rational(0));
      for (std::size_t col = 0; col < static_cast<std::size_t>(t.K); ++col)
        for (std::size_t m = 0; m < pv.size(); ++m) s[col] += pv[m] * T.exact(m, col);
      std::vector<double> sd;
      for (const auto& v : s) sd.push_back(nearest_double(v));
      t.inter[{i, j}] = sd;
      t.inter_stderr[{i, j}] = std::vector<double>(static_cast<std::size_t>(t.K), 0.0);
      t.inter_exact[{i, j}] = std::move(s);
    }
  }
  t.target = g;
  return t;
}

}  // namespace momgen
