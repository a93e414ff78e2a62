#include "momgen/symmetric_functions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include "momgen/error.hpp"

namespace momgen {

namespace {

void partitions_rec(int remaining, int min_part, int parts_left, std::vector<int>& cur,
                    std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  if (parts_left == 0) return;
  for (int a = min_part; a <= remaining; ++a) {
    // the rest must still fit with parts >= a
    if (a != remaining && remaining - a < a) continue;
    cur.push_back(a);
    partitions_rec(remaining - a, a, parts_left - 1, cur, out);
    cur.pop_back();
  }
}

/// Calls fn(blocks) for every set partition of {0..t-1}.
template <typename Fn>
void set_partitions_rec(int i, int t, std::vector<std::vector<int>>& blocks, Fn& fn) {
  if (i == t) {
    fn(blocks);
    return;
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    blocks[k].push_back(i);
    set_partitions_rec(i + 1, t, blocks, fn);
    blocks[k].pop_back();
  }
  blocks.push_back({i});
  set_partitions_rec(i + 1, t, blocks, fn);
  blocks.pop_back();
}

template <typename Fn>
void for_each_set_partition(int t, Fn&& fn) {
  std::vector<std::vector<int>> blocks;
  set_partitions_rec(0, t, blocks, fn);
}

Rational partition_multiplier(const std::vector<int>& a, int n, int p) {
  Rational m(factorial(static_cast<unsigned long>(2 * n)));
  std::map<int, int> counts;
  for (int ak : a) {
    m *= Rational(double_factorial(static_cast<unsigned long>(2 * p * ak - 1)));
    m /= Rational(factorial(static_cast<unsigned long>(2 * ak)));
    ++counts[ak];
  }
  for (const auto& [part, c] : counts) m /= Rational(factorial(static_cast<unsigned long>(c)));
  m.canonicalize();
  return m;
}

}  // namespace

std::vector<std::vector<int>> integer_partitions(int n, int max_parts) {
  std::vector<std::vector<int>> out;
  if (n <= 0) return out;
  std::vector<int> cur;
  partitions_rec(n, 1, max_parts, cur, out);
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });
  return out;
}

std::vector<PartitionCoeff> moment_expansion_coeffs(int n, int r, int p) {
  if (n < 1 || r < 1 || p < 1 || p % 2 == 0)
    throw ValidationError("moment_expansion_coeffs needs n, r >= 1 and odd p");
  std::vector<PartitionCoeff> out;
  for (auto& a : integer_partitions(n, r)) {
    Rational m = partition_multiplier(a, n, p);
    out.push_back({std::move(a), std::move(m)});
  }
  return out;
}

template <typename Scalar>
Scalar f_value(std::span<const int> partition, const PowerSums<Scalar>& F) {
  const int t = static_cast<int>(partition.size());
  if (t == 0) return Scalar(1);
  Scalar total(0);
  for_each_set_partition(t, [&](const std::vector<std::vector<int>>& blocks) {
    const int k = static_cast<int>(blocks.size());
    Scalar term(1);
    long long weight = 1;
    for (const auto& b : blocks) {
      int s = 0;
      for (int idx : b) s += partition[static_cast<std::size_t>(idx)];
      term *= F(s);
      for (int f = 2; f < static_cast<int>(b.size()); ++f) weight *= f;
    }
    if ((t - k) % 2 != 0) weight = -weight;
    total += Scalar(static_cast<double>(weight)) * term;
  });
  return total;
}

template double f_value<double>(std::span<const int>, const PowerSums<double>&);
template Rational f_value<Rational>(std::span<const int>, const PowerSums<Rational>&);

SCoefficient s_coefficient_terms(int n, int p) {
  if (n < 1) throw ValidationError("s_coefficient needs n >= 1");
  SCoefficient out{Rational(0), Rational(0), Rational(0)};
  const Rational two_n_fact(factorial(static_cast<unsigned long>(2 * n)));
  // T_j groups all partitions into j parts (the (2n)! factor is divided out).
  std::map<std::size_t, Rational> by_parts;
  for (const auto& pc : moment_expansion_coeffs(n, n, p)) {
    const std::size_t j = pc.partition.size();
    Rational sign_fact(factorial(static_cast<unsigned long>(j - 1)));
    if ((j - 1) % 2 != 0) sign_fact = -sign_fact;
    const Rational contrib = sign_fact * pc.multiplier;
    out.value += contrib;
    by_parts[j] += contrib / two_n_fact;
  }
  out.leading = by_parts[1];
  for (const auto& [j, tj] : by_parts)
    if (j >= 2) out.others_abs += abs(tj);
  out.value.canonicalize();
  return out;
}

Rational s_coefficient(int n, int p) {
  Rational s = s_coefficient_terms(n, p).value;
  if (s == 0)
    throw NumericalError("intra", "S_" + std::to_string(n) + " vanishes for activation degree " +
                                      std::to_string(p));
  return s;
}

template <typename Scalar>
PowerSums<Scalar> moments_to_power_sums(std::span<const Scalar> moments, int r, int p) {
  if (static_cast<int>(moments.size()) != r)
    throw ValidationError("expected " + std::to_string(r) + " even moments, got " +
                          std::to_string(moments.size()));
  PowerSums<Scalar> F{std::vector<Scalar>(static_cast<std::size_t>(r), Scalar(0))};
  for (int n = 1; n <= r; ++n) {
    // With F[n] held at zero every partition evaluates to its lower-order part.
    F(n) = Scalar(0);
    Scalar rest(0);
    for (const auto& pc : moment_expansion_coeffs(n, r, p))
      rest += rational_cast<Scalar>(pc.multiplier) * f_value<Scalar>(pc.partition, F);
    const Scalar s = rational_cast<Scalar>(s_coefficient(n, p));
    F(n) = (moments[static_cast<std::size_t>(n - 1)] - rest) / s;
  }
  return F;
}

template PowerSums<double> moments_to_power_sums<double>(std::span<const double>, int, int);
template PowerSums<Rational> moments_to_power_sums<Rational>(std::span<const Rational>, int,
                                                             int);

WeightSolution power_sums_to_weights(const PowerSums<double>& F, const RootOptions& opts) {
  const int r = F.size();
  if (r < 1) throw ValidationError("empty power-sum list");
  WeightSolution out;

  // Newton: k e_k = sum_{i=1}^k (-1)^{i-1} e_{k-i} p_i
  std::vector<double> e(static_cast<std::size_t>(r + 1), 0.0);
  e[0] = 1.0;
  for (int k = 1; k <= r; ++k) {
    double acc = 0.0;
    for (int i = 1; i <= k; ++i) {
      const double term = e[static_cast<std::size_t>(k - i)] * F(i);
      acc += (i % 2 == 1) ? term : -term;
    }
    e[static_cast<std::size_t>(k)] = acc / k;
  }
  out.elementary.assign(e.begin() + 1, e.end());
  double e_inf = 0.0;
  for (int k = 1; k <= r; ++k) e_inf = std::max(e_inf, std::abs(e[static_cast<std::size_t>(k)]));

  // t^r + c_{r-1} t^{r-1} + ... + c_0 with c_{r-k} = (-1)^k e_k
  std::vector<double> c(static_cast<std::size_t>(r));
  for (int k = 1; k <= r; ++k)
    c[static_cast<std::size_t>(r - k)] = (k % 2 == 0 ? 1.0 : -1.0) * e[static_cast<std::size_t>(k)];

  std::vector<double> roots;
  if (r == 1) {
    roots.push_back(-c[0]);
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(r, r);
    for (int i = 1; i < r; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < r; ++i) comp(i, r - 1) = -c[static_cast<std::size_t>(i)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalError("intra", "companion eigensolver failed");
    const double imag_tol = opts.complex_tol * std::max(1.0, e_inf);
    for (int i = 0; i < r; ++i) {
      const std::complex<double> z = es.eigenvalues()(i);
      out.max_imag = std::max(out.max_imag, std::abs(z.imag()));
      if (std::abs(z.imag()) > imag_tol)
        throw NumericalError("intra", "power sums give complex roots (|Im| = " +
                                          std::to_string(std::abs(z.imag())) +
                                          "); moments too noisy");
      roots.push_back(z.real());
    }
  }

  // One Newton polish step per root, kept only if it lowers the residual.
  auto eval = [&](double t, double& deriv) {
    double f = 1.0;
    deriv = 0.0;
    for (int i = r - 1; i >= 0; --i) {
      deriv = deriv * t + f;
      f = f * t + c[static_cast<std::size_t>(i)];
    }
    return f;
  };
  for (double& t : roots) {
    double d = 0.0;
    const double f = eval(t, d);
    if (d == 0.0 || !std::isfinite(f / d)) continue;
    const double cand = t - f / d;
    double d2 = 0.0;
    if (std::abs(eval(cand, d2)) < std::abs(f)) t = cand;
  }

  std::sort(roots.begin(), roots.end());
  double y_inf = 0.0;
  for (double t : roots) y_inf = std::max(y_inf, std::abs(t));
  const double neg_tol = opts.negative_tol * std::max(1.0, y_inf);
  for (double& t : roots) {
    if (t < -neg_tol)
      throw NumericalError("intra", "negative squared weight " + std::to_string(t));
    if (t < 0.0) {
      out.warnings.push_back("clamped squared weight " + std::to_string(t) + " to 0");
      t = 0.0;
    }
  }
  out.y = roots;
  for (double t : roots) out.alpha.push_back(std::sqrt(t));
  return out;
}

}  // namespace momgen
