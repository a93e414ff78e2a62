#pragma once

#include <span>
#include <string>
#include <vector>

#include "momgen/rational.hpp"

namespace momgen {

/// F[1..r] with F[n] = sum_i y_i^n, y_i = alpha_i^2. Indexed from 1.
template <typename Scalar>
struct PowerSums {
  std::vector<Scalar> values;

  int size() const { return static_cast<int>(values.size()); }
  const Scalar& operator()(int n) const { return values.at(static_cast<std::size_t>(n - 1)); }
  Scalar& operator()(int n) { return values.at(static_cast<std::size_t>(n - 1)); }
};

/// One term of the expansion E[(sum_i a_i w_i^p)^{2n}] = sum multiplier * F[partition].
struct PartitionCoeff {
  std::vector<int> partition;  // weakly increasing, sums to n
  Rational multiplier;
};

/// Integer partitions of n into at most max_parts parts, each weakly increasing;
/// ordered by number of parts, then lexicographically.
std::vector<std::vector<int>> integer_partitions(int n, int max_parts);

/// (2n)! * prod (2p a_k - 1)!! / (2 a_k)! / prod_t (#t)!  for every partition of n.
std::vector<PartitionCoeff> moment_expansion_coeffs(int n, int r, int p);

/// Distinct-index symmetric sum F[a_1..a_t] expressed through power sums
/// (signed set-partition formula). Requires F populated up to sum(a).
template <typename Scalar>
Scalar f_value(std::span<const int> partition, const PowerSums<Scalar>& F);

/// Coefficient of F[n] once every F[a..] is reduced to power sums.
struct SCoefficient {
  Rational value;         // S_n
  Rational leading;       // T_1 = (2pn-1)!!/(2n)!
  Rational others_abs;    // sum_{j>=2} |T_j|
};

SCoefficient s_coefficient_terms(int n, int p);

/// S_n; throws NumericalError when it vanishes for the requested degree.
Rational s_coefficient(int n, int p);

/// Even moments M^2, M^4, ..., M^{2r} -> F[1..r], solved in increasing order.
template <typename Scalar>
PowerSums<Scalar> moments_to_power_sums(std::span<const Scalar> moments, int r, int p);

struct RootOptions {
  double complex_tol = 1e-6;   // scaled by max(1, |e|_inf)
  double negative_tol = 1e-6;  // scaled by max(1, |y|_inf)
};

struct WeightSolution {
  std::vector<double> alpha;       // ascending
  std::vector<double> y;           // alpha^2, ascending
  std::vector<double> elementary;  // e_1..e_r
  double max_imag = 0.0;
  std::vector<std::string> warnings;
};

/// Newton identities -> monic polynomial -> companion eigenvalues -> sqrt.
WeightSolution power_sums_to_weights(const PowerSums<double>& F, const RootOptions& opts = {});

}  // namespace momgen
