#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "momgen/generator.hpp"
#include "momgen/polynomial.hpp"
#include "momgen/rational.hpp"

namespace momgen {

using Pair = std::pair<int, int>;

/// Even intra-component moments and odd joint moments of a D-output generator.
///
/// intra[k][n-1] = E[G_k^{2n}], n = 1..r.
/// inter[(i, j)][k-1] = E[G_i^{2k-1} G_j], k = 1..K, for every ordered pair i != j.
struct MomentTable {
  int D = 0;
  int r = 0;
  int p = 3;
  int K = 0;
  std::string source = "empirical";  // or "exact"
  std::uint64_t N = 0;                // 0 for exact tables
  std::uint64_t seed = 0;

  std::vector<std::vector<double>> intra;
  std::vector<std::vector<double>> intra_stderr;
  std::map<Pair, std::vector<double>> inter;
  std::map<Pair, std::vector<double>> inter_stderr;

  // exact tables also keep the rational values
  std::vector<std::vector<Rational>> intra_exact;
  std::map<Pair, std::vector<Rational>> inter_exact;

  // provenance only; recovery never reads it
  std::optional<GeneratorSpec> target;

  bool is_exact() const { return source == "exact"; }

  /// Lengths and completeness; names the first missing component or pair.
  void validate() const;
};

struct SamplingOptions {
  std::uint64_t shard_size = 1 << 14;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// One pass over N latent draws. Shard s draws from derive_seed(seed, Moments, s),
/// so the first N samples are the same for every N and every thread count.
/// Per-shard sums use pairwise summation; shard totals are merged pairwise in
/// shard order.
MomentTable empirical_moment_table(const GeneratorSpec& g, std::uint64_t N, std::uint64_t seed,
                                   const SamplingOptions& opts = {});

/// Infinite-sample table: intra moments from the partition expansion of the
/// true power sums, joint moments as pvector(beta, P) . CE(alpha_i).
MomentTable exact_moment_table(const GeneratorSpec& g, std::size_t term_cap = kDefaultTermCap);

}  // namespace momgen
