#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "momgen/generator.hpp"
#include "momgen/io.hpp"
#include "momgen/moments.hpp"
#include "momgen/recovery.hpp"

namespace momgen {

enum class Mode { Exact, Empirical };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Everything one invocation needs. JSON layout:
///
///   { "target": {D, d, r, p, M, sigma, tau, A, max_redraws},
///     "sampling": {N: [...], seeds: [...], shard_size, threads},
///     "mode": "exact" | "empirical", "seed": u64,
///     "tolerances": {...}, "evaluation": {samples, directions},
///     "ce_check": {trials}, "term_cap": n, "out": dir }
///
/// Every key is optional; unknown keys are rejected.
struct ExperimentConfig {
  SynthesisParams target;
  std::vector<std::uint64_t> N{10000, 100000, 1000000};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  SamplingOptions sampling;
  Mode mode = Mode::Empirical;
  std::uint64_t seed = 0;
  RecoveryOptions recovery;
  std::uint64_t eval_samples = 100000;
  int eval_directions = 32;
  int ce_trials = 8;
  std::size_t term_cap = kDefaultTermCap;
  std::string out = "out";

  /// r <= d, p odd, 0 < tau < A, N entries >= 1, and the rest of the shape rules.
  void validate() const;
};

ExperimentConfig config_from_json(const json& j);
json to_json(const ExperimentConfig& c);

}  // namespace momgen
