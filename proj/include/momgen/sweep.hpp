#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "momgen/config.hpp"

namespace momgen {

struct SweepRow {
  std::uint64_t N = 0;
  std::uint64_t seed = 0;  // entry of the config seed list
  double weight_error = 0.0;
  double gram_distance = 0.0;
  double sliced_w1 = 0.0;
  double wall_time = 0.0;  // seconds for sampling plus recovery
  std::string failures;    // empty when every stage succeeded
};

struct SweepLevel {
  std::uint64_t N = 0;
  double median_weight_error = 0.0;
  double median_gram_distance = 0.0;
  double median_sliced_w1 = 0.0;
  int failed_runs = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;      // N-major, then seed
  std::vector<SweepLevel> levels;  // ascending N
  std::optional<double> slope;     // log-log slope of median weight error vs N
  std::string slope_note;          // why the slope is missing
};

/// Per seed s the run uses master seed derive_seed(config.seed, Sweep, s):
/// one target per seed shared by every N, moments from that seed's stream so
/// smaller N are prefixes of larger ones. Failed runs count as +inf in the
/// medians; a run whose weights all decode keeps its weight error even when a
/// later stage fails.
SweepResult run_sweep(const ExperimentConfig& config);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Median with NaN treated as +inf.
double median(std::vector<double> v);

/// Columns row,N,seed,weight_error,gram_distance,sliced_w1,wall_time,failures.
/// "run" rows first, then one "median" row per N, then the "slope" row (slope
/// in the weight_error column, "n/a" with the reason when not applicable).
std::string sweep_csv(const SweepResult& result);

}  // namespace momgen
