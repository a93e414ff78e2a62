#include "momgen/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "momgen/error.hpp"
#include "momgen/parallel.hpp"
#include "momgen/random.hpp"

namespace momgen {

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x;
  return os.str();
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double finite_or_inf(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::infinity(); }

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  for (double& x : v)
    if (std::isnan(x)) x = std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  return std::isinf(a) || std::isinf(b) ? std::max(a, b) : 0.5 * (a + b);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope needs at least two points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i]))
      throw NumericalError("sweep", "log-log slope needs positive finite values");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ValidationError("slope needs at least two distinct N");
  return sxy / sxx;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.mode != Mode::Empirical) throw ValidationError("sweep requires empirical mode");
  std::vector<std::uint64_t> ns = config.N;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  SweepResult out;
  out.rows.resize(ns.size() * config.seeds.size());
  // cells run concurrently, so each one is single-threaded inside
  parallel_for(out.rows.size(), config.sampling.threads, [&](std::size_t cell) {
    SweepRow& row = out.rows[cell];
    row.N = ns[cell / config.seeds.size()];
    row.seed = config.seeds[cell % config.seeds.size()];
    const std::uint64_t master = derive_seed(config.seed, SeedStream::Sweep, row.seed);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.weight_error = row.gram_distance = row.sliced_w1 = nan;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const GeneratorSpec target = synthesize_target(config.target, master);
      SamplingOptions so = config.sampling;
      so.threads = 1;
      const MomentTable table = empirical_moment_table(target, row.N, master, so);
      RecoveryOptions ro = config.recovery;
      ro.seed = master;
      ro.strict = false;
      ro.threads = 1;
      ro.term_cap = config.term_cap;
      const RecoveryReport rep = recover_full(table, config.target.d, ro);
      for (const auto& f : rep.failures) row.failures += (row.failures.empty() ? "" : "; ") + f.stage + ": " + f.what;
      if (rep.metrics) {
        row.weight_error = rep.metrics->weight_error;
        row.gram_distance = rep.metrics->gram_distance;
      } else if (static_cast<int>(rep.weights.size()) == target.D) {
        // overlaps failed but every weight came back; same metric as parameter_distance
        row.weight_error = 0.0;
        for (const auto& w : rep.weights) {
          std::vector<double> truth;
          for (int i = 0; i < target.r; ++i) truth.push_back(target.alpha(w.component, i));
          std::sort(truth.begin(), truth.end());
          double sq = 0.0;
          for (std::size_t i = 0; i < truth.size(); ++i) sq += (w.alpha[i] - truth[i]) * (w.alpha[i] - truth[i]);
          row.weight_error = std::max(row.weight_error, std::sqrt(sq));
        }
      }
      if (rep.ok())
        row.sliced_w1 = sliced_w1(rep.learner, target, config.eval_samples, config.eval_directions, master).value;
    } catch (const Error& e) {
      row.failures += (row.failures.empty() ? "" : "; ") + std::string(e.what());
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  std::vector<double> xs, ys;
  for (std::size_t n = 0; n < ns.size(); ++n) {
    SweepLevel lvl;
    lvl.N = ns[n];
    std::vector<double> w, g, s;
    for (std::size_t k = 0; k < config.seeds.size(); ++k) {
      const SweepRow& row = out.rows[n * config.seeds.size() + k];
      w.push_back(finite_or_inf(row.weight_error));
      g.push_back(finite_or_inf(row.gram_distance));
      s.push_back(finite_or_inf(row.sliced_w1));
      if (!row.failures.empty()) ++lvl.failed_runs;
    }
    lvl.median_weight_error = median(w);
    lvl.median_gram_distance = median(g);
    lvl.median_sliced_w1 = median(s);
    xs.push_back(static_cast<double>(lvl.N));
    ys.push_back(lvl.median_weight_error);
    out.levels.push_back(lvl);
  }
  if (ns.size() < 2) {
    out.slope_note = "needs at least two distinct N";
  } else if (!std::all_of(ys.begin(), ys.end(), [](double y) { return std::isfinite(y) && y > 0.0; })) {
    out.slope_note = "median weight error not finite and positive at every N";
  } else {
    out.slope = loglog_slope(xs, ys);
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "row,N,seed,weight_error,gram_distance,sliced_w1,wall_time,failures\n";
  for (const auto& r : result.rows)
    os << "run," << r.N << ',' << r.seed << ',' << fmt(r.weight_error) << ',' << fmt(r.gram_distance) << ','
       << fmt(r.sliced_w1) << ',' << fmt(r.wall_time) << ',' << quoted(r.failures) << '\n';
  for (const auto& l : result.levels)
    os << "median," << l.N << ",," << fmt(l.median_weight_error) << ',' << fmt(l.median_gram_distance) << ','
       << fmt(l.median_sliced_w1) << ",," << (l.failed_runs ? std::to_string(l.failed_runs) + " failed runs" : "")
       << '\n';
  os << "slope,,," << (result.slope ? fmt(*result.slope) : "n/a") << ",,,," << quoted(result.slope_note) << '\n';
  return os.str();
}

}  // namespace momgen
