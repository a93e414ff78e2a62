#include "momgen/config.hpp"

#include <cmath>
#include <set>

#include "momgen/error.hpp"

namespace momgen {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::Exact ? "exact" : "empirical"; }

Mode parse_mode(const std::string& s) {
  if (s == "exact") return Mode::Exact;
  if (s == "empirical") return Mode::Empirical;
  throw ValidationError("mode must be 'exact' or 'empirical', got '" + s + "'");
}

void ExperimentConfig::validate() const {
  const auto& t = target;
  if (t.D < 1) throw ValidationError("D must be at least 1");
  if (t.r < 1) throw ValidationError("r must be at least 1");
  if (t.d < 1) throw ValidationError("d must be at least 1");
  if (t.r > t.d) throw ValidationError("r = " + std::to_string(t.r) + " exceeds d = " + std::to_string(t.d));
  if (t.p < 1 || t.p % 2 == 0) throw ValidationError("p must be a positive odd integer");
  if (!(t.tau > 0.0)) throw ValidationError("tau must be positive");
  if (!(t.tau < t.A)) throw ValidationError("tau must be below A");
  if (!std::isfinite(t.M) || !(t.sigma >= 0.0) || !std::isfinite(t.sigma))
    throw ValidationError("weight mean and standard deviation must be finite, sigma >= 0");
  if (t.max_redraws < 1) throw ValidationError("max_redraws must be at least 1");
  for (auto n : N)
    if (n < 1) throw ValidationError("every N must be at least 1");
  if (N.empty()) throw ValidationError("N list is empty");
  if (seeds.empty()) throw ValidationError("seed list is empty");
  if (sampling.shard_size < 1) throw ValidationError("shard_size must be at least 1");
  if (eval_samples < 1 || eval_directions < 1) throw ValidationError("evaluation needs samples >= 1 and directions >= 1");
  if (ce_trials < 1) throw ValidationError("ce_check trials must be at least 1");
  const auto& o = recovery;
  for (double v : {o.roots.complex_tol, o.roots.negative_tol, o.refine_threshold, o.cond_limit, o.zero_tol,
                   o.tensor_rank_tol, o.consistency_tol, o.gram_rank_tol, o.jennrich.pd_tol, o.jennrich.gap_tol,
                   o.jennrich.max_relative_residual})
    if (!(v > 0.0)) throw ValidationError("tolerances must be positive");
  if (!(o.tie_tol >= 0.0)) throw ValidationError("tie_tol must be non-negative");
  if (o.refine_iters < 0 || o.consistency_starts < 0 || o.jennrich.max_tries_x < 1 || o.jennrich.y_retries < 1)
    throw ValidationError("iteration counts out of range");
  if (out.empty()) throw ValidationError("output directory is empty");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    reject_unknown(j, {"target", "sampling", "mode", "seed", "tolerances", "evaluation", "ce_check", "term_cap", "out"},
                   "config");
    if (j.contains("target")) {
      const auto& t = j["target"];
      reject_unknown(t, {"D", "d", "r", "p", "M", "sigma", "tau", "A", "max_redraws"}, "target");
      read(t, "D", c.target.D);
      read(t, "d", c.target.d);
      read(t, "r", c.target.r);
      read(t, "p", c.target.p);
      read(t, "M", c.target.M);
      read(t, "sigma", c.target.sigma);
      read(t, "tau", c.target.tau);
      read(t, "A", c.target.A);
      read(t, "max_redraws", c.target.max_redraws);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      reject_unknown(s, {"N", "seeds", "shard_size", "threads"}, "sampling");
      read(s, "N", c.N);
      read(s, "seeds", c.seeds);
      read(s, "shard_size", c.sampling.shard_size);
      read(s, "threads", c.sampling.threads);
    }
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    read(j, "seed", c.seed);
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      reject_unknown(t,
                     {"complex_tol", "negative_tol", "refine_threshold", "cond_limit", "refine_iters", "zero_tol",
                      "tensor_rank_tol", "tie_tol", "consistency_starts", "consistency_tol", "gram_rank_tol",
                      "jennrich_max_tries", "jennrich_y_retries", "jennrich_pd_tol", "jennrich_gap_tol",
                      "jennrich_max_relative_residual"},
                     "tolerances");
      auto& o = c.recovery;
      read(t, "complex_tol", o.roots.complex_tol);
      read(t, "negative_tol", o.roots.negative_tol);
      read(t, "refine_threshold", o.refine_threshold);
      read(t, "cond_limit", o.cond_limit);
      read(t, "refine_iters", o.refine_iters);
      read(t, "zero_tol", o.zero_tol);
      read(t, "tensor_rank_tol", o.tensor_rank_tol);
      read(t, "tie_tol", o.tie_tol);
      read(t, "consistency_starts", o.consistency_starts);
      read(t, "consistency_tol", o.consistency_tol);
      read(t, "gram_rank_tol", o.gram_rank_tol);
      read(t, "jennrich_max_tries", o.jennrich.max_tries_x);
      read(t, "jennrich_y_retries", o.jennrich.y_retries);
      read(t, "jennrich_pd_tol", o.jennrich.pd_tol);
      read(t, "jennrich_gap_tol", o.jennrich.gap_tol);
      read(t, "jennrich_max_relative_residual", o.jennrich.max_relative_residual);
    }
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      reject_unknown(e, {"samples", "directions"}, "evaluation");
      read(e, "samples", c.eval_samples);
      read(e, "directions", c.eval_directions);
    }
    if (j.contains("ce_check")) {
      reject_unknown(j["ce_check"], {"trials"}, "ce_check");
      read(j["ce_check"], "trials", c.ce_trials);
    }
    read(j, "term_cap", c.term_cap);
    read(j, "out", c.out);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& o = c.recovery;
  return {
      {"target",
       {{"D", c.target.D},
        {"d", c.target.d},
        {"r", c.target.r},
        {"p", c.target.p},
        {"M", c.target.M},
        {"sigma", c.target.sigma},
        {"tau", c.target.tau},
        {"A", c.target.A},
        {"max_redraws", c.target.max_redraws}}},
      {"sampling",
       {{"N", c.N}, {"seeds", c.seeds}, {"shard_size", c.sampling.shard_size}, {"threads", c.sampling.threads}}},
      {"mode", to_string(c.mode)},
      {"seed", c.seed},
      {"tolerances",
       {{"complex_tol", o.roots.complex_tol},
        {"negative_tol", o.roots.negative_tol},
        {"refine_threshold", o.refine_threshold},
        {"cond_limit", o.cond_limit},
        {"refine_iters", o.refine_iters},
        {"zero_tol", o.zero_tol},
        {"tensor_rank_tol", o.tensor_rank_tol},
        {"tie_tol", o.tie_tol},
        {"consistency_starts", o.consistency_starts},
        {"consistency_tol", o.consistency_tol},
        {"gram_rank_tol", o.gram_rank_tol},
        {"jennrich_max_tries", o.jennrich.max_tries_x},
        {"jennrich_y_retries", o.jennrich.y_retries},
        {"jennrich_pd_tol", o.jennrich.pd_tol},
        {"jennrich_gap_tol", o.jennrich.gap_tol},
        {"jennrich_max_relative_residual", o.jennrich.max_relative_residual}}},
      {"evaluation", {{"samples", c.eval_samples}, {"directions", c.eval_directions}}},
      {"ce_check", {{"trials", c.ce_trials}}},
      {"term_cap", c.term_cap},
      {"out", c.out},
  };
}

}  // namespace momgen
