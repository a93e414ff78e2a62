#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>

#include "momgen/config.hpp"
#include "momgen/error.hpp"
#include "momgen/io.hpp"
#include "momgen/sweep.hpp"

namespace fs = std::filesystem;
using namespace momgen;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config (JSON)");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--mode", c.mode, "exact or empirical")->check(CLI::IsMember({"exact", "empirical"}));
  cmd->add_flag("--strict", c.strict, "nonzero exit on any stage failure");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : config_from_json(read_json(c.config_path));
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out = c.out;
  if (!c.mode.empty()) cfg.mode = parse_mode(c.mode);
  cfg.recovery.strict = c.strict;
  cfg.recovery.seed = cfg.seed;
  cfg.recovery.term_cap = cfg.term_cap;
  cfg.recovery.threads = cfg.sampling.threads;
  cfg.validate();
  return cfg;
}

std::string csv_header(const ExperimentConfig& cfg) {
  return "# momgen " + std::string(kToolVersion) + " config=" + to_json(cfg).dump() + "\n";
}

int cmd_synthesize(const ExperimentConfig& cfg) {
  const GeneratorSpec g = synthesize_target(cfg.target, cfg.seed);
  json j = to_json(g);
  j["seed"] = cfg.seed;
  j["provenance"] = provenance(to_json(cfg));
  const fs::path path = fs::path(cfg.out) / "generator.json";
  write_json(path, j);
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_moments(const ExperimentConfig& cfg, const std::string& generator_path, std::optional<std::uint64_t> samples) {
  const GeneratorSpec g = generator_from_json(read_json(generator_path));
  MomentTable t;
  if (cfg.mode == Mode::Exact) {
    t = exact_moment_table(g, cfg.term_cap);
  } else {
    const std::uint64_t n = samples.value_or(cfg.N.front());
    if (n < 1) throw ValidationError("sample count must be at least 1");
    t = empirical_moment_table(g, n, cfg.seed, cfg.sampling);
    t.target = g;
  }
  json j = to_json(t);
  j["provenance"] = provenance(to_json(cfg));
  const fs::path dir(cfg.out);
  write_json(dir / "moments.json", j);
  write_file_atomic(dir / "moments.csv", csv_header(cfg) + table_csv(t));
  std::cout << (dir / "moments.json").string() << "\n" << (dir / "moments.csv").string() << "\n";
  return 0;
}

int cmd_recover(ExperimentConfig cfg, const std::string& table_path, std::optional<int> latent_dim) {
  const MomentTable t = table_from_json(read_json(table_path));
  const int d = latent_dim.value_or(cfg.target.d);
  const bool strict = cfg.recovery.strict;
  // outputs are the same in both modes; --strict only changes the exit code
  cfg.recovery.strict = false;
  RecoveryReport rep = recover_full(t, d, cfg.recovery);
  if (rep.ok() && rep.metrics && t.target && t.target->d == d) {
    const SlicedW1 w = sliced_w1(rep.learner, *t.target, cfg.eval_samples, cfg.eval_directions, cfg.seed);
    rep.metrics->sliced_w1 = w.value;
    rep.metrics->sliced_w1_stderr = w.stderr_;
  }
  json j = to_json(rep);
  j["provenance"] = provenance(to_json(cfg));
  const fs::path dir(cfg.out);
  write_json(dir / "report.json", j);
  write_file_atomic(dir / "metrics.csv", csv_header(cfg) + metrics_csv(rep));
  std::cout << (dir / "report.json").string() << "\n";
  for (const auto& f : rep.failures) std::cerr << "stage failure [" << f.stage << "]: " << f.what << "\n";
  return strict && !rep.ok() ? exit_code(ErrorKind::Numerical) : 0;
}

int cmd_ce_check(const ExperimentConfig& cfg, int r, int p, std::optional<int> trials) {
  if (r < 1 || p < 1 || p % 2 == 0) throw ValidationError("ce-check needs r >= 1 and odd p >= 1");
  const GenericCertificate c = generic_condition_check(r, p, trials.value_or(cfg.ce_trials), cfg.seed, cfg.term_cap);
  json j = to_json(c);
  j["r"] = r;
  j["p"] = p;
  j["provenance"] = provenance(to_json(cfg));
  write_json(fs::path(cfg.out) / "ce_check.json", j);
  std::cout << "r=" << r << " p=" << p << " status=" << j["status"].get<std::string>() << " size=" << c.size
            << " rank=" << c.rank << " witness=" << json(c.witness).dump() << " det=" << j["determinant"].get<std::string>()
            << "\n";
  return cfg.recovery.strict && c.status != GenericStatus::Holds ? exit_code(ErrorKind::Numerical) : 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const SweepResult res = run_sweep(cfg);
  const fs::path dir(cfg.out);
  write_file_atomic(dir / "sweep.csv", csv_header(cfg) + sweep_csv(res));
  std::cout << (dir / "sweep.csv").string() << "\n";
  std::cout << "slope " << (res.slope ? std::to_string(*res.slope) : "n/a (" + res.slope_note + ")") << "\n";
  bool failed = false;
  for (const auto& row : res.rows) failed |= !row.failures.empty();
  return cfg.recovery.strict && failed ? exit_code(ErrorKind::Numerical) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-based recovery of polynomial generators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  std::string generator_path, table_path;
  std::optional<std::uint64_t> samples;
  std::optional<int> latent_dim, trials;
  int ce_r = 2, ce_p = 3;

  auto* synth = app.add_subcommand("synthesize", "draw a robust target generator");
  add_common(synth, common);
  auto* mom = app.add_subcommand("moments", "moment table of a generator");
  add_common(mom, common);
  mom->add_option("--generator", generator_path, "generator JSON")->required();
  mom->add_option("-N,--samples", samples, "latent draws in empirical mode (default: first N of the config)");
  auto* rec = app.add_subcommand("recover", "recover a generator from a moment table");
  add_common(rec, common);
  rec->add_option("--table", table_path, "moment table JSON")->required();
  rec->add_option("--latent-dim", latent_dim, "latent dimension d (default: from the config)");
  auto* ce = app.add_subcommand("ce-check", "certify det CE != 0 at integer points");
  add_common(ce, common);
  ce->add_option("-r", ce_r, "number of directions per component");
  ce->add_option("-p", ce_p, "odd degree");
  ce->add_option("--trials", trials, "random witness trials");
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over N and seeds");
  add_common(sweep, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::Validation);
  }

  try {
    const ExperimentConfig cfg = resolve(common);
    if (synth->parsed()) return cmd_synthesize(cfg);
    if (mom->parsed()) return cmd_moments(cfg, generator_path, samples);
    if (rec->parsed()) return cmd_recover(cfg, table_path, latent_dim);
    if (ce->parsed()) return cmd_ce_check(cfg, ce_r, ce_p, trials);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::Io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::Numerical);
  }
  return 0;
}
