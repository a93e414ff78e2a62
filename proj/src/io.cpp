#include "momgen/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "momgen/error.hpp"

namespace momgen {

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double get_num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json vec_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

std::vector<double> vec_from(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(get_num(x));
  return v;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(i, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ValidationError(what + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError(what + ": row " + std::to_string(i) + " should have " + std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = get_num(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

json rational_json(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& q : v) a.push_back(to_string(q));
  return a;
}

std::vector<Rational> rational_from(const json& j) {
  std::vector<Rational> v;
  for (const auto& x : j) v.push_back(parse_rational(x.get<std::string>()));
  return v;
}

// json library errors are schema problems in user files
template <typename F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

std::string csv_num(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json to_json(const GeneratorSpec& g) {
  json v = json::array();
  for (const auto& b : g.V) v.push_back(mat_json(b));
  return {{"D", g.D}, {"d", g.d}, {"r", g.r}, {"p", g.p}, {"alpha", mat_json(g.alpha)}, {"V", v}};
}

GeneratorSpec generator_from_json(const json& j) {
  return guarded("generator", [&] {
    GeneratorSpec g;
    g.D = j.at("D").get<int>();
    g.d = j.at("d").get<int>();
    g.r = j.at("r").get<int>();
    g.p = j.at("p").get<int>();
    if (g.D < 1 || g.d < 1 || g.r < 1) throw ValidationError("generator: D, d and r must be positive");
    g.alpha = mat_from(j.at("alpha"), g.D, g.r, "generator alpha");
    const auto& v = j.at("V");
    if (!v.is_array() || static_cast<int>(v.size()) != g.D) throw ValidationError("generator: V needs D blocks");
    for (int k = 0; k < g.D; ++k)
      g.V.push_back(mat_from(v[static_cast<std::size_t>(k)], g.r, g.d, "generator V[" + std::to_string(k) + "]"));
    g.validate();
    return g;
  });
}

json to_json(const MomentTable& t) {
  json intra = json::array();
  for (std::size_t k = 0; k < t.intra.size(); ++k) {
    json e = {{"k", k}, {"values", vec_json(t.intra[k])}};
    if (k < t.intra_stderr.size()) e["stderr"] = vec_json(t.intra_stderr[k]);
    if (k < t.intra_exact.size()) e["exact"] = rational_json(t.intra_exact[k]);
    intra.push_back(std::move(e));
  }
  json inter = json::array();
  for (const auto& [pair, values] : t.inter) {
    json e = {{"i", pair.first}, {"j", pair.second}, {"values", vec_json(values)}};
    if (auto it = t.inter_stderr.find(pair); it != t.inter_stderr.end()) e["stderr"] = vec_json(it->second);
    if (auto it = t.inter_exact.find(pair); it != t.inter_exact.end()) e["exact"] = rational_json(it->second);
    inter.push_back(std::move(e));
  }
  json out = {{"D", t.D}, {"r", t.r}, {"p", t.p}, {"K", t.K}, {"source", t.source},
              {"N", t.N}, {"seed", t.seed}, {"intra", intra}, {"inter", inter}};
  if (t.target) out["target"] = to_json(*t.target);
  return out;
}

MomentTable table_from_json(const json& j) {
  return guarded("moment table", [&] {
    MomentTable t;
    t.D = j.at("D").get<int>();
    t.r = j.at("r").get<int>();
    t.p = j.at("p").get<int>();
    t.K = j.at("K").get<int>();
    t.source = j.at("source").get<std::string>();
    t.N = j.value("N", std::uint64_t{0});
    t.seed = j.value("seed", std::uint64_t{0});
    if (t.D < 1 || t.r < 1) throw ValidationError("moment table: D and r must be positive");
    t.intra.resize(static_cast<std::size_t>(t.D));
    t.intra_stderr.resize(static_cast<std::size_t>(t.D));
    bool all_exact = true;
    std::vector<std::vector<Rational>> intra_exact(static_cast<std::size_t>(t.D));
    for (const auto& e : j.at("intra")) {
      const int k = e.at("k").get<int>();
      if (k < 0 || k >= t.D) throw ValidationError("moment table: component index " + std::to_string(k) + " out of range");
      const auto ks = static_cast<std::size_t>(k);
      t.intra[ks] = vec_from(e.at("values"));
      if (e.contains("stderr")) t.intra_stderr[ks] = vec_from(e["stderr"]);
      if (e.contains("exact"))
        intra_exact[ks] = rational_from(e["exact"]);
      else
        all_exact = false;
    }
    if (all_exact && t.is_exact()) t.intra_exact = std::move(intra_exact);
    for (const auto& e : j.at("inter")) {
      const Pair pair{e.at("i").get<int>(), e.at("j").get<int>()};
      t.inter[pair] = vec_from(e.at("values"));
      if (e.contains("stderr")) t.inter_stderr[pair] = vec_from(e["stderr"]);
      if (e.contains("exact") && t.is_exact()) t.inter_exact[pair] = rational_from(e["exact"]);
    }
    if (j.contains("target")) t.target = generator_from_json(j["target"]);
    t.validate();
    return t;
  });
}

std::string table_csv(const MomentTable& t) {
  std::ostringstream os;
  os << "kind,i,j,order,value,stderr\n";
  auto err = [](const std::vector<double>* v, std::size_t n) {
    return v && n < v->size() ? csv_num((*v)[n]) : std::string("nan");
  };
  for (std::size_t k = 0; k < t.intra.size(); ++k) {
    const auto* se = k < t.intra_stderr.size() ? &t.intra_stderr[k] : nullptr;
    for (std::size_t n = 0; n < t.intra[k].size(); ++n)
      os << "intra," << k << ",," << 2 * (n + 1) << ',' << csv_num(t.intra[k][n]) << ',' << err(se, n) << '\n';
  }
  for (const auto& [pair, values] : t.inter) {
    auto it = t.inter_stderr.find(pair);
    const auto* se = it == t.inter_stderr.end() ? nullptr : &it->second;
    for (std::size_t n = 0; n < values.size(); ++n)
      os << "inter," << pair.first << ',' << pair.second << ',' << 2 * n + 1 << ',' << csv_num(values[n]) << ','
         << err(se, n) << '\n';
  }
  return os.str();
}

json to_json(const RecoveryReport& r) {
  json weights = json::array();
  for (const auto& w : r.weights)
    weights.push_back({{"component", w.component}, {"alpha", vec_json(w.alpha)}, {"max_imag", num(w.max_imag)},
                       {"warnings", w.warnings}});
  json overlaps = json::array();
  for (const auto& o : r.overlaps)
    overlaps.push_back({{"i", o.pair.first},
                        {"j", o.pair.second},
                        {"P", mat_json(o.P)},
                        {"ce_cond", num(o.ce.cond)},
                        {"ce_null_dim", o.ce.null_dim},
                        {"ce_refined", o.ce.refined},
                        {"ce_refine_iters", o.ce.refine_iters},
                        {"ce_exact_fallback", o.ce.exact_fallback},
                        {"ce_relative_residual", num(o.ce.relative_residual)},
                        {"zero_tensor", o.zero_tensor},
                        {"tensor_rank", o.tensor_rank},
                        {"jennrich_residual", num(o.jennrich_residual)},
                        {"consistency_residual", num(o.consistency_residual)},
                        {"consistency_starts_used", o.consistency_starts_used},
                        {"assignment_margin", num(o.margin)},
                        {"assignment_score", num(o.best_score)},
                        {"clamped_entries", o.clamped_entries},
                        {"clamped_q", o.clamped_q},
                        {"notes", o.notes}});
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"stage", f.stage}, {"what", f.what}});
  json out = {{"learner", to_json(r.learner)}, {"weights", weights}, {"overlaps", overlaps},
              {"flags", r.flags},             {"failures", failures}};
  if (r.gram)
    out["gram"] = {{"matrix", mat_json(r.gram->matrix)},
                   {"symmetrization_residual", num(r.gram->symmetrization_residual)}};
  if (r.factor)
    out["factor"] = {{"eigenvalues", vec_json(r.factor->eigenvalues)},
                     {"psd_defect", num(r.factor->psd_defect)},
                     {"rank_excess", num(r.factor->rank_excess)},
                     {"raw_residual", num(r.factor->raw_residual)},
                     {"projected_residual", num(r.factor->projected_residual)}};
  if (r.metrics) {
    json m = {{"weight_error", num(r.metrics->weight_error)},
              {"gram_distance", num(r.metrics->gram_distance)},
              {"gram_distance_unweighted", num(r.metrics->gram_distance_unweighted)},
              {"direction_error", num(r.metrics->direction_error)}};
    if (r.metrics->sliced_w1) m["sliced_w1"] = num(*r.metrics->sliced_w1);
    if (r.metrics->sliced_w1_stderr) m["sliced_w1_stderr"] = num(*r.metrics->sliced_w1_stderr);
    out["metrics"] = m;
  }
  return out;
}

std::string metrics_csv(const RecoveryReport& r) {
  std::ostringstream os;
  os << "weight_error,gram_distance,gram_distance_unweighted,direction_error,sliced_w1,sliced_w1_stderr,failures\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Metrics m = r.metrics.value_or(Metrics{nan, nan, nan, nan, std::nullopt, std::nullopt});
  std::string failures;
  for (const auto& f : r.failures) failures += (failures.empty() ? "" : "; ") + f.stage + ": " + f.what;
  os << csv_num(m.weight_error) << ',' << csv_num(m.gram_distance) << ',' << csv_num(m.gram_distance_unweighted) << ','
     << csv_num(m.direction_error) << ',' << csv_num(m.sliced_w1.value_or(nan)) << ','
     << csv_num(m.sliced_w1_stderr.value_or(nan)) << ',' << csv_field(failures) << '\n';
  return os.str();
}

json to_json(const SymTensor3d& t) { return {{"dim", t.dim()}, {"data", vec_json(t.flat())}}; }

SymTensor3d tensor_from_json(const json& j) {
  return guarded("tensor", [&] {
    const auto dim = j.at("dim").get<Eigen::Index>();
    if (dim < 1) throw ValidationError("tensor dim must be positive");
    return SymTensor3d::from_flat(dim, vec_from(j.at("data")));
  });
}

json to_json(const ExactPoly& p) {
  json terms = json::array();
  for (const auto& [m, c] : p.terms()) {
    json exps = json::array();
    for (const auto& [v, e] : m.factors()) exps.push_back({v, e});
    terms.push_back({{"exponents", exps}, {"coeff", to_string(c)}});
  }
  return terms;
}

ExactPoly poly_from_json(const json& j) {
  return guarded("polynomial", [&] {
    ExactPoly p;
    for (const auto& t : j) {
      std::vector<Monomial::Factor> f;
      for (const auto& e : t.at("exponents")) f.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
      p.add_term(Monomial(std::move(f)), parse_rational(t.at("coeff").get<std::string>()));
    }
    return p;
  });
}

json to_json(const CEMatrix& ce) {
  json basis = json::array();
  for (const auto& m : ce.basis().monomials) {
    json exps = json::array();
    for (const auto& [v, e] : m.factors()) exps.push_back({v, e});
    basis.push_back(exps);
  }
  json rows = json::array();
  for (std::size_t i = 0; i < ce.size(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < ce.size(); ++c) row.push_back(to_string(ce.exact(i, c)));
    rows.push_back(std::move(row));
  }
  json nulls = json::array();
  for (const auto& n : ce.left_null_space()) nulls.push_back(rational_json(n));
  return {{"r", ce.r()},       {"p", ce.p()},          {"alpha", rational_json(ce.alpha())}, {"basis", basis},
          {"entries", rows},   {"rank", ce.rank()},    {"left_null_space", nulls}};
}

std::string ce_csv(const CEMatrix& ce) {
  std::ostringstream os;
  const Eigen::MatrixXd m = ce.float_mirror();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << csv_num(m(i, c));
    os << '\n';
  }
  return os.str();
}

json to_json(const GenericCertificate& c) {
  return {{"status", c.status == GenericStatus::Holds ? "holds" : "unknown"},
          {"witness", c.witness},
          {"determinant", to_string(c.determinant)},
          {"rank", c.rank},
          {"size", c.size},
          {"trials_used", c.trials_used}};
}

json provenance(const json& config) { return {{"tool", "momgen"}, {"version", kToolVersion}, {"config", config}}; }

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw IoError("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

}  // namespace momgen
