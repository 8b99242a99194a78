// qgeom command-line driver.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qgeom/classical_orbit.hpp"
#include "qgeom/cpt_engine.hpp"
#include "qgeom/error.hpp"
#include "qgeom/fock_spectrum.hpp"
#include "qgeom/harness.hpp"
#include "qgeom/qmt_quantum.hpp"
#include "qgeom/series_tables.hpp"

using nlohmann::json;
using namespace qgeom;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConvergence = 2, kDomain = 3 };

// Values given on the command line; unset ones fall back to the config file, then defaults.
struct Flags {
  std::string config;
  std::optional<std::string> mode;
  std::optional<double> k, lambda, hbar;
  std::optional<double> k_min, k_max, k_step, lambda_min, lambda_max, lambda_step;
  std::optional<int> basis_size, states, order, threads;
  std::optional<double> tolerance;
  std::optional<std::string> engines;
  std::optional<std::string> output;
  // subcommand specific
  std::optional<double> action;
  std::optional<std::string> well, action_mode, branch, input, columns, json_out;
  std::optional<int> points, harmonics;
  std::optional<double> q_min, q_max, delta;
  bool provost = false;
  bool scan = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

SweepMode parse_mode(const std::string& s) {
  if (s == "k_sweep" || s == "k-sweep" || s == "k") return SweepMode::k_sweep;
  if (s == "lambda_sweep" || s == "lambda-sweep" || s == "lambda") return SweepMode::lambda_sweep;
  if (s == "grid") return SweepMode::grid;
  throw UsageError("unknown sweep mode: " + s);
}

std::set<Engine> parse_engines(const std::vector<std::string>& names) {
  std::set<Engine> out;
  for (const auto& n : names)
    if (!n.empty()) out.insert(parse_engine(n));
  return out;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::set<std::string> known{
      "mode",  "k_min", "k_max", "k_step", "lambda_min", "lambda_max", "lambda_step", "k",      "lambda",
      "hbar",  "basis_size", "tolerance", "states", "order", "engines", "threads", "output", "columns",
      "action", "well"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw UsageError("unknown config key: " + key);
  return j;
}

template <class T>
T pick(const std::optional<T>& flag, const json& cfg, const char* key, T fallback) {
  if (flag) return *flag;
  if (cfg.contains(key)) {
    try {
      return cfg.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError(std::string("bad type for config key ") + key);
    }
  }
  return fallback;
}

SweepConfig sweep_config(const Flags& f, const json& cfg) {
  SweepConfig c;
  c.mode = parse_mode(pick<std::string>(f.mode, cfg, "mode", "k_sweep"));
  c.k_min = pick(f.k_min, cfg, "k_min", c.k_min);
  c.k_max = pick(f.k_max, cfg, "k_max", c.k_max);
  c.k_step = pick(f.k_step, cfg, "k_step", c.k_step);
  c.lambda_min = pick(f.lambda_min, cfg, "lambda_min", c.lambda_min);
  c.lambda_max = pick(f.lambda_max, cfg, "lambda_max", c.lambda_max);
  c.lambda_step = pick(f.lambda_step, cfg, "lambda_step", c.lambda_step);
  c.k = pick(f.k, cfg, "k", c.k);
  c.lambda = pick(f.lambda, cfg, "lambda", c.lambda);
  c.hbar = pick(f.hbar, cfg, "hbar", c.hbar);
  c.basis_size = pick(f.basis_size, cfg, "basis_size", c.basis_size);
  c.tolerance = pick(f.tolerance, cfg, "tolerance", c.tolerance);
  c.states = pick(f.states, cfg, "states", c.states);
  c.order = pick(f.order, cfg, "order", c.order);
  c.threads = pick(f.threads, cfg, "threads", c.threads);
  c.output = pick(f.output, cfg, "output", std::string());
  if (f.engines) {
    c.engines = parse_engines(split(*f.engines, ','));
  } else if (cfg.contains("engines")) {
    const auto& e = cfg.at("engines");
    if (e.is_string()) c.engines = parse_engines(split(e.get<std::string>(), ','));
    else if (e.is_array()) c.engines = parse_engines(e.get<std::vector<std::string>>());
    else throw UsageError("engines must be a string or an array");
  }
  return c;
}

SystemParams point(const Flags& f, const json& cfg) {
  return SystemParams{pick(f.k, cfg, "k", 1.0), pick(f.lambda, cfg, "lambda", 0.2), pick(f.hbar, cfg, "hbar", 1.0)};
}

Well parse_well(const std::string& s) {
  if (s == "single") return Well::single;
  if (s == "left") return Well::left;
  if (s == "right") return Well::right;
  throw UsageError("unknown well: " + s);
}

// Writes to --output when given, stdout otherwise.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open output file: " + path);
  out << text;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metric_json(const MetricValue& m) {
  return json{{"g11", num(m.g11)}, {"g12", num(m.g12)}, {"g22", num(m.g22)}, {"det", num(metric_determinant(m))}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- subcommands ----

int cmd_spectrum(const Flags& f, const json& cfg) {
  const SystemParams p = point(f, cfg);
  p.validate();
  const int states = pick(f.states, cfg, "states", 10);
  if (states < 1) throw UsageError("--states must be positive");
  BasisSpec basis = default_basis(p, states);
  if (const int n = pick(f.basis_size, cfg, "basis_size", 0); n > 0) basis.size = n;
  EigenOptions eo;
  eo.tolerance = pick(f.tolerance, cfg, "tolerance", eo.tolerance);
  eo.requested = states;
  const SpectralResult s = converged_spectrum(p, basis, eo);
  json levels = json::array();
  for (int i = 0; i < std::min(states, s.size()); ++i)
    levels.push_back({{"n", i},
                      {"energy", s.energies(i)},
                      {"gap", s.energies(i) - s.energies(0)},
                      {"parity", s.parity.empty() ? 0 : s.parity[static_cast<std::size_t>(i)]}});
  emit(pick<std::string>(f.output, cfg, "output", ""),
       dump({{"k", p.k},
             {"lambda", p.lambda},
             {"hbar", p.hbar},
             {"basis_size", s.basis.size},
             {"omega_b", s.basis.omega_b},
             {"n_converged", s.n_converged},
             {"levels", levels}}));
  return kOk;
}

int cmd_density(const Flags& f, const json& cfg) {
  if (f.scan) {
    BimodalityOptions bo;
    bo.lambda = pick(f.lambda, cfg, "lambda", bo.lambda);
    bo.hbar = pick(f.hbar, cfg, "hbar", bo.hbar);
    const BimodalityOnsets on = bimodality_scan(bo);
    emit(pick<std::string>(f.output, cfg, "output", ""),
         dump({{"lambda", bo.lambda}, {"two_maxima", num(on.two_maxima)}, {"separated", num(on.separated)}}));
    return kOk;
  }
  const SystemParams p = point(f, cfg);
  p.validate();
  const int points = f.points.value_or(2001);
  if (points < 2) throw UsageError("--points must be at least 2");
  std::vector<double> grid = default_density_grid(p, points);
  if (f.q_min || f.q_max) {
    const double lo = f.q_min.value_or(grid.front()), hi = f.q_max.value_or(grid.back());
    if (!(hi > lo)) throw UsageError("empty q range");
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  }
  BasisSpec basis = default_basis(p, 2);
  if (const int n = pick(f.basis_size, cfg, "basis_size", 0); n > 0) basis.size = n;
  EigenOptions eo;
  eo.requested = 1;
  const SpectralResult s = converged_spectrum(p, basis, eo);
  const auto rho = ground_density(s, grid, p.hbar);
  std::string out = "q,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out += format_number(grid[i]) + "," + format_number(rho[i]) + "\n";
  emit(pick<std::string>(f.output, cfg, "output", ""), out);
  return kOk;
}

int cmd_qmt(const Flags& f, const json& cfg) {
  const SystemParams p = point(f, cfg);
  QmtOptions o;
  o.states = pick(f.states, cfg, "states", o.states);
  o.basis_size = pick(f.basis_size, cfg, "basis_size", 0);
  o.eigen.tolerance = pick(f.tolerance, cfg, "tolerance", o.eigen.tolerance);
  const QmtResult r = quantum_metric(p, o);
  json terms = json::array();
  for (int m = 1; m < static_cast<int>(r.terms.size()); ++m) {
    const auto& t = r.terms[static_cast<std::size_t>(m)];
    if (t.g11 == 0.0 && t.g22 == 0.0) continue;
    terms.push_back({{"m", m}, {"G11", t.g11}, {"G12", t.g12}, {"G22", t.g22}});
  }
  json j{{"k", p.k}, {"lambda", p.lambda}, {"hbar", p.hbar}, {"states", o.states},
         {"metric", metric_json(r.metric)}, {"tail", r.tail}, {"terms", terms}};
  if (f.provost) {
    BasisSpec basis = default_basis(p, o.states);
    if (o.basis_size > 0) basis.size = o.basis_size;
    j["provost_fd"] = metric_json(qmt_provost_fd(p, basis, f.delta.value_or(1e-4)));
  }
  if (p.k > 0.0) {
    const SeriesValue s = eval_qmt_series(p);
    j["series"] = metric_json(s.metric);
    j["series"]["last_term"] = s.last_term;
    j["series"]["beyond_radius"] = s.beyond_radius;
  }
  emit(pick<std::string>(f.output, cfg, "output", ""), dump(j));
  return kOk;
}

int cmd_cmt_numeric(const Flags& f, const json& cfg) {
  const SystemParams p = point(f, cfg);
  p.validate();
  const double I = pick(f.action, cfg, "action", FAlpha::printed()[1] * p.hbar);
  const Well well = resolve_well(p, parse_well(pick<std::string>(f.well, cfg, "well", "single")));
  const Orbit o = integrate_orbit(I, p, well);
  FourierOptions fo;
  fo.harmonics = f.harmonics.value_or(fo.harmonics);
  const FourierData fd = orbit_fourier(o, fo);
  json beta = json::array();
  for (int m = 0; m <= fd.max_harmonic(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    beta.push_back({{"m", m},
                    {"beta1_re", fd.beta1[i].real()},
                    {"beta1_im", fd.beta1[i].imag()},
                    {"beta2_re", fd.beta2[i].real()},
                    {"beta2_im", fd.beta2[i].imag()}});
  }
  emit(pick<std::string>(f.output, cfg, "output", ""),
       dump({{"k", p.k},
             {"lambda", p.lambda},
             {"action", I},
             {"well", to_string(well)},
             {"energy", o.E},
             {"omega", o.omega},
             {"period", o.T},
             {"turning_points", {o.q_minus, o.q_plus}},
             {"energy_drift", o.energy_drift},
             {"fourier_tail", fd.tail},
             {"metric", metric_json(cmt_numeric(fd, o.omega))},
             {"beta", beta}}));
  return kOk;
}

int cmd_cmt_series(const Flags& f, const json& cfg) {
  const SystemParams p = point(f, cfg);
  p.validate();
  if (p.k == 0.0) throw DomainError("classical series undefined at k = 0");
  const Branch br = p.k > 0.0 ? Branch::k_positive : Branch::k_negative;
  ActionSpec a;
  const std::string mode = f.action_mode.value_or(f.action || cfg.contains("action") ? "literal" : "identified");
  if (mode == "literal") {
    a.mode = ActionMode::literal;
    a.I = pick(f.action, cfg, "action", 0.5);
  } else if (mode != "identified") {
    throw UsageError("unknown action mode: " + mode);
  }
  std::optional<CoefficientTable> table;
  if (f.order) {
    const int order = br == Branch::k_positive ? *f.order : 2 * *f.order;
    table = table_from_cpt(extract_cmt_table(run_cpt(BranchSpec{br, order})));
  }
  const SeriesValue s = eval_cmt_series(br, p, a, table ? &*table : nullptr);
  json j{{"k", p.k},
         {"lambda", p.lambda},
         {"branch", to_string(br)},
         {"action_mode", mode},
         {"table", table ? "generated" : "printed"},
         {"metric", metric_json(s.metric)},
         {"last_term", s.last_term},
         {"beyond_radius", s.beyond_radius}};
  if (a.mode == ActionMode::literal) j["action"] = a.I;
  emit(pick<std::string>(f.output, cfg, "output", ""), dump(j));
  return kOk;
}

int cmd_cpt_dump(const Flags& f, const json& cfg) {
  const std::string b = f.branch.value_or("pos");
  Branch br;
  if (b == "pos" || b == "k>0" || b == "positive") br = Branch::k_positive;
  else if (b == "neg" || b == "k<0" || b == "negative") br = Branch::k_negative;
  else throw UsageError("unknown branch: " + b);
  const int order = pick(f.order, cfg, "order", 4);
  const CptResult r = run_cpt(BranchSpec{br, order});
  std::ostringstream os;
  dump_cpt(os, r);
  os << "# table\n";
  table_from_cpt(extract_cmt_table(r)).dump(os);
  emit(pick<std::string>(f.output, cfg, "output", ""), os.str());
  return kOk;
}

int cmd_curvature(const Flags& f, const json& cfg) {
  SweepConfig c = sweep_config(f, cfg);
  const SystemParams p = point(f, cfg);
  p.validate();
  c.mode = SweepMode::grid;
  c.k_min = c.k_max = p.k;
  c.lambda_min = c.lambda_max = p.lambda;
  if (!f.k_step && !cfg.contains("k_step")) c.k_step = 0.01;
  if (!f.lambda_step && !cfg.contains("lambda_step")) c.lambda_step = 0.01;
  if (!f.engines && !cfg.contains("engines")) c.engines = {Engine::quantum_numeric, Engine::classical_series};
  const auto rows = run_sweep(c);
  const SweepRow& r = rows.front();
  json j{{"k", p.k}, {"lambda", p.lambda}, {"k_step", c.k_step}, {"lambda_step", c.lambda_step},
         {"R_q", num(r.R_q)}, {"R_cl", num(r.R_cl)}, {"flags", r.flags}};
  auto series = [&](CurvatureKind kind) -> json {
    try {
      double last = 0.0;
      const double v = eval_curvature_series(kind, p, &last);
      return json{{"value", num(v)}, {"last_term", num(last)}};
    } catch (const DomainError&) {
      return nullptr;
    }
  };
  j["R_q_series"] = series(CurvatureKind::quantum);
  j["R_cl_series"] = series(CurvatureKind::classical);
  emit(pick<std::string>(f.output, cfg, "output", ""), dump(j));
  return kOk;
}

int cmd_sweep(const Flags& f, const json& cfg) {
  const SweepConfig c = sweep_config(f, cfg);
  const auto rows = run_sweep(c);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  emit(c.output, os.str());
  return kOk;
}

double parse_field(const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); }

// Reads a sweep CSV back; only the numeric columns matter for extrema.
std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw UsageError("input is not a sweep CSV: " + path);
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto v = split(line, ',');
    if (v.size() != 15) throw UsageError("malformed sweep CSV row: " + line);
    SweepRow r;
    try {
      r.k = parse_field(v[0]);
      r.lambda = parse_field(v[1]);
      if (!v[2].empty()) r.q = MetricValue{parse_field(v[2]), parse_field(v[3]), parse_field(v[4])};
      r.det_q = parse_field(v[5]);
      r.R_q = parse_field(v[6]);
      if (!v[7].empty()) r.cl = MetricValue{parse_field(v[7]), parse_field(v[8]), parse_field(v[9])};
      r.det_cl = parse_field(v[10]);
      r.R_cl = parse_field(v[11]);
      r.tail_q = parse_field(v[12]);
      r.tail_cl = parse_field(v[13]);
    } catch (const std::logic_error&) {
      throw UsageError("malformed number in sweep CSV row: " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

SweepMode infer_mode(const std::vector<SweepRow>& rows) {
  if (rows.size() < 2) return SweepMode::k_sweep;
  bool k_const = true, l_const = true;
  for (const auto& r : rows) {
    k_const = k_const && r.k == rows.front().k;
    l_const = l_const && r.lambda == rows.front().lambda;
  }
  if (l_const) return SweepMode::k_sweep;
  if (k_const) return SweepMode::lambda_sweep;
  return SweepMode::grid;
}

int cmd_landmarks(const Flags& f, const json& cfg) {
  std::vector<SweepRow> rows;
  SweepMode mode;
  std::string out_path = pick<std::string>(f.output, cfg, "output", "");
  if (f.input) {
    rows = read_sweep_csv(*f.input);
    mode = infer_mode(rows);
  } else {
    SweepConfig c = sweep_config(f, cfg);
    c.output.clear();
    rows = run_sweep(c);
    mode = c.mode;
  }
  std::vector<std::string> cols = metric_columns();
  if (f.columns) cols = split(*f.columns, ',');
  else if (cfg.contains("columns")) cols = cfg.at("columns").get<std::vector<std::string>>();
  json arr = json::array();
  for (const auto& m : landmarks(rows, mode, cols))
    arr.push_back({{"column", m.column}, {"kind", to_string(m.kind)}, {"location", m.location}, {"value", m.value},
                   {"step", m.step}});
  emit(out_path, dump(arr));
  return kOk;
}

int cmd_compare(const Flags& f, const json& cfg) {
  const SystemParams p = point(f, cfg);
  const int M = pick(f.states, cfg, "states", 10);
  const CompareReport rep = compare(p, M, pick(f.action, cfg, "action", std::nan("")));
  std::ostringstream os;
  write_compare_csv(os, rep);
  emit(pick<std::string>(f.output, cfg, "output", ""), os.str());
  if (f.json_out) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
      json row{{"m", r.m},
               {"mprime", r.mprime >= 0 ? json(r.mprime) : json(nullptr)},
               {"gap_q", r.gap_q},
               {"gap_cl", num(r.gap_cl)},
               {"B1", r.B1},
               {"B2", r.B2},
               {"beta1p", {num(r.beta1p.real()), num(r.beta1p.imag())}},
               {"beta2p", {num(r.beta2p.real()), num(r.beta2p.imag())}},
               {"G", {r.G.g11, r.G.g12, r.G.g22}}};
      row["Gcl"] = r.Gcl ? json{r.Gcl->g11, r.Gcl->g12, r.Gcl->g22} : json(nullptr);
      rows.push_back(row);
    }
    emit(*f.json_out, dump({{"k", p.k}, {"lambda", p.lambda}, {"hbar", p.hbar}, {"action", rep.action},
                            {"omega", rep.omega}, {"rows", rows}}));
  }
  return kOk;
}

int cmd_fit_f(const Flags& f, const json& cfg) {
  const double hbar = pick(f.hbar, cfg, "hbar", 1.0);
  const std::string src = f.input.value_or("printed");
  CoefficientTable classical = printed_table('b');
  if (src == "cpt") classical = table_from_cpt(extract_cmt_table(run_cpt(BranchSpec{Branch::k_positive, pick(f.order, cfg, "order", 6)})));
  else if (src != "printed") throw UsageError("--source must be printed or cpt");
  const FAlpha fit = fit_f_alpha(printed_table('a'), classical, hbar);
  const FAlpha ref = FAlpha::printed();
  json arr = json::array();
  for (int p = 1; p <= 14; ++p) {
    const auto i = static_cast<std::size_t>(p);
    arr.push_back({{"p", p}, {"f", num(fit.f[i])}, {"printed", ref.f[i]}, {"candidates", fit.candidates[i]}});
  }
  emit(pick<std::string>(f.output, cfg, "output", ""), dump({{"hbar", hbar}, {"source", src}, {"f", arr}}));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter-space geometry of the quartic and double-well oscillators"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  Flags f;

  auto point_opts = [&](CLI::App* s) {
    s->add_option("--config", f.config, "JSON config file");
    s->add_option("--k", f.k, "harmonic coefficient k");
    s->add_option("--lambda", f.lambda, "quartic coupling lambda");
    s->add_option("--hbar", f.hbar, "Planck constant");
    s->add_option("--output", f.output, "output path (default stdout)");
  };
  auto basis_opts = [&](CLI::App* s) {
    s->add_option("--basis-size", f.basis_size, "initial Fock basis size");
    s->add_option("--tolerance", f.tolerance, "eigenvalue convergence tolerance");
    s->add_option("--states", f.states, "number of excited states");
  };
  auto sweep_opts = [&](CLI::App* s) {
    point_opts(s);
    basis_opts(s);
    s->add_option("--mode", f.mode, "k_sweep, lambda_sweep or grid");
    s->add_option("--k-min", f.k_min);
    s->add_option("--k-max", f.k_max);
    s->add_option("--k-step", f.k_step);
    s->add_option("--lambda-min", f.lambda_min);
    s->add_option("--lambda-max", f.lambda_max);
    s->add_option("--lambda-step", f.lambda_step);
    s->add_option("--order", f.order, "perturbation order for the cpt engine");
    s->add_option("--engines", f.engines, "comma-separated engine list");
    s->add_option("--threads", f.threads, "worker threads (0: all cores)");
  };

  std::map<CLI::App*, int (*)(const Flags&, const json&)> handlers;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Flags&, const json&)) {
    CLI::App* s = app.add_subcommand(name, help);
    handlers[s] = fn;
    return s;
  };

  auto* spectrum = sub("spectrum", "converged energy levels", cmd_spectrum);
  point_opts(spectrum);
  basis_opts(spectrum);

  auto* density = sub("density", "ground-state density on a grid, or the bimodality scan", cmd_density);
  point_opts(density);
  density->add_option("--basis-size", f.basis_size);
  density->add_option("--points", f.points, "grid points");
  density->add_option("--q-min", f.q_min);
  density->add_option("--q-max", f.q_max);
  density->add_flag("--scan", f.scan, "locate the two-maxima and separation onsets in k");

  auto* qmt = sub("qmt", "quantum metric from the perturbation sum", cmd_qmt);
  point_opts(qmt);
  basis_opts(qmt);
  qmt->add_flag("--provost", f.provost, "also evaluate the finite-difference overlap formula");
  qmt->add_option("--delta", f.delta, "finite-difference step");

  auto* cmtn = sub("cmt-numeric", "classical metric from the integrated orbit", cmd_cmt_numeric);
  point_opts(cmtn);
  cmtn->add_option("--action", f.action, "action I (default f1 hbar)");
  cmtn->add_option("--well", f.well, "single, left or right");
  cmtn->add_option("--harmonics", f.harmonics, "Fourier harmonics kept");

  auto* cmts = sub("cmt-series", "classical metric from the coefficient tables", cmd_cmt_series);
  point_opts(cmts);
  cmts->add_option("--action", f.action, "literal action value");
  cmts->add_option("--action-mode", f.action_mode, "literal or identified");
  cmts->add_option("--order", f.order, "generate the table at this order instead of using printed data");

  auto* cpt = sub("cpt-dump", "canonical perturbation theory series", cmd_cpt_dump);
  cpt->add_option("--config", f.config);
  cpt->add_option("--branch", f.branch, "pos or neg");
  cpt->add_option("--order", f.order, "perturbation order");
  cpt->add_option("--output", f.output);

  auto* curv = sub("curvature", "scalar curvature at a point", cmd_curvature);
  sweep_opts(curv);

  auto* sweep = sub("sweep", "parameter sweep to CSV", cmd_sweep);
  sweep_opts(sweep);

  auto* lm = sub("landmarks", "extrema of sweep columns as JSON", cmd_landmarks);
  sweep_opts(lm);
  lm->add_option("--input", f.input, "existing sweep CSV instead of running a sweep");
  lm->add_option("--columns", f.columns, "comma-separated columns");

  auto* cmp = sub("compare", "term-by-term quantum/classical comparison", cmd_compare);
  point_opts(cmp);
  cmp->add_option("--states", f.states, "number of quantum states M");
  cmp->add_option("--action", f.action, "classical action (default f1 hbar)");
  cmp->add_option("--json", f.json_out, "also write a JSON report here");

  auto* fit = sub("fit-f", "semiclassical action identification", cmd_fit_f);
  fit->add_option("--config", f.config);
  fit->add_option("--hbar", f.hbar);
  fit->add_option("--source", f.input, "printed or cpt");
  fit->add_option("--order", f.order, "cpt order when --source cpt");
  fit->add_option("--output", f.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const json cfg = load_config(f.config);
    for (auto* s : app.get_subcommands()) return handlers.at(s)(f, cfg);
    return kUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    return kConvergence;
  } catch (const ConsistencyError& e) {
    std::fprintf(stderr, "consistency failure: %s\n", e.what());
    return kConvergence;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kDomain;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}
