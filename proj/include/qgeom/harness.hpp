#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "qgeom/classical_orbit.hpp"
#include "qgeom/cpt_engine.hpp"
#include "qgeom/error.hpp"
#include "qgeom/fock_spectrum.hpp"
#include "qgeom/metric_geometry.hpp"
#include "qgeom/qmt_quantum.hpp"
#include "qgeom/series_tables.hpp"

namespace qgeom {

enum class Engine { quantum_numeric, quantum_series, classical_numeric, classical_series, cpt };

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::quantum_numeric: return "quantum-numeric";
    case Engine::quantum_series: return "quantum-series";
    case Engine::classical_numeric: return "classical-numeric";
    case Engine::classical_series: return "classical-series";
    case Engine::cpt: return "cpt";
  }
  return "?";
}

inline Engine parse_engine(const std::string& s) {
  for (Engine e : {Engine::quantum_numeric, Engine::quantum_series, Engine::classical_numeric,
                   Engine::classical_series, Engine::cpt})
    if (s == to_string(e)) return e;
  throw UsageError("unknown engine: " + s);
}

enum class SweepMode { k_sweep, lambda_sweep, grid };

struct SweepConfig {
  SweepMode mode = SweepMode::k_sweep;
  double k_min = -1.0, k_max = 1.0, k_step = 0.005;
  double lambda_min = 0.05, lambda_max = 0.5, lambda_step = 0.005;
  double k = -0.5;         // fixed k for lambda sweeps
  double lambda = 0.2;     // fixed lambda for k sweeps
  double hbar = 1.0;
  int basis_size = 0;      // 0: automatic
  double tolerance = 1e-9;
  int states = 60;         // M in the perturbation sum
  int order = 4;           // perturbation order for the cpt engine
  std::set<Engine> engines{Engine::quantum_numeric, Engine::classical_series};
  int threads = 0;         // 0: hardware concurrency
  std::string output;      // CSV path; empty: stdout

  void validate() const {
    auto axis_ok = [](double lo, double hi, double step) {
      return step > 0.0 && std::isfinite(lo) && std::isfinite(hi) && hi >= lo;
    };
    if (mode != SweepMode::lambda_sweep && !axis_ok(k_min, k_max, k_step)) throw UsageError("empty or invalid k range");
    if (mode != SweepMode::k_sweep && !axis_ok(lambda_min, lambda_max, lambda_step))
      throw UsageError("empty or invalid lambda range");
    if (!(k_step > 0.0) || !(lambda_step > 0.0)) throw UsageError("steps must be positive");
    if (mode != SweepMode::k_sweep && !(lambda_min > 0.0)) throw DomainError("lambda range must be positive");
    if (mode == SweepMode::k_sweep && !(lambda > 0.0)) throw DomainError("lambda must be positive");
    if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
    if (states < 1) throw UsageError("need at least one excited state");
    if (engines.empty()) throw UsageError("no engines selected");
  }
};

/// Nodes lo, lo + step, ... up to hi (inclusive within a small slack).
inline std::vector<double> axis_nodes(double lo, double hi, double step) {
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n < 1 || n > 1000000) throw UsageError("invalid range");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  return v;
}

struct SweepRow {
  double k = 0.0, lambda = 0.0;
  std::optional<MetricValue> q, cl;
  double det_q = std::nan(""), R_q = std::nan(""), det_cl = std::nan(""), R_cl = std::nan("");
  double tail_q = std::nan(""), tail_cl = std::nan("");
  std::vector<std::string> flags;
};

inline constexpr const char* kSweepHeader =
    "k,lambda,g11_q,g12_q,g22_q,det_q,R_q,g11_cl,g12_cl,g22_cl,det_cl,R_cl,tail_q,tail_cl,flags";

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // no negative zero
  return buf;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    auto g = [](const std::optional<MetricValue>& m, int c) {
      if (!m) return std::string();
      return format_number(c == 0 ? m->g11 : c == 1 ? m->g12 : m->g22);
    };
    std::string flags;
    for (const auto& f : r.flags) flags += (flags.empty() ? "" : "|") + f;
    os << format_number(r.k) << ',' << format_number(r.lambda) << ',' << g(r.q, 0) << ',' << g(r.q, 1) << ','
       << g(r.q, 2) << ',' << format_number(r.det_q) << ',' << format_number(r.R_q) << ',' << g(r.cl, 0) << ','
       << g(r.cl, 1) << ',' << g(r.cl, 2) << ',' << format_number(r.det_cl) << ',' << format_number(r.R_cl) << ','
       << format_number(r.tail_q) << ',' << format_number(r.tail_cl) << ',' << flags << '\n';
  }
}

/// Runs f(i) for i in [0, n) on a small pool. The exception of the lowest failing index
/// is rethrown so failures are deterministic too.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  unsigned t = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t fail_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr fail;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < fail_index) {
          fail_index = i;
          fail = std::current_exception();
        }
      }
    }
  };
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fail) std::rethrow_exception(fail);
}

namespace detail {

struct NodeValue {
  std::optional<MetricValue> metric;
  double tail = std::nan("");
};

// Classical tables for the cpt engine, generated once per sweep.
struct ClassicalTables {
  std::optional<CoefficientTable> pos, neg;
};

inline ClassicalTables make_cpt_tables(const SweepConfig& cfg) {
  ClassicalTables t;
  t.pos = table_from_cpt(extract_cmt_table(run_cpt(BranchSpec{Branch::k_positive, cfg.order})));
  t.neg = table_from_cpt(extract_cmt_table(run_cpt(BranchSpec{Branch::k_negative, 2 * cfg.order})));
  return t;
}

inline NodeValue quantum_node(const SweepConfig& cfg, const SystemParams& p) {
  NodeValue v;
  if (cfg.engines.count(Engine::quantum_numeric)) {
    QmtOptions opt;
    opt.states = cfg.states;
    opt.basis_size = cfg.basis_size;
    opt.eigen.tolerance = cfg.tolerance;
    const QmtResult r = quantum_metric(p, opt);  // convergence failures propagate
    v.metric = r.metric;
    v.tail = r.tail;
  } else if (cfg.engines.count(Engine::quantum_series) && p.k > 0.0) {
    const SeriesValue s = eval_qmt_series(p);
    v.metric = s.metric;
    v.tail = s.last_term;
  }
  return v;
}

inline NodeValue classical_node(const SweepConfig& cfg, const SystemParams& p, const ClassicalTables& tables) {
  NodeValue v;
  if (p.k == 0.0) return v;
  const Branch br = p.k > 0.0 ? Branch::k_positive : Branch::k_negative;
  FAlpha f = FAlpha::printed();
  ActionSpec action{ActionMode::identified, f[1] * p.hbar, f};
  if (cfg.engines.count(Engine::classical_series) || cfg.engines.count(Engine::cpt)) {
    const CoefficientTable* table = nullptr;
    if (!cfg.engines.count(Engine::classical_series)) table = br == Branch::k_positive ? &*tables.pos : &*tables.neg;
    const SeriesValue s = eval_cmt_series(br, p, action, table);
    v.metric = s.metric;
    v.tail = s.last_term;
  } else if (cfg.engines.count(Engine::classical_numeric)) {
    try {
      const Orbit o = integrate_orbit(f[1] * p.hbar, p, Well::left);
      const FourierData fd = fourier_of_samples(o.samples, 32);
      v.metric = cmt_numeric(fd, o.omega);
      v.tail = fd.tail;
    } catch (const DomainError&) {
      // above the barrier or otherwise outside the single-well picture: masked
    } catch (const ConvergenceError&) {
    }
  }
  return v;
}

inline bool has_quantum(const SweepConfig& c) {
  return c.engines.count(Engine::quantum_numeric) || c.engines.count(Engine::quantum_series);
}
inline bool has_classical(const SweepConfig& c) {
  return c.engines.count(Engine::classical_numeric) || c.engines.count(Engine::classical_series) ||
         c.engines.count(Engine::cpt);
}

// Extends a same-sign run of k nodes by up to `pad` nodes each side without reaching k = 0.
inline std::vector<double> pad_k(const std::vector<double>& nodes, double step, int pad, int& before) {
  std::vector<double> out;
  const double sign = nodes.front() < 0.0 ? -1.0 : 1.0;
  before = 0;
  for (int i = pad; i >= 1; --i) {
    const double k = nodes.front() - i * step;
    if (k * sign > 0.5 * step) {
      out.push_back(k);
      ++before;
    }
  }
  out.insert(out.end(), nodes.begin(), nodes.end());
  for (int i = 1; i <= pad; ++i) {
    const double k = nodes.back() + i * step;
    if (k * sign > 0.5 * step) out.push_back(k);
  }
  return out;
}

inline std::vector<double> pad_lambda(const std::vector<double>& nodes, double step, int pad, int& before) {
  std::vector<double> out;
  before = 0;
  for (int i = pad; i >= 1; --i) {
    const double l = nodes.front() - i * step;
    if (l > 0.5 * step) {
      out.push_back(l);
      ++before;
    }
  }
  out.insert(out.end(), nodes.begin(), nodes.end());
  for (int i = 1; i <= pad; ++i) out.push_back(nodes.back() + i * step);
  return out;
}

}  // namespace detail

/// Metric, determinant and curvature for every requested node. Curvature stencils use up
/// to four padding nodes per side and never span k = 0.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<double> ks, ls;
  double hk = cfg.k_step, hl = cfg.lambda_step;
  switch (cfg.mode) {
    case SweepMode::k_sweep:
      ks = axis_nodes(cfg.k_min, cfg.k_max, cfg.k_step);
      ls = {cfg.lambda};
      break;
    case SweepMode::lambda_sweep:
      ks = {cfg.k};
      ls = axis_nodes(cfg.lambda_min, cfg.lambda_max, cfg.lambda_step);
      break;
    case SweepMode::grid:
      ks = axis_nodes(cfg.k_min, cfg.k_max, cfg.k_step);
      ls = axis_nodes(cfg.lambda_min, cfg.lambda_max, cfg.lambda_step);
      break;
  }
  const bool need_cpt = cfg.engines.count(Engine::cpt) && !cfg.engines.count(Engine::classical_series);
  const detail::ClassicalTables tables = need_cpt ? detail::make_cpt_tables(cfg) : detail::ClassicalTables{};

  // rows[i * nl + j] for k index i, lambda index j
  std::vector<SweepRow> rows(ks.size() * ls.size());
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = 0; j < ls.size(); ++j) {
      auto& r = rows[i * ls.size() + j];
      r.k = ks[i];
      r.lambda = ls[j];
      if (std::abs(r.k) < 2.0 * hk) r.flags.push_back("near_k0");
    }

  // Same-sign segments of the k axis; k = 0 itself is evaluated but never differentiated.
  std::vector<std::vector<std::size_t>> segments;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int s = ks[i] < 0.0 ? -1 : ks[i] > 0.0 ? 1 : 0;
    const int prev = segments.empty() ? 2 : (ks[segments.back().back()] < 0.0 ? -1 : ks[segments.back().back()] > 0.0 ? 1 : 0);
    if (segments.empty() || s != prev || s == 0) segments.push_back({i});
    else segments.back().push_back(i);
  }

  int lbefore = 0;
  const std::vector<double> lpad = detail::pad_lambda(ls, hl, 4, lbefore);

  for (const auto& seg : segments) {
    std::vector<double> kseg;
    for (auto i : seg) kseg.push_back(ks[i]);
    const bool zero = kseg.front() == 0.0;
    int kbefore = 0;
    const std::vector<double> kpad = zero ? kseg : detail::pad_k(kseg, hk, 4, kbefore);
    const std::size_t nk = kpad.size(), nl = lpad.size();
    MetricField qf(static_cast<int>(nk), static_cast<int>(nl)), cf(static_cast<int>(nk), static_cast<int>(nl));
    std::vector<detail::NodeValue> qv(nk * nl), cv(nk * nl);
    parallel_for(nk * nl, cfg.threads, [&](std::size_t idx) {
      const SystemParams p{kpad[idx / nl], lpad[idx % nl], cfg.hbar};
      if (detail::has_quantum(cfg)) qv[idx] = detail::quantum_node(cfg, p);
      if (detail::has_classical(cfg)) cv[idx] = detail::classical_node(cfg, p, tables);
    });
    for (std::size_t a = 0; a < nk; ++a)
      for (std::size_t b = 0; b < nl; ++b) {
        const auto idx = a * nl + b;
        const int ia = static_cast<int>(a), ib = static_cast<int>(b);
        if (qv[idx].metric) qf.set(ia, ib, *qv[idx].metric);
        else qf.valid(ia, ib) = false;
        if (cv[idx].metric) cf.set(ia, ib, *cv[idx].metric);
        else cf.valid(ia, ib) = false;
      }
    std::optional<CurvatureField> qR, cR;
    if (!zero && nk >= 3 && nl >= 3) {
      const ParamGrid grid{kpad, lpad};
      CurvatureOptions co;
      co.forbid_k_zero = true;
      if (detail::has_quantum(cfg)) qR = scalar_curvature(qf, grid, co);
      if (detail::has_classical(cfg)) cR = scalar_curvature(cf, grid, co);
    }
    for (std::size_t s = 0; s < seg.size(); ++s) {
      const std::size_t a = s + static_cast<std::size_t>(kbefore);
      for (std::size_t j = 0; j < ls.size(); ++j) {
        const std::size_t b = j + static_cast<std::size_t>(lbefore);
        const auto idx = a * nl + b;
        auto& r = rows[seg[s] * ls.size() + j];
        r.q = qv[idx].metric;
        r.cl = cv[idx].metric;
        r.tail_q = qv[idx].tail;
        r.tail_cl = cv[idx].tail;
        if (r.q) r.det_q = metric_determinant(*r.q);
        if (r.cl) r.det_cl = metric_determinant(*r.cl);
        bool masked = false;
        if (qR && qR->valid(static_cast<int>(a), static_cast<int>(b))) r.R_q = qR->R(static_cast<int>(a), static_cast<int>(b));
        else if (detail::has_quantum(cfg)) masked = true;
        if (cR && cR->valid(static_cast<int>(a), static_cast<int>(b))) r.R_cl = cR->R(static_cast<int>(a), static_cast<int>(b));
        else if (detail::has_classical(cfg)) masked = true;
        if ((std::isfinite(r.tail_q) && r.tail_q > 1e-2) || (std::isfinite(r.tail_cl) && r.tail_cl > 1e-2))
          r.flags.push_back("tail_warn");
        if (masked) r.flags.push_back("masked_curvature");
      }
    }
  }
  return rows;
}

inline std::vector<double> sweep_column(const std::vector<SweepRow>& rows, const std::string& column) {
  using Getter = double (*)(const SweepRow&);
  static constexpr auto comp = [](const std::optional<MetricValue>& m, int c) {
    if (!m) return std::nan("");
    return c == 0 ? m->g11 : c == 1 ? m->g12 : m->g22;
  };
  static const std::map<std::string, Getter> getters{
      {"k", [](const SweepRow& r) { return r.k; }},
      {"lambda", [](const SweepRow& r) { return r.lambda; }},
      {"g11_q", [](const SweepRow& r) { return comp(r.q, 0); }},
      {"g12_q", [](const SweepRow& r) { return comp(r.q, 1); }},
      {"g22_q", [](const SweepRow& r) { return comp(r.q, 2); }},
      {"det_q", [](const SweepRow& r) { return r.det_q; }},
      {"R_q", [](const SweepRow& r) { return r.R_q; }},
      {"g11_cl", [](const SweepRow& r) { return comp(r.cl, 0); }},
      {"g12_cl", [](const SweepRow& r) { return comp(r.cl, 1); }},
      {"g22_cl", [](const SweepRow& r) { return comp(r.cl, 2); }},
      {"det_cl", [](const SweepRow& r) { return r.det_cl; }},
      {"R_cl", [](const SweepRow& r) { return r.R_cl; }},
      {"tail_q", [](const SweepRow& r) { return r.tail_q; }},
      {"tail_cl", [](const SweepRow& r) { return r.tail_cl; }},
  };
  const auto it = getters.find(column);
  if (it == getters.end()) throw UsageError("unknown column: " + column);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(it->second(r));
  return v;
}

struct Landmark {
  std::string column;
  ExtremumKind kind;
  double location;
  double value;
  double step;
};

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{"g11_q", "g12_q", "g22_q", "det_q", "R_q",
                                             "g11_cl", "g12_cl", "g22_cl", "det_cl", "R_cl"};
  return cols;
}

/// Extrema of each requested column along the swept axis of a 1D sweep.
inline std::vector<Landmark> landmarks(const std::vector<SweepRow>& rows, SweepMode mode,
                                       const std::vector<std::string>& columns = metric_columns()) {
  if (mode == SweepMode::grid) throw DomainError("landmarks need a one-dimensional sweep");
  const std::string axis = mode == SweepMode::k_sweep ? "k" : "lambda";
  const auto x = sweep_column(rows, axis);
  if (x.size() < 5) throw DomainError("landmarks need at least five sweep points");
  const double step = x[1] - x[0];
  std::vector<Landmark> out;
  for (const auto& c : columns) {
    const auto y = sweep_column(rows, c);
    for (const auto& e : find_extrema(x, y)) out.push_back({c, e.kind, e.location, e.value, step});
  }
  return out;
}

/// Landmark of the given kind in `column` closest to `near`, if any.
inline std::optional<Landmark> nearest_landmark(const std::vector<Landmark>& marks, const std::string& column,
                                                ExtremumKind kind, double near) {
  std::optional<Landmark> best;
  for (const auto& m : marks)
    if (m.column == column && m.kind == kind &&
        (!best || std::abs(m.location - near) < std::abs(best->location - near)))
      best = m;
  return best;
}

struct CompareRow {
  int m = 0;
  int mprime = -1;  // classical harmonic paired with quantum state m; -1 if unpaired
  double gap_q = 0.0;
  double gap_cl = std::nan("");  // m' omega
  double B1 = 0.0, B2 = 0.0;
  std::complex<double> beta1p{std::nan(""), 0.0}, beta2p{std::nan(""), 0.0};  // sqrt(2) beta^(m')
  MetricValue G;
  std::optional<MetricValue> Gcl;
};

struct CompareReport {
  SystemParams params;
  double action = 0.0;
  double omega = 0.0;
  std::vector<CompareRow> rows;
};

/// Quasi-degenerate doublet pairing for k < 0: quantum state m pairs with m' = m/2 for
/// even m. The lowest doublet must be split by less than 1e-6 (E2 - E0); higher doublets
/// below the barrier by less than a tenth of the gap to the next doublet.
inline void check_doublets(const SpectralResult& spec, const SystemParams& p, int M) {
  const auto& E = spec.energies;
  if (spec.n_converged < 3) throw ConvergenceError("too few converged states for doublet pairing");
  const double base = E(2) - E(0);
  if (!(E(1) - E(0) < 1e-6 * base)) throw ConsistencyError("lowest states are not a quasi-degenerate doublet");
  const double barrier = 0.0;  // V(0) in the original frame
  for (int m = 2; m + 1 <= M && m + 2 < spec.n_converged; m += 2) {
    if (E(m + 1) >= barrier) break;
    // tunnelling splittings grow quickly toward the barrier top; only demand a visible pairing
    if (!(E(m + 1) - E(m) < 0.1 * (E(m + 2) - E(m))))
      throw ConsistencyError("spectrum is not doublet-structured at state " + std::to_string(m));
  }
  (void)p;
}

inline CompareReport compare(const SystemParams& params, int M = 10, double action = std::nan("")) {
  params.validate();
  if (M < 1) throw DomainError("need at least one excited state");
  CompareReport rep;
  rep.params = params;
  rep.action = std::isnan(action) ? FAlpha::printed()[1] * params.hbar : action;

  QmtOptions qo;
  qo.states = std::max(M, 2);
  BasisSpec basis = default_basis(params, qo.states);
  EigenOptions eo;
  eo.requested = qo.states + 2;
  const SpectralResult spec = converged_spectrum(params, basis, eo);
  const TransitionData td = transition_elements(spec, params, qo.states);
  const QmtResult qr = qmt_sum(td);
  if (params.k < 0.0) check_doublets(spec, params, M);

  const Orbit orbit = integrate_orbit(rep.action, params, Well::left);
  rep.omega = orbit.omega;
  const FourierData fd = orbit_fourier(orbit, FourierOptions{32, 12, 1e-8});
  const auto terms = cmt_terms(fd, orbit.omega);

  for (int m = 1; m <= M; ++m) {
    CompareRow row;
    row.m = m;
    const auto mi = static_cast<std::size_t>(m);
    row.gap_q = td.gaps[mi];
    row.B1 = td.B1[mi];
    row.B2 = td.B2[mi];
    row.G = qr.terms[mi];
    if (params.k >= 0.0) row.mprime = m;
    else if (m % 2 == 0) row.mprime = m / 2;
    if (row.mprime >= 1 && row.mprime <= fd.max_harmonic()) {
      const auto mp = static_cast<std::size_t>(row.mprime);
      row.gap_cl = row.mprime * orbit.omega;
      row.beta1p = std::sqrt(2.0) * fd.beta1[mp];
      row.beta2p = std::sqrt(2.0) * fd.beta2[mp];
      row.Gcl = terms[mp];
    }
    rep.rows.push_back(row);
  }
  return rep;
}

inline void write_compare_csv(std::ostream& os, const CompareReport& rep) {
  os << "m,mprime,gap_q,gap_cl,B1,B2,beta1p_re,beta1p_im,beta2p_re,beta2p_im,G11,G12,G22,Gcl11,Gcl12,Gcl22\n";
  for (const auto& r : rep.rows) {
    os << r.m << ',' << (r.mprime >= 0 ? std::to_string(r.mprime) : "") << ',' << format_number(r.gap_q) << ','
       << format_number(r.gap_cl) << ',' << format_number(r.B1) << ',' << format_number(r.B2) << ','
       << format_number(r.beta1p.real()) << ',' << format_number(r.beta1p.imag()) << ','
       << format_number(r.beta2p.real()) << ',' << format_number(r.beta2p.imag()) << ',' << format_number(r.G.g11)
       << ',' << format_number(r.G.g12) << ',' << format_number(r.G.g22) << ','
       << (r.Gcl ? format_number(r.Gcl->g11) : "") << ',' << (r.Gcl ? format_number(r.Gcl->g12) : "") << ','
       << (r.Gcl ? format_number(r.Gcl->g22) : "") << '\n';
  }
}

}  // namespace qgeom
