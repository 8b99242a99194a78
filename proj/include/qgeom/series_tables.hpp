#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qgeom/coefficient_data.hpp"
#include "qgeom/core_model.hpp"
#include "qgeom/cpt_engine.hpp"
#include "qgeom/error.hpp"
#include "qgeom/qmt_quantum.hpp"

namespace qgeom {

/// Coefficients of one table kind, indexed by component ("11", "12", "22" or "R") and alpha.
struct CoefficientTable {
  char kind = '?';
  std::map<std::string, std::vector<double>> values;

  [[nodiscard]] const std::vector<double>& column(const std::string& comp) const {
    const auto it = values.find(comp);
    if (it == values.end()) throw DomainError(std::string("table ") + kind + " has no component " + comp);
    return it->second;
  }

  void dump(std::ostream& os) const {
    char buf[64];
    for (const auto& [comp, col] : values)
      for (std::size_t a = 0; a < col.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%.12g", col[a]);
        os << kind << ' ' << comp << ' ' << a << ' ' << buf << '\n';
      }
  }
};

/// Parses "kind component alpha value" lines; blank lines and '#' comments are skipped.
/// Alphas must be contiguous from 0 within each column.
inline std::map<char, CoefficientTable> parse_tables(std::istream& in) {
  std::map<char, CoefficientTable> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string kind, comp;
    int alpha = -1;
    double value = 0.0;
    if (!(ls >> kind >> comp >> alpha >> value) || kind.size() != 1 || alpha < 0)
      throw DomainError("malformed table line " + std::to_string(lineno));
    auto& table = out[kind[0]];
    table.kind = kind[0];
    auto& col = table.values[comp];
    if (static_cast<int>(col.size()) != alpha)
      throw DomainError("non-contiguous alpha on table line " + std::to_string(lineno));
    col.push_back(value);
  }
  return out;
}

inline const std::map<char, CoefficientTable>& printed_tables() {
  static const std::map<char, CoefficientTable> tables = [] {
    std::istringstream in(data::kPrintedTables);
    return parse_tables(in);
  }();
  return tables;
}

inline const CoefficientTable& printed_table(char kind) {
  const auto& t = printed_tables();
  const auto it = t.find(kind);
  if (it == t.end()) throw DomainError(std::string("unknown table kind ") + kind);
  return it->second;
}

/// Table of kind 'b' or 'c' from the perturbation engine output.
inline CoefficientTable table_from_cpt(const CmtCoefficients& c) {
  CoefficientTable t;
  t.kind = c.branch == Branch::k_positive ? 'b' : 'c';
  const char* names[3] = {"11", "12", "22"};
  for (std::size_t i = 0; i < 3; ++i) t.values[names[i]] = c.values[i];
  return t;
}

/// f_1..f_14 with I^p identified as (f_p hbar)^p. Index 0 unused.
struct FAlpha {
  std::array<double, 15> f{};
  std::array<std::vector<double>, 15> candidates;

  static FAlpha printed() {
    FAlpha fa;
    for (int p = 1; p <= 14; ++p) fa.f[static_cast<std::size_t>(p)] = data::kPrintedF[p - 1];
    return fa;
  }
  [[nodiscard]] double operator[](int p) const {
    if (p < 1 || p > 14) throw DomainError("no identification for action power " + std::to_string(p));
    return f[static_cast<std::size_t>(p)];
  }
};

/// Matches hbar^2 g = g_cl order by order: I^{a+2}, I^{a+3}, I^{a+4} against the 11, 12, 22
/// ratios a/b; each power takes the mean of its candidate roots. f_1 = 1/2 by convention.
inline FAlpha fit_f_alpha(const CoefficientTable& quantum, const CoefficientTable& classical, double hbar = 1.0) {
  FAlpha fa;
  const std::array<std::pair<const char*, int>, 3> comps{{{"11", 2}, {"12", 3}, {"22", 4}}};
  for (const auto& [comp, shift] : comps) {
    const auto& a = quantum.column(comp);
    const auto& b = classical.column(comp);
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t al = 0; al < n; ++al) {
      const int p = static_cast<int>(al) + shift;
      if (p > 14 || b[al] == 0.0 || a[al] / b[al] <= 0.0) continue;
      fa.candidates[static_cast<std::size_t>(p)].push_back(hbar * std::pow(a[al] / b[al], 1.0 / p));
    }
  }
  fa.f[1] = 0.5 * hbar;
  for (int p = 2; p <= 14; ++p) {
    const auto& c = fa.candidates[static_cast<std::size_t>(p)];
    if (c.empty()) {
      fa.f[static_cast<std::size_t>(p)] = std::nan("");
      continue;
    }
    double s = 0.0;
    for (double v : c) s += v;
    fa.f[static_cast<std::size_t>(p)] = s / static_cast<double>(c.size()) / hbar;
  }
  return fa;
}

struct SeriesValue {
  MetricValue metric;
  double last_term = 0.0;  // largest |last included term| / |sum| over components
  bool beyond_radius = false;
};

namespace detail {

inline double relative_last(double last, double sum) { return sum != 0.0 ? std::abs(last / sum) : 0.0; }

}  // namespace detail

/// Quantum metric for k > 0 from the a-table with x = hbar lambda / k^{3/2}.
inline SeriesValue eval_qmt_series(const SystemParams& params, const CoefficientTable& table = printed_table('a')) {
  params.validate();
  if (!(params.k > 0.0)) throw DomainError("quantum metric series needs k > 0");
  const double x = params.hbar * params.lambda / std::pow(params.k, 1.5);
  const std::array<double, 3> pre{1.0 / (params.k * params.k), params.hbar / std::pow(params.k, 2.5),
                                  params.hbar * params.hbar / std::pow(params.k, 3.0)};
  const char* names[3] = {"11", "12", "22"};
  SeriesValue out;
  out.beyond_radius = x > 0.5;
  std::array<double, 3> g{};
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& col = table.column(names[c]);
    double s = 0.0, last = 0.0, xp = 1.0;
    for (std::size_t a = 0; a < col.size(); ++a) {
      last = ((a % 2) ? -1.0 : 1.0) * col[a] * xp;
      s += last;
      xp *= x;
    }
    g[c] = pre[c] * s;
    out.last_term = std::max(out.last_term, detail::relative_last(last, s));
  }
  out.metric = {g[0], g[1], g[2]};
  return out;
}

enum class ActionMode { literal, identified };

/// Action value used by the classical series: a literal I, or I^p -> (f_p hbar)^p.
struct ActionSpec {
  ActionMode mode = ActionMode::identified;
  double I = 0.5;
  FAlpha f = FAlpha::printed();

  [[nodiscard]] double power(int p, double hbar) const {
    if (mode == ActionMode::literal) return std::pow(I, p);
    return std::pow(f[p] * hbar, p);
  }
};

/// Classical metric series: b-table (k > 0, alternating) or c-table (k < 0).
inline SeriesValue eval_cmt_series(Branch branch, const SystemParams& params, const ActionSpec& action = {},
                                   const CoefficientTable* table = nullptr) {
  params.validate();
  const bool pos = branch == Branch::k_positive;
  if (pos && !(params.k > 0.0)) throw DomainError("k>0 classical series evaluated at k <= 0");
  if (!pos && !(params.k < 0.0)) throw DomainError("k<0 classical series evaluated at k >= 0");
  const CoefficientTable& t = table ? *table : printed_table(pos ? 'b' : 'c');
  const double kap = std::abs(params.k);
  const double lam = params.lambda;
  const char* names[3] = {"11", "12", "22"};
  // group (I lambda / kappa^{3/2}); prefactor and base I power per component
  std::array<double, 3> pre;
  std::array<int, 3> base;
  if (pos) {
    pre = {1.0 / (kap * kap), 1.0 / std::pow(kap, 2.5), 1.0 / std::pow(kap, 3.0)};
    base = {2, 3, 4};
  } else {
    pre = {1.0 / (std::sqrt(kap) * lam), std::sqrt(kap) / (lam * lam), std::pow(kap, 1.5) / (lam * lam * lam)};
    base = {1, 1, 1};
  }
  const double y = lam / std::pow(kap, 1.5);
  SeriesValue out;
  out.beyond_radius = action.power(1, params.hbar) * y > 0.5;
  std::array<double, 3> g{};
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& col = t.column(names[c]);
    double s = 0.0, last = 0.0, yp = 1.0;
    for (std::size_t a = 0; a < col.size(); ++a) {
      const double sign = (pos && (a % 2)) ? -1.0 : 1.0;
      last = sign * col[a] * yp * action.power(base[c] + static_cast<int>(a), params.hbar);
      s += last;
      yp *= y;
    }
    g[c] = pre[c] * s;
    out.last_term = std::max(out.last_term, detail::relative_last(last, s));
  }
  out.metric = {g[0], g[1], g[2]};
  return out;
}

enum class CurvatureKind { quantum, classical };

/// Scalar curvature series: quantum (d, k > 0); classical h (k > 0) or l (k < 0).
inline double eval_curvature_series(CurvatureKind kind, const SystemParams& params, double* last_term = nullptr) {
  params.validate();
  const double kap = std::abs(params.k);
  if (kap == 0.0) throw DomainError("curvature series diverge at k = 0");
  const double x = params.hbar * params.lambda / std::pow(kap, 1.5);
  const CoefficientTable* t;
  bool alternating = true;
  if (kind == CurvatureKind::quantum) {
    if (!(params.k > 0.0)) throw DomainError("quantum curvature series needs k > 0");
    t = &printed_table('d');
  } else if (params.k > 0.0) {
    t = &printed_table('h');
  } else {
    t = &printed_table('l');
    alternating = false;
  }
  const auto& col = t->column("R");
  double s = 0.0, last = 0.0, xp = 1.0;
  for (std::size_t a = 0; a < col.size(); ++a) {
    const double sign = alternating ? ((a % 2) ? 1.0 : -1.0) : 1.0;
    last = sign * col[a] * xp;
    s += last;
    xp *= x;
  }
  if (last_term) *last_term = detail::relative_last(last, s);
  return s;
}

/// Unnormalised ground state through order lambda^4 (k > 0):
///   exp(-sqrt(k) q^2 / 2) [1 - lambda q^2 P1/(96 k) + lambda^2 q^2 P2/(55296 k^{5/2})
///                          - lambda^3 q^2 P3/(5308416 k^4) + lambda^4 q^2 P4/(6115295232 k^{11/2})]
inline double perturbative_groundstate(double q, double k, double lambda, int order = 4) {
  if (!(k > 0.0)) throw DomainError("perturbative ground state needs k > 0");
  if (order < 0 || order > 4) throw DomainError("perturbative ground state order must be 0..4");
  const double s = std::sqrt(k);
  const double q2 = q * q;
  const double q4 = q2 * q2, q6 = q4 * q2, q8 = q4 * q4, q10 = q8 * q2, q12 = q6 * q6, q14 = q12 * q2;
  const double P1 = s * q2 + 3.0;
  const double P2 = 3.0 * k * s * q6 + 26.0 * k * q4 + 93.0 * s * q2 + 252.0;
  const double P3 = k * k * s * q10 + 141.0 * k * s * q6 + 17.0 * k * k * q8 + 813.0 * k * q4 + 2916.0 * s * q2 + 7992.0;
  const double P4 = 3.0 * k * k * k * s * q14 + 1198.0 * k * k * s * q10 + 82755.0 * k * s * q6 + 84.0 * k * k * k * q12 +
                    11748.0 * k * k * q8 + 443064.0 * k * q4 + 1599552.0 * s * q2 + 4447440.0;
  const double terms[4] = {-lambda * q2 * P1 / (96.0 * k),
                           lambda * lambda * q2 * P2 / (55296.0 * std::pow(k, 2.5)),
                           -std::pow(lambda, 3) * q2 * P3 / (5308416.0 * std::pow(k, 4.0)),
                           std::pow(lambda, 4) * q2 * P4 / (6115295232.0 * std::pow(k, 5.5))};
  double bracket = 1.0;
  for (int i = 0; i < order; ++i) bracket += terms[i];
  return std::exp(-s * q2 / 2.0) * bracket;
}

}  // namespace qgeom
