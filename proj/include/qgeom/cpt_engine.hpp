#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "qgeom/error.hpp"
#include "qgeom/qmt_quantum.hpp"
#include "qgeom/trig_series.hpp"

namespace qgeom {

enum class Branch { k_positive, k_negative };

inline const char* to_string(Branch b) { return b == Branch::k_positive ? "k>0" : "k<0"; }

/// Branch and truncation order. The coupling is lambda for k > 0 and sqrt(lambda) for
/// k < 0, where the expansion runs about the left well minimum.
struct BranchSpec {
  Branch branch = Branch::k_positive;
  int order = 2;

  void validate() const {
    if (order < 1) throw DomainError("perturbation order must be at least 1");
    if (order > 16) throw DomainError("perturbation order above 16 is not supported");
  }
};

using Series = TrigSeries<Rational>;

namespace detail {

inline Series sin_power(int p, Monomial mono, const Rational& c) {
  Series s = Series::constant(c, mono);
  const Series sn = Series::harmonic(1, Phase::sin_, 1);
  for (int i = 0; i < p; ++i) s = s.times(sn);
  return s;
}

// Unperturbed data of one branch in the action-angle variables of H0 = omega0 * I.
struct BranchModel {
  Monomial omega0;                 // omega0 = coefficient 1 times this
  Monomial inv_omega0;
  std::vector<Series> H;           // H[j-1] carries eps^j
  Series q;                        // q(phi0, I) in the original frame
  std::array<int, 2> lead{0, 0};   // lowest coupling power of the oscillating part of O1, O2
};

inline BranchModel branch_model(Branch b) {
  BranchModel m;
  if (b == Branch::k_positive) {
    m.omega0 = {0, 0, 2, 0, 0};
    m.inv_omega0 = {0, 0, -2, 0, 0};
    m.H.push_back(sin_power(4, {4, 1, -4, 0, 0}, Rational(1, 6)));
    m.q = sin_power(1, {1, 0, -1, 2, 0}, 1);
    m.lead = {0, 0};
  } else {
    m.omega0 = {0, 0, 2, 2, 0};
    m.inv_omega0 = {0, 0, -2, -2, 0};
    m.H.push_back(sin_power(3, {3, 1, -1, 1, -1}, -1));
    m.H.push_back(sin_power(4, {4, 2, -4, 0, 0}, Rational(1, 12)));
    // q = Q - q*, Q = 2^{1/4} I^{1/2} kappa^{-1/4} sin phi0, q* = sqrt(6 kappa) / eps
    m.q = sin_power(1, {1, 0, -1, 1, 0}, 1) - Series::constant(1, {0, -1, 2, 2, 1});
    m.lead = {-1, -3};
  }
  return m;
}

inline Series power(const Series& s, int p, int cut) {
  Series r = Series::constant(1);
  for (int i = 0; i < p; ++i) r = r.times(s, cut);
  return r;
}

// f(I + dI) = sum_n (1/n!) d^n f/dI^n dI^n, with dI of order >= 1.
inline Series compose_action(const Series& f, const Series& dI, int cut) {
  Series out = f.truncated(cut);
  Series deriv = f;
  Series dpow = Series::constant(1);
  const int low = f.empty() ? 0 : f.min_order();
  for (int n = 1; low + n <= cut && !dI.empty(); ++n) {
    deriv = deriv.d_action();
    if (deriv.empty()) break;
    dpow = dpow.times(dI, cut - low);
    if (dpow.empty()) break;
    Rational inv_fact = 1;
    for (int i = 2; i <= n; ++i) inv_fact /= i;
    out += deriv.times(dpow, cut).scaled(inv_fact);
  }
  return out;
}

}  // namespace detail

struct WFunctions {
  BranchSpec spec;
  std::vector<Series> W;       // W[mu-1], each carrying eps^mu
  std::vector<Series> energy;  // <Phi_mu>, the order-mu energy corrections
  Monomial omega0;
};

/// Solves omega0 dW_mu/dphi0 + Phi_mu = <Phi_mu> order by order.
inline WFunctions w_functions(const BranchSpec& spec) {
  spec.validate();
  const auto model = detail::branch_model(spec.branch);
  WFunctions out;
  out.spec = spec;
  out.omega0 = model.omega0;
  Series dI;  // sum of dW_nu/dphi0 for nu < mu
  for (int mu = 1; mu <= spec.order; ++mu) {
    Series total;
    for (std::size_t j = 0; j < model.H.size(); ++j)
      total += detail::compose_action(model.H[j], dI, mu);
    const Series phi = total.order(mu);
    const Series secular = phi.average();
    const Series W = (phi - secular).integrate_phi().scaled(-1, model.inv_omega0);
    if (!W.average().empty()) throw ConsistencyError("generating function with non-zero mean");
    out.W.push_back(W);
    out.energy.push_back(secular);
    dI += W.d_phi();
  }
  return out;
}

/// I0 = I + dI and phi = phi0 + dphi as truncated series in (phi0, I).
struct CanonicalTransform {
  Series dI;
  Series dphi;
};

inline CanonicalTransform canonical_transform(const WFunctions& w) {
  CanonicalTransform ct;
  for (const auto& W : w.W) {
    ct.dI += W.d_phi();
    ct.dphi += W.d_action();
  }
  return ct;
}

struct Deformation {
  std::array<Series, 2> O;  // q^2/2 and q^4/24
  std::array<int, 2> cut{};  // highest coupling power kept
};

inline Deformation deformation_series(const BranchSpec& spec, const CanonicalTransform& ct) {
  const auto model = detail::branch_model(spec.branch);
  Deformation d;
  for (int i = 0; i < 2; ++i) d.cut[static_cast<std::size_t>(i)] = model.lead[static_cast<std::size_t>(i)] + spec.order;
  const Series q2 = model.q.times(model.q);
  const Series o1 = q2.scaled(Rational(1, 2));
  const Series o2 = q2.times(q2).scaled(Rational(1, 24));
  d.O[0] = detail::compose_action(o1, ct.dI, d.cut[0]);
  d.O[1] = detail::compose_action(o2, ct.dI, d.cut[1]);
  return d;
}

/// beta_i^(m) = re + i im for m = 0..max, each a series in I and the coupling.
struct BetaSeries {
  std::array<std::vector<Series>, 2> re;
  std::array<std::vector<Series>, 2> im;

  [[nodiscard]] int max_harmonic() const { return static_cast<int>(re[0].size()) - 1; }
  [[nodiscard]] std::complex<double> eval(int i, int m, double I, double coupling, double kappa) const {
    const auto ii = static_cast<std::size_t>(i);
    const auto mm = static_cast<std::size_t>(m);
    if (mm >= re[ii].size()) return {};
    return {re[ii][mm].eval(0, I, coupling, kappa), im[ii][mm].eval(0, I, coupling, kappa)};
  }
};

/// <J O_i e^{-i m phi}>_{phi0} with J = dphi/dphi0 and e^{-i m phi} expanded about phi0:
///   cos(m phi0 + m d) = sum_n (m d)^n/n! cos(m phi0 + n pi/2), likewise for sin.
inline BetaSeries beta_series(const BranchSpec& spec, const CanonicalTransform& ct, const Deformation& def) {
  const Series dphi = ct.dphi.truncated(spec.order);
  const Series J = Series::constant(1) + dphi.d_phi();
  BetaSeries out;
  const auto model = detail::branch_model(spec.branch);
  for (std::size_t i = 0; i < 2; ++i) {
    const int cut = def.cut[i];
    // Terms below the leading oscillating order are phi0-independent constants. Their
    // beta^(m != 0) vanish identically, but a truncated J would leave partial remainders,
    // so they bypass the expansion and only enter beta^(0).
    Series below, body;
    for (const auto& [key, c] : def.O[i].terms())
      (key.mono.eps < model.lead[i] ? below : body).add(key.m, key.phase, key.mono, c);
    if (below.max_harmonic() != 0) throw ConsistencyError("angle-dependent term below the leading order");
    std::vector<Series> X;  // J O d^n / n!
    X.push_back(J.times(body, cut));
    for (int n = 1; n <= spec.order; ++n) {
      Series next = X.back().times(dphi, cut).scaled(Rational(1, n));
      if (next.empty()) break;
      X.push_back(std::move(next));
    }
    int mmax = 0;
    for (const auto& x : X) mmax = std::max(mmax, x.max_harmonic());
    out.re[i].assign(static_cast<std::size_t>(mmax + 1), Series{});
    out.im[i] = out.re[i];
    for (int m = 0; m <= mmax; ++m) {
      Series A, B;
      Rational mpow = 1;
      for (std::size_t n = 0; n < X.size(); ++n) {
        if (n > 0) mpow *= m;
        if (mpow == 0) break;
        // cos(x + n pi/2) and sin(x + n pi/2) as (+-)cos / (+-)sin of x
        const int r = static_cast<int>(n % 4);
        const Phase cphase = (r % 2 == 0) ? Phase::cos_ : Phase::sin_;
        const Phase sphase = (r % 2 == 0) ? Phase::sin_ : Phase::cos_;
        const Rational csign = (r == 0 || r == 3) ? 1 : -1;
        const Rational ssign = (r == 0 || r == 1) ? 1 : -1;
        A += X[n].average_with(m, cphase).scaled(mpow * csign);
        B += X[n].average_with(m, sphase).scaled(mpow * ssign);
      }
      if (m == 0) A += below;
      out.re[i][static_cast<std::size_t>(m)] = A;
      out.im[i][static_cast<std::size_t>(m)] = B.scaled(-1);
    }
  }
  return out;
}

/// E(I) and omega(I) = dE/dI, plus 1/omega^2 expanded to the branch order.
struct FrequencySeries {
  Series energy;
  Series omega;
  Series inv_omega2;
};

inline FrequencySeries frequency_series(const WFunctions& w) {
  FrequencySeries f;
  f.energy = Series::constant(1, w.omega0.times({2, 0, 0, 0, 0}));
  for (const auto& e : w.energy) f.energy += e;
  f.omega = f.energy.d_action();
  Monomial inv = w.omega0;
  inv.k4 = -inv.k4;
  inv.t4 = -inv.t4;
  inv.h2 = -inv.h2;
  // u = omega/omega0 - 1 ; 1/omega^2 = omega0^-2 sum (n+1)(-u)^n
  const Series u = (f.omega.scaled(1, inv) - Series::constant(1)).truncated(w.spec.order);
  Series sum = Series::constant(1);
  Series upow = Series::constant(1);
  for (int n = 1; n <= w.spec.order; ++n) {
    upow = upow.times(u, w.spec.order).scaled(-1);
    if (upow.empty()) break;
    sum += upow.scaled(n + 1);
  }
  f.inv_omega2 = sum.scaled(1, inv.times(inv));
  return f;
}

/// Everything the engine produces for one branch and order.
struct CptResult {
  BranchSpec spec;
  WFunctions w;
  CanonicalTransform ct;
  Deformation deformation;
  BetaSeries beta;
  FrequencySeries frequency;
  std::array<Series, 3> g;  // g11, g12, g22
};

/// g_ij = sum_{m >= 1} 2 Re(beta_i^(m) conj beta_j^(m)) / (m omega)^2 as a series.
inline std::array<Series, 3> cmt_series_from(const BranchSpec& spec, const BetaSeries& beta,
                                             const FrequencySeries& freq, const std::array<int, 2>& lead) {
  std::array<Series, 3> g;
  const std::array<std::pair<int, int>, 3> idx{{{0, 0}, {0, 1}, {1, 1}}};
  for (std::size_t c = 0; c < 3; ++c) {
    const auto [i, j] = idx[c];
    const int cut = lead[static_cast<std::size_t>(i)] + lead[static_cast<std::size_t>(j)] + spec.order;
    Series sum;
    const int mmax = std::min(beta.max_harmonic(), static_cast<int>(beta.re[static_cast<std::size_t>(j)].size()) - 1);
    for (int m = 1; m <= mmax; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const auto& ai = beta.re[static_cast<std::size_t>(i)][mi];
      const auto& bi = beta.im[static_cast<std::size_t>(i)][mi];
      const auto& aj = beta.re[static_cast<std::size_t>(j)][mi];
      const auto& bj = beta.im[static_cast<std::size_t>(j)][mi];
      Series prod = ai.times(aj, cut) + bi.times(bj, cut);
      sum += prod.scaled(Rational(2, m * m));
    }
    // 1/omega^2 has non-negative coupling powers; the product keeps the same cut.
    g[c] = sum.times(freq.inv_omega2, cut);
  }
  return g;
}

inline CptResult run_cpt(const BranchSpec& spec) {
  CptResult r;
  r.spec = spec;
  r.w = w_functions(spec);
  r.ct = canonical_transform(r.w);
  r.deformation = deformation_series(spec, r.ct);
  r.beta = beta_series(spec, r.ct, r.deformation);
  r.frequency = frequency_series(r.w);
  const auto model = detail::branch_model(spec.branch);
  r.g = cmt_series_from(spec, r.beta, r.frequency, model.lead);
  return r;
}

/// Coefficient table in the normalisation of the classical metric series:
///   k > 0: g = P_ij sum_a (-1)^a b_a (I lambda / k^{3/2})^a, P = I^2/k^2, I^3/k^{5/2}, I^4/k^3
///   k < 0: g = P_ij sum_a c_a (I lambda / (-k)^{3/2})^a,
///          P = I/((-k)^{1/2} lambda), (-k)^{1/2} I/lambda^2, (-k)^{3/2} I/lambda^3
struct CmtCoefficients {
  Branch branch = Branch::k_positive;
  std::array<std::vector<double>, 3> values;
};

inline CmtCoefficients extract_cmt_table(const CptResult& r) {
  CmtCoefficients t;
  t.branch = r.spec.branch;
  const bool pos = r.spec.branch == Branch::k_positive;
  // (I power, coupling power, kappa power) of each prefactor, in halves/units/quarters
  const std::array<std::array<int, 3>, 3> pre = pos ? std::array<std::array<int, 3>, 3>{{{4, 0, -8}, {6, 0, -10}, {8, 0, -12}}}
                                                    : std::array<std::array<int, 3>, 3>{{{2, -2, -2}, {2, -4, 2}, {2, -6, 6}}};
  const int step_eps = pos ? 1 : 2;  // coupling power per unit of the group
  for (std::size_t c = 0; c < 3; ++c) {
    const Series& g = r.g[c];
    Series accounted;
    const int top = g.empty() ? -1 : (g.max_order() - pre[c][1]) / step_eps;
    for (int a = 0; a <= top; ++a) {
      const int i2 = pre[c][0] + 2 * a;
      const int eps = pre[c][1] + step_eps * a;
      const int k4 = pre[c][2] - 6 * a;
      double v = g.coefficient_of(0, Phase::cos_, i2, eps, k4);
      for (const auto& [key, coef] : g.terms())
        if (key.mono.i2 == i2 && key.mono.eps == eps && key.mono.k4 == k4)
          accounted.add(key.m, key.phase, key.mono, coef);
      if (pos && (a % 2 == 1)) v = -v;
      t.values[c].push_back(v);
    }
    if (!(accounted == g))
      throw ConsistencyError("classical metric series has terms outside the expected scaling");
  }
  return t;
}

/// Plain-text dump of the generated series, one term per line.
inline void dump_cpt(std::ostream& os, const CptResult& r) {
  os << "# branch " << to_string(r.spec.branch) << " order " << r.spec.order << '\n';
  os << "# columns: coefficient m phase I-exp coupling-exp kappa-exp 2-exp 3-exp\n";
  for (std::size_t mu = 0; mu < r.w.W.size(); ++mu) {
    os << "[W" << mu + 1 << "]\n";
    r.w.W[mu].dump(os);
  }
  os << "[energy]\n";
  r.frequency.energy.dump(os);
  os << "[omega]\n";
  r.frequency.omega.dump(os);
  for (int i = 0; i < 2; ++i) {
    os << "[O" << i + 1 << "]\n";
    r.deformation.O[static_cast<std::size_t>(i)].dump(os);
  }
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m <= r.beta.max_harmonic(); ++m) {
      const auto& re = r.beta.re[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
      const auto& im = r.beta.im[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
      if (re.empty() && im.empty()) continue;
      os << "[beta" << i + 1 << "^" << m << " re]\n";
      re.dump(os);
      os << "[beta" << i + 1 << "^" << m << " im]\n";
      im.dump(os);
    }
  const char* names[3] = {"g11", "g12", "g22"};
  for (std::size_t c = 0; c < 3; ++c) {
    os << '[' << names[c] << "]\n";
    r.g[c].dump(os);
  }
}

/// Numerical consistency of the transform at (phi0, I): the Jacobian identity
/// dphi/dphi0 = dI0/dI, and H(I0, phi0) = E(I). Returns the larger residual.
inline double transform_residual(const CptResult& r, double phi0, double I, double coupling, double kappa) {
  const auto model = detail::branch_model(r.spec.branch);
  const double jac_a = 1.0 + r.ct.dphi.d_phi().eval(phi0, I, coupling, kappa);
  const double jac_b = 1.0 + r.ct.dI.d_action().eval(phi0, I, coupling, kappa);
  const double I0 = I + r.ct.dI.eval(phi0, I, coupling, kappa);
  double H = model.omega0.eval(1.0, coupling, kappa) * I0;
  for (const auto& h : model.H) H += h.eval(phi0, I0, coupling, kappa);
  const double E = r.frequency.energy.eval(0.0, I, coupling, kappa);
  return std::max(std::abs(jac_a - jac_b), std::abs(H - E) / std::max(std::abs(E), 1e-300));
}

}  // namespace qgeom
