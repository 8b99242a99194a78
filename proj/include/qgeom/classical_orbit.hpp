#pragma once

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qgeom/core_model.hpp"
#include "qgeom/error.hpp"
#include "qgeom/qmt_quantum.hpp"

namespace qgeom {

enum class Well { single, left, right };

inline const char* to_string(Well w) {
  switch (w) {
    case Well::single: return "single";
    case Well::left: return "left";
    case Well::right: return "right";
  }
  return "?";
}

/// The well an orbit lives in: `single` for k >= 0, otherwise left unless asked.
inline Well resolve_well(const SystemParams& params, Well requested) {
  if (params.k >= 0.0) return Well::single;
  return requested == Well::single ? Well::left : requested;
}

namespace detail {

// Geometry of a bound orbit written so that 2(E - V(q)) = 2 R(q) h^2 sin^2(theta) along
// q = c - h cos(theta), with R smooth and positive on the orbit. All roots are taken in
// cancellation-free forms.
struct OrbitGeometry {
  double q_minus, q_plus;  // turning points in the original frame
  double c, h;
  double lambda;
  double s1, s2;  // R(q) = (lambda/24)(|q| + s1)(|q| + s2) ; or R = lambda q^2/24 + s1 for k>=0
  bool single;

  [[nodiscard]] double R(double q) const {
    if (single) return lambda * q * q / 24.0 + s1;
    const double a = std::abs(q);  // both wells are mirror images
    return lambda / 24.0 * (a + s1) * (a + s2);
  }
};

inline OrbitGeometry orbit_geometry(double E, const SystemParams& params, Well well) {
  params.validate();
  const double k = params.k;
  const double lam = params.lambda;
  well = resolve_well(params, well);
  OrbitGeometry g{};
  g.lambda = lam;
  if (!std::isfinite(E)) throw DomainError("orbit energy must be finite");
  if (k >= 0.0) {
    if (!(E > 0.0)) throw DomainError("bound orbit needs E > 0");
    const double D = k * k / 4.0 + lam * E / 6.0;
    const double s = k / 2.0 + std::sqrt(D);
    const double xp = 2.0 * E / s;
    g.single = true;
    g.q_plus = std::sqrt(xp);
    g.q_minus = -g.q_plus;
    g.c = 0.0;
    g.h = g.q_plus;
    g.s1 = s / 2.0;
    g.s2 = 0.0;
    return g;
  }
  const double kappa = -k;
  const double vmin = -1.5 * k * k / lam;
  if (!(E > vmin)) throw DomainError("orbit energy below the well bottom");
  if (!(E < 0.0)) throw DomainError("orbit energy at or above the barrier top: not a single-well orbit");
  const double D = std::max(0.0, kappa * kappa / 4.0 + lam * E / 6.0);
  const double s = kappa / 2.0 + std::sqrt(D);
  const double inner = std::sqrt(-2.0 * E / s);
  const double outer = std::sqrt(12.0 * s / lam);
  g.single = false;
  g.s1 = outer;
  g.s2 = inner;
  if (well == Well::right) {
    g.q_minus = inner;
    g.q_plus = outer;
  } else {
    g.q_minus = -outer;
    g.q_plus = -inner;
  }
  g.c = 0.5 * (g.q_minus + g.q_plus);
  g.h = 0.5 * (g.q_plus - g.q_minus);
  return g;
}

// Midpoint rule in theta, refined until successive values agree; the integrand is a
// smooth even periodic function so convergence is geometric away from the separatrix.
template <class F>
double theta_quadrature(F&& f, const char* what) {
  int n = 16;
  double prev = 0.0;
  for (int i = 0; i < n; ++i) prev += f((i + 0.5) * std::numbers::pi / n);
  prev *= std::numbers::pi / n;
  while (n < (1 << 22)) {
    // Tripling the node count lets the previous midpoints be reused.
    const int m = 3 * n;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      if (i % 3 == 1) continue;
      sum += f((i + 0.5) * std::numbers::pi / m);
    }
    const double cur = prev / 3.0 + sum * std::numbers::pi / m;
    if (std::abs(cur - prev) <= 1e-14 * std::abs(cur)) return cur;
    prev = cur;
    n = m;
  }
  throw ConvergenceError(std::string(what) + " quadrature did not converge");
}

}  // namespace detail

/// Roots of V(q) = E bounding the orbit; for k < 0 in the requested well.
inline std::pair<double, double> turning_points(double E, const SystemParams& params, Well well = Well::single) {
  const auto g = detail::orbit_geometry(E, params, well);
  return {g.q_minus, g.q_plus};
}

inline double action_of_energy(double E, const SystemParams& params, Well well = Well::single) {
  const auto g = detail::orbit_geometry(E, params, well);
  if (g.h == 0.0) return 0.0;
  const double integral = detail::theta_quadrature(
      [&](double t) {
        const double s = std::sin(t);
        return std::sqrt(2.0 * g.R(g.c - g.h * std::cos(t))) * s * s;
      },
      "action");
  return g.h * g.h / std::numbers::pi * integral;
}

inline double period_of_energy(double E, const SystemParams& params, Well well = Well::single) {
  const auto g = detail::orbit_geometry(E, params, well);
  return 2.0 * detail::theta_quadrature(
                   [&](double t) { return 1.0 / std::sqrt(2.0 * g.R(g.c - g.h * std::cos(t))); }, "period");
}

/// Action of the separatrix orbit (k < 0): the supremum of single-well actions.
inline double separatrix_action(const SystemParams& params) {
  if (params.k >= 0.0) return std::numeric_limits<double>::infinity();
  return 4.0 * std::pow(-params.k, 1.5) / (std::numbers::pi * params.lambda);
}

inline double energy_of_action(double I, const SystemParams& params, Well well = Well::single) {
  params.validate();
  if (!(I > 0.0) || !std::isfinite(I)) throw DomainError("action must be positive");
  double lo, hi, flo, fhi;
  auto f = [&](double E) { return action_of_energy(E, params, well) - I; };
  if (params.k >= 0.0) {
    lo = 0.0;
    flo = -I;
    const double w = variational_frequency(SystemParams{params.k, params.lambda, 1.0});
    hi = std::max(w * I, 1e-300);
    fhi = f(hi);
    while (fhi < 0.0) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = f(hi);
    }
  } else {
    if (I >= separatrix_action(params))
      throw DomainError("action above the separatrix: orbit is not confined to one well");
    lo = potential_minimum(params);
    flo = -I;
    hi = 0.0;
    fhi = separatrix_action(params) - I;
  }
  std::uintmax_t iters = 200;
  const boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 4);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= 200) throw ConvergenceError("energy_of_action root find did not converge");
  return 0.5 * (a + b);
}

inline double omega_of_action(double I, const SystemParams& params, Well well = Well::single) {
  return 2.0 * std::numbers::pi / period_of_energy(energy_of_action(I, params, well), params, well);
}

struct Orbit {
  double E = 0.0;
  double I = 0.0;
  double T = 0.0;
  double omega = 0.0;
  double q_minus = 0.0;
  double q_plus = 0.0;
  Well well = Well::single;
  std::vector<double> samples;  // q at phi_j = -pi/2 + 2 pi j / n
  double energy_drift = 0.0;    // relative to E - V_min
};

/// Integrates Hamilton's equations over one period from the q_minus turning point, where
/// the angle is -pi/2, and samples q on a uniform angle grid of 2^log2_samples points.
inline Orbit integrate_orbit(double I, const SystemParams& params, Well well = Well::single, int log2_samples = 12) {
  if (log2_samples < 3 || log2_samples > 20) throw DomainError("sample exponent out of range");
  Orbit o;
  o.well = resolve_well(params, well);
  o.I = I;
  o.E = energy_of_action(I, params, o.well);
  o.T = period_of_energy(o.E, params, o.well);
  o.omega = 2.0 * std::numbers::pi / o.T;
  std::tie(o.q_minus, o.q_plus) = turning_points(o.E, params, o.well);

  using State = std::array<double, 2>;
  const double k = params.k;
  const double lam = params.lambda;
  auto rhs = [k, lam](const State& x, State& dx, double) {
    dx[0] = x[1];
    dx[1] = -(k * x[0] + lam * x[0] * x[0] * x[0] / 6.0);
  };
  const std::size_t n = std::size_t{1} << log2_samples;
  std::vector<double> times(n + 1);
  for (std::size_t j = 0; j <= n; ++j) times[j] = o.T * static_cast<double>(j) / static_cast<double>(n);
  o.samples.resize(n);
  State x{o.q_minus, 0.0};
  State last{};
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_fehlberg78<State>());
  ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), o.T / (8.0 * static_cast<double>(n)),
                       [&](const State& s, double t) {
                         const auto j = static_cast<std::size_t>(std::llround(t / o.T * static_cast<double>(n)));
                         if (j < n) o.samples[j] = s[0];
                         else last = s;
                       });
  const double scale = o.E - potential_minimum(params);
  const double e_end = 0.5 * last[1] * last[1] + potential(last[0], params);
  o.energy_drift = std::abs(e_end - o.E) / scale;
  if (o.energy_drift > 1e-10) throw ConvergenceError("orbit energy drift exceeded tolerance");
  return o;
}

/// beta_i^(m) for m = 0..M of O_1 = q^2/2 and O_2 = q^4/24 with O(phi) = sum_m beta^(m) e^{i m phi}.
struct FourierData {
  std::vector<std::complex<double>> beta1;
  std::vector<std::complex<double>> beta2;
  double tail = 0.0;  // |beta^(M)| relative to the dominant low harmonic

  [[nodiscard]] int max_harmonic() const { return static_cast<int>(beta1.size()) - 1; }
};

inline FourierData fourier_of_samples(const std::vector<double>& q, int M, double phase0 = -std::numbers::pi / 2) {
  const std::size_t n = q.size();
  if (n < 8 * static_cast<std::size_t>(M)) throw DomainError("need at least 8 samples per harmonic");
  FourierData fd;
  fd.beta1.assign(static_cast<std::size_t>(M + 1), {});
  fd.beta2 = fd.beta1;
  std::vector<double> o1(n), o2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double q2 = q[j] * q[j];
    o1[j] = q2 / 2.0;
    o2[j] = q2 * q2 / 24.0;
  }
  for (int m = 0; m <= M; ++m) {
    std::complex<double> s1{}, s2{};
    for (std::size_t j = 0; j < n; ++j) {
      const double phi = phase0 + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      const std::complex<double> e = std::polar(1.0, -m * phi);
      s1 += o1[j] * e;
      s2 += o2[j] * e;
    }
    fd.beta1[static_cast<std::size_t>(m)] = s1 / static_cast<double>(n);
    fd.beta2[static_cast<std::size_t>(m)] = s2 / static_cast<double>(n);
  }
  auto mag = [&](int m) {
    return std::max(std::abs(fd.beta1[static_cast<std::size_t>(m)]) / std::max(std::abs(fd.beta1[0]), 1e-300),
                    std::abs(fd.beta2[static_cast<std::size_t>(m)]) / std::max(std::abs(fd.beta2[0]), 1e-300));
  };
  double ref = 0.0;
  for (int m = 1; m <= std::min(2, M); ++m) ref = std::max(ref, mag(m));
  double tail = 0.0;
  for (int m = std::max(1, M - 1); m <= M; ++m) tail = std::max(tail, mag(m));
  fd.tail = ref > 0.0 ? tail / ref : 0.0;
  return fd;
}

struct FourierOptions {
  int harmonics = 32;     // M_cl
  int log2_samples = 12;  // 2^s points per period
  double tail_limit = 1e-10;
};

inline FourierData orbit_fourier(const Orbit& orbit, const FourierOptions& opt = {}) {
  FourierData fd = fourier_of_samples(orbit.samples, opt.harmonics);
  if (fd.tail > opt.tail_limit) throw ConvergenceError("Fourier tail not decayed: aliasing risk");
  return fd;
}

inline FourierData orbit_fourier(double I, const SystemParams& params, Well well = Well::single,
                                 const FourierOptions& opt = {}) {
  return orbit_fourier(integrate_orbit(I, params, well, opt.log2_samples), opt);
}

/// Re-expresses the coefficients for an angle origin moved by delta.
inline FourierData shift_angle_origin(FourierData fd, double delta) {
  for (std::size_t m = 0; m < fd.beta1.size(); ++m) {
    const auto ph = std::polar(1.0, -static_cast<double>(m) * delta);
    fd.beta1[m] *= ph;
    fd.beta2[m] *= ph;
  }
  return fd;
}

/// Per-harmonic CMT contributions 2 Re(beta_i conj beta_j)/(m omega)^2, index m >= 1.
inline std::vector<MetricValue> cmt_terms(const FourierData& fd, double omega) {
  std::vector<MetricValue> terms(fd.beta1.size());
  for (std::size_t m = 1; m < fd.beta1.size(); ++m) {
    const double w = static_cast<double>(m) * omega;
    const double inv = 2.0 / (w * w);
    const auto& a = fd.beta1[m];
    const auto& b = fd.beta2[m];
    terms[m] = {std::norm(a) * inv, (a * std::conj(b)).real() * inv, std::norm(b) * inv};
  }
  return terms;
}

inline MetricValue cmt_numeric(const FourierData& fd, double omega) {
  MetricValue g;
  for (const auto& t : cmt_terms(fd, omega)) g += t;
  return g;
}

/// Convenience: classical metric at action I straight from the orbit.
inline MetricValue classical_metric(double I, const SystemParams& params, Well well = Well::single,
                                    const FourierOptions& opt = {}) {
  const Orbit o = integrate_orbit(I, params, well, opt.log2_samples);
  return cmt_numeric(orbit_fourier(o, opt), o.omega);
}

}  // namespace qgeom
