#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <map>
#include <vector>

namespace oracle {

// Fock state as a sparse map n -> amplitude; x = (a + a^dagger) / sqrt(2 omega) with hbar = 1.
using Ket = std::map<int, double>;

inline Ket apply_x(const Ket& in, double omega, double hbar = 1.0) {
  Ket out;
  const double s = std::sqrt(hbar / (2.0 * omega));
  for (const auto& [n, c] : in) {
    if (n > 0) out[n - 1] += s * std::sqrt(static_cast<double>(n)) * c;
    out[n + 1] += s * std::sqrt(static_cast<double>(n + 1)) * c;
  }
  return out;
}

// <m| q^power |0>
inline double q_power_element(int m, int power, double omega = 1.0, double hbar = 1.0) {
  Ket k{{0, 1.0}};
  for (int i = 0; i < power; ++i) k = apply_x(k, omega, hbar);
  const auto it = k.find(m);
  return it == k.end() ? 0.0 : it->second;
}

// Harmonic ground-state QMT from the closed-form m = 2, 4 channels, gaps m sqrt(k).
struct Metric {
  double g11, g12, g22;
};
inline Metric harmonic_qmt(double k) {
  const double w = std::sqrt(k);
  Metric g{0, 0, 0};
  for (int m : {2, 4}) {
    const double b1 = 0.5 * q_power_element(m, 2, w);
    const double b2 = q_power_element(m, 4, w) / 24.0;
    const double gap = m * w;
    g.g11 += b1 * b1 / (gap * gap);
    g.g12 += b1 * b2 / (gap * gap);
    g.g22 += b2 * b2 / (gap * gap);
  }
  return g;
}

// First-order canonical perturbation theory for V = k q^2/2 + lambda q^4/24, k > 0.
inline double first_order_energy(double I, double k, double lambda) {
  return std::sqrt(k) * I + lambda * I * I / (16.0 * k);
}
inline double first_order_omega(double I, double k, double lambda) {
  return std::sqrt(k) + lambda * I / (8.0 * k);
}

// Scalar curvature of a 2D metric by the Brioschi formula evaluated with analytic
// derivatives supplied by the caller: E = g11, F = g12, G = g22 and their partials.
struct MetricJet {
  double E, F, G;
  double Eu, Ev, Fu, Fv, Gu, Gv;
  double Evv, Fuv, Guu;
};
inline double brioschi_curvature(const MetricJet& j) {
  const double det = j.E * j.G - j.F * j.F;
  const double a11 = -0.5 * j.Evv + j.Fuv - 0.5 * j.Guu;
  const double a12 = 0.5 * j.Eu, a13 = j.Fu - 0.5 * j.Ev;
  const double a21 = j.Fv - 0.5 * j.Gu, a22 = j.E, a23 = j.F;
  const double a31 = 0.5 * j.Gv, a32 = j.F, a33 = j.G;
  const double d1 = a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) + a13 * (a21 * a32 - a22 * a31);
  const double b12 = 0.5 * j.Ev, b13 = 0.5 * j.Gu;
  const double d2 = -(b12 * (b12 * j.G - j.F * b13) - b13 * (b12 * j.F - j.E * b13));
  const double K = (d1 - d2) / (det * det);
  return 2.0 * K;  // R = 2 K in two dimensions
}

// Ground-state density of the harmonic oscillator, m = 1.
inline double harmonic_density(double q, double omega, double hbar = 1.0) {
  return std::sqrt(omega / (M_PI * hbar)) * std::exp(-omega * q * q / hbar);
}

}  // namespace oracle
