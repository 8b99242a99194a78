#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qgeom/core_model.hpp"
#include "qgeom/error.hpp"
#include "qgeom/fock_spectrum.hpp"

namespace qgeom {

/// Metric components in (k, lambda) coordinates.
struct MetricValue {
  double g11 = 0.0;
  double g12 = 0.0;
  double g22 = 0.0;

  [[nodiscard]] double component(int i, int j) const {
    if (i == 0 && j == 0) return g11;
    if (i == 1 && j == 1) return g22;
    return g12;
  }
  MetricValue& operator+=(const MetricValue& o) {
    g11 += o.g11;
    g12 += o.g12;
    g22 += o.g22;
    return *this;
  }
};

/// B_i[m] = <0|O_i|m>, with O_1 = q^2/2 = dH/dk and O_2 = q^4/24 = dH/dlambda.
/// Index 0 of each array is unused so that m runs 1..M.
struct TransitionData {
  std::vector<double> B1;
  std::vector<double> B2;
  std::vector<double> gaps;
  std::vector<int> parity;  // parity of state m relative to the ground state, 0 if unknown

  [[nodiscard]] int size() const { return static_cast<int>(gaps.size()) - 1; }
};

/// Index of the reference ground state: the lowest even state when parities are known.
/// In a deep double well the odd partner can sit within roundoff of it and sort first.
inline int ground_index(const SpectralResult& spectral) {
  for (int s = 0; s < spectral.size(); ++s)
    if (spectral.parity.empty() || spectral.parity[static_cast<std::size_t>(s)] >= 0) return s;
  return 0;
}

inline TransitionData transition_elements(const SpectralResult& spectral, const SystemParams& params, int M) {
  if (M < 1) throw DomainError("need at least one excited state");
  if (spectral.n_converged <= M)
    throw ConvergenceError("only " + std::to_string(spectral.n_converged) + " converged states for M=" +
                           std::to_string(M));
  const FockOperators ops = build_operators(spectral.basis, params);
  const int g = ground_index(spectral);
  const Eigen::VectorXd v0 = spectral.vectors.col(g);
  const Eigen::RowVectorXd w1 = (v0.transpose() * ops.q2) * 0.5;
  const Eigen::RowVectorXd w2 = (v0.transpose() * ops.q4) / 24.0;

  TransitionData td;
  td.B1.assign(static_cast<std::size_t>(M + 1), 0.0);
  td.B2 = td.B1;
  td.gaps = td.B1;
  td.parity.assign(static_cast<std::size_t>(M + 1), 0);
  int m = 1;
  for (int s = 0; s < spectral.size() && m <= M; ++s) {
    if (s == g) continue;
    const auto idx = static_cast<std::size_t>(m);
    td.B1[idx] = w1.dot(spectral.vectors.col(s));
    td.B2[idx] = w2.dot(spectral.vectors.col(s));
    td.gaps[idx] = spectral.energies(s) - spectral.energies(g);
    if (!spectral.parity.empty()) {
      const int p = spectral.parity[static_cast<std::size_t>(s)];
      td.parity[idx] = p;
      if (p < 0) td.B1[idx] = td.B2[idx] = 0.0;  // exact selection rule
    }
    ++m;
  }
  return td;
}

struct QmtResult {
  MetricValue metric;
  std::vector<MetricValue> terms;  // G^(m), index 0 unused
  double tail = 0.0;               // largest last-nonzero-term share of the total
};

inline QmtResult qmt_sum(const TransitionData& td) {
  QmtResult out;
  out.terms.assign(td.gaps.size(), MetricValue{});
  int last = 0;
  for (int m = 1; m <= td.size(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    if (td.B1[i] == 0.0 && td.B2[i] == 0.0) continue;
    if (!(td.gaps[i] > 0.0)) throw ConsistencyError("coupled state with non-positive gap");
    const double inv = 1.0 / (td.gaps[i] * td.gaps[i]);
    const MetricValue term{td.B1[i] * td.B1[i] * inv, td.B1[i] * td.B2[i] * inv, td.B2[i] * td.B2[i] * inv};
    out.terms[i] = term;
    out.metric += term;
    last = m;
  }
  if (last > 0) {
    const MetricValue& t = out.terms[static_cast<std::size_t>(last)];
    const MetricValue& g = out.metric;
    const double s12 = std::sqrt(g.g11 * g.g22);
    out.tail = std::max({g.g11 > 0 ? std::abs(t.g11) / g.g11 : 0.0, g.g22 > 0 ? std::abs(t.g22) / g.g22 : 0.0,
                         s12 > 0 ? std::abs(t.g12) / s12 : 0.0});
  }
  return out;
}

namespace detail {

// Lowest even-parity eigenvector of a fixed-basis Hamiltonian, sign-fixed.
inline Eigen::VectorXd ground_vector(const BasisSpec& basis, const SystemParams& params) {
  // Parity-resolved so a near-degenerate odd partner never gets mixed in; the padded
  // operators are evaluated directly because the stencil may step lambda through zero.
  const int n = basis.size;
  const int padded = n + 8;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(padded, padded);
  for (int j = 1; j < padded; ++j) a(j - 1, j) = std::sqrt(static_cast<double>(j));
  const Eigen::MatrixXd x = std::sqrt(params.hbar / (2.0 * basis.omega_b)) * (a + a.transpose());
  const Eigen::MatrixXd d = a.transpose() - a;
  const Eigen::MatrixXd x2 = banded_product(x, 1, x, 1);
  const Eigen::MatrixXd h = (-(basis.omega_b * params.hbar / 4.0) * banded_product(d, 1, d, 1) +
                             0.5 * params.k * x2 + (params.lambda / 24.0) * banded_product(x2, 2, x2, 2))
                                .topLeftCorner(n, n);
  const int m = (n + 1) / 2;
  Eigen::MatrixXd even(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) even(i, j) = h(2 * i, 2 * j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(even);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) v(2 * i) = solver.eigenvectors()(i, 0);
  fix_sign(v);
  return v;
}

}  // namespace detail

/// Provost formula g_ij = Re(<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>) with central
/// differences of the ground vector in a basis frozen at the centre point.
inline MetricValue qmt_provost_fd(const SystemParams& params, const BasisSpec& basis, double delta = 1e-4) {
  params.validate();
  basis.validate();
  if (!(delta > 0.0)) throw DomainError("finite-difference step must be positive");
  const Eigen::VectorXd psi = detail::ground_vector(basis, params);
  auto aligned = [&](SystemParams p) {
    Eigen::VectorXd v = detail::ground_vector(basis, p);
    double overlap = v.dot(psi);
    if (overlap < 0.0) {
      v = -v;
      overlap = -overlap;
    }
    if (overlap < 0.9) throw ConsistencyError("ground-state sign alignment failed across the stencil");
    return v;
  };
  std::array<Eigen::VectorXd, 2> grad;
  for (int i = 0; i < 2; ++i) {
    SystemParams plus = params;
    SystemParams minus = params;
    (i == 0 ? plus.k : plus.lambda) += delta;
    (i == 0 ? minus.k : minus.lambda) -= delta;
    grad[static_cast<std::size_t>(i)] = (aligned(plus) - aligned(minus)) / (2.0 * delta);
  }
  auto g = [&](int i, int j) {
    const auto& a = grad[static_cast<std::size_t>(i)];
    const auto& b = grad[static_cast<std::size_t>(j)];
    return a.dot(b) - a.dot(psi) * psi.dot(b);
  };
  return MetricValue{g(0, 0), g(0, 1), g(1, 1)};
}

struct QmtOptions {
  int states = 60;  // M
  int basis_size = 0;  // 0: pick from the parameters
  double omega_b = 0.0;  // 0: default_basis_frequency
  EigenOptions eigen{};
};

inline BasisSpec default_basis(const SystemParams& params, int states) {
  // Deep wells hold many states near the bottom, so start larger there.
  int n = std::max(160, 2 * states + 80);
  if (params.k < 0.0) n += static_cast<int>(std::min(400.0, 20.0 * well_position(params)));
  return BasisSpec{n, default_basis_frequency(params)};
}

/// Perturbation-sum QMT with the basis grown until M + 1 states have converged.
inline QmtResult quantum_metric(const SystemParams& params, const QmtOptions& opt = {}) {
  params.validate();
  BasisSpec basis = default_basis(params, opt.states);
  if (opt.basis_size > 0) basis.size = opt.basis_size;
  if (opt.omega_b > 0.0) basis.omega_b = opt.omega_b;
  EigenOptions eo = opt.eigen;
  eo.requested = opt.states + 2;  // ground, M excited, and a possible odd partner below
  const SpectralResult spec = converged_spectrum(params, basis, eo);
  return qmt_sum(transition_elements(spec, params, opt.states));
}

}  // namespace qgeom
