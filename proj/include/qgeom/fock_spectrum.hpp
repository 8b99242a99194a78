#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qgeom/core_model.hpp"
#include "qgeom/error.hpp"

namespace qgeom {

/// Truncated harmonic-oscillator (Fock) basis |0>, ..., |N-1> at frequency omega_b.
struct BasisSpec {
  int size = 200;
  double omega_b = 1.0;

  void validate() const {
    if (size < 8) throw DomainError("basis size must be at least 8");
    if (!(omega_b > 0.0) || !std::isfinite(omega_b))
      throw DomainError("basis frequency must be positive");
  }
};

/// Frequency of the variational Gaussian, positive root of w^3 - k w - lambda hbar / 4.
inline double variational_frequency(const SystemParams& params) {
  const double c = params.lambda * params.hbar / 4.0;
  // f(w) = w^3 - k w - c is increasing past its largest critical point; Newton from above.
  double w = std::max({1.0, std::sqrt(std::abs(params.k)) * 2.0, std::cbrt(2.0 * c)});
  for (int it = 0; it < 200; ++it) {
    const double f = w * w * w - params.k * w - c;
    const double df = 3.0 * w * w - params.k;
    const double next = w - f / df;
    if (std::abs(next - w) <= 1e-15 * w) return next;
    w = next;
  }
  return w;
}

/// k >= 0: variational Gaussian optimum. k < 0: the well frequency sqrt(-2k), but never
/// below the variational value so the basis stays usable as k -> 0-.
inline double default_basis_frequency(const SystemParams& params) {
  const double variational = variational_frequency(params);
  if (params.k >= 0.0) return variational;
  return std::max(std::sqrt(-2.0 * params.k), variational);
}

struct FockOperators {
  Eigen::MatrixXd q;
  Eigen::MatrixXd q2;
  Eigen::MatrixXd q4;
  Eigen::MatrixXd p2;
};

namespace detail {

// Product of two banded matrices with half-bandwidths ba and bb, touching only the bands.
inline Eigen::MatrixXd banded_product(const Eigen::MatrixXd& A, int ba, const Eigen::MatrixXd& B, int bb) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - ba - bb); j <= std::min(n - 1, i + ba + bb); ++j) {
      double s = 0.0;
      for (int l = std::max({0, i - ba, j - bb}); l <= std::min({n - 1, i + ba, j + bb}); ++l) s += A(i, l) * B(l, j);
      C(i, j) = s;
    }
  return C;
}

}  // namespace detail

/// Ladder-operator matrices. Products are formed in a basis padded by 8 states and then
/// cut back to N, so every retained entry of q^2, q^4 and p^2 is exact.
inline FockOperators build_operators(const BasisSpec& basis, const SystemParams& params) {
  basis.validate();
  params.validate();
  const int n = basis.size;
  const int padded = n + 8;
  const double hbar = params.hbar;
  const double w = basis.omega_b;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(padded, padded);
  for (int j = 1; j < padded; ++j) a(j - 1, j) = std::sqrt(static_cast<double>(j));
  const Eigen::MatrixXd x = std::sqrt(hbar / (2.0 * w)) * (a + a.transpose());
  // p = i sqrt(w hbar / 2)(a^+ - a); p^2 = -(w hbar / 2)(a^+ - a)^2 is real.
  const Eigen::MatrixXd d = a.transpose() - a;
  const Eigen::MatrixXd x2 = detail::banded_product(x, 1, x, 1);

  FockOperators ops;
  ops.q = x.topLeftCorner(n, n);
  ops.q2 = x2.topLeftCorner(n, n);
  ops.q4 = detail::banded_product(x2, 2, x2, 2).topLeftCorner(n, n);
  ops.p2 = (-(w * hbar / 2.0) * detail::banded_product(d, 1, d, 1)).topLeftCorner(n, n);
  return ops;
}

inline Eigen::MatrixXd assemble_hamiltonian(const FockOperators& ops, const SystemParams& params) {
  return 0.5 * ops.p2 + 0.5 * params.k * ops.q2 + (params.lambda / 24.0) * ops.q4;
}

inline Eigen::MatrixXd build_hamiltonian(const BasisSpec& basis, const SystemParams& params) {
  return assemble_hamiltonian(build_operators(basis, params), params);
}

struct SpectralResult {
  BasisSpec basis;
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns, sign fixed: largest-|component| entry positive
  std::vector<int> parity;   // +1 / -1 per state, 0 if not resolved
  int n_converged = 0;

  [[nodiscard]] int size() const { return static_cast<int>(energies.size()); }
};

namespace detail {

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
}

struct RawSpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  std::vector<int> parity;
};

inline RawSpectrum diagonalize_full(const Eigen::MatrixXd& h, bool vectors = true) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
  RawSpectrum out{solver.eigenvalues(), Eigen::MatrixXd(), std::vector<int>(static_cast<std::size_t>(h.rows()), 0)};
  if (vectors) {
    out.vectors = solver.eigenvectors();
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) fix_sign(out.vectors.col(c));
  }
  return out;
}

// H only couples Fock states of equal parity, so the even and odd blocks are solved
// separately and merged; every eigenvector then has an exact parity.
inline RawSpectrum diagonalize_parity(const Eigen::MatrixXd& h, bool vectors = true) {
  const Eigen::Index n = h.rows();
  RawSpectrum blocks[2];
  for (int par = 0; par < 2; ++par) {
    const Eigen::Index m = (n - par + 1) / 2;
    Eigen::MatrixXd block(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) block(i, j) = h(2 * i + par, 2 * j + par);
    blocks[par] = diagonalize_full(block, vectors);
  }
  struct Entry {
    double e;
    int par;
    Eigen::Index col;
  };
  std::vector<Entry> order;
  order.reserve(static_cast<std::size_t>(n));
  for (int par = 0; par < 2; ++par)
    for (Eigen::Index c = 0; c < blocks[par].energies.size(); ++c)
      order.push_back({blocks[par].energies(c), par, c});
  std::stable_sort(order.begin(), order.end(),
                   [](const Entry& a, const Entry& b) { return a.e < b.e; });

  RawSpectrum out;
  out.energies.resize(n);
  if (vectors) out.vectors = Eigen::MatrixXd::Zero(n, n);
  out.parity.resize(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    const Entry& en = order[static_cast<std::size_t>(s)];
    out.energies(s) = en.e;
    out.parity[static_cast<std::size_t>(s)] = en.par == 0 ? 1 : -1;
    if (!vectors) continue;
    const auto& src = blocks[en.par].vectors;
    for (Eigen::Index i = 0; i < src.rows(); ++i) out.vectors(2 * i + en.par, s) = src(i, en.col);
  }
  return out;
}

}  // namespace detail

struct EigenOptions {
  double tolerance = 1e-9;  // relative change allowed when N grows by `growth`
  int growth = 50;
  bool parity_split = true;
  int requested = 1;  // states that must converge
  int max_size = 1000;
};

/// Number of leading eigenvalues of `coarse` that agree with `fine` to the tolerance
/// (relative, floored at an absolute scale of hbar * omega_b).
inline int count_converged(const Eigen::VectorXd& coarse, const Eigen::VectorXd& fine, double tolerance,
                           double scale) {
  const Eigen::Index n = std::min(coarse.size(), fine.size());
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ref = std::max(std::abs(fine(i)), scale);
    if (std::abs(coarse(i) - fine(i)) > tolerance * ref) break;
    ++count;
  }
  return count;
}

/// Full symmetric eigendecomposition of H at the basis size; convergence is judged by
/// re-solving with N + growth states.
inline SpectralResult eigensolve(const Eigen::MatrixXd& h, const BasisSpec& basis, const SystemParams& params,
                                 const EigenOptions& options = {}) {
  if (h.rows() != basis.size || h.cols() != basis.size)
    throw DomainError("Hamiltonian size does not match basis");
  auto solve = [&](const Eigen::MatrixXd& m, bool vectors) {
    return options.parity_split ? detail::diagonalize_parity(m, vectors) : detail::diagonalize_full(m, vectors);
  };
  detail::RawSpectrum raw = solve(h, true);
  const BasisSpec bigger{basis.size + options.growth, basis.omega_b};
  const detail::RawSpectrum check = solve(build_hamiltonian(bigger, params), false);

  SpectralResult out;
  out.basis = basis;
  out.energies = std::move(raw.energies);
  out.vectors = std::move(raw.vectors);
  out.parity = std::move(raw.parity);
  out.n_converged =
      count_converged(out.energies, check.energies, options.tolerance, params.hbar * basis.omega_b);
  return out;
}

/// Grows the basis by `growth` until `requested` states converge or `max_size` is exceeded.
inline SpectralResult converged_spectrum(const SystemParams& params, BasisSpec basis,
                                         const EigenOptions& options = {}) {
  params.validate();
  basis.validate();
  for (;;) {
    SpectralResult res = eigensolve(build_hamiltonian(basis, params), basis, params, options);
    if (res.n_converged >= options.requested) return res;
    if (basis.size + options.growth > options.max_size)
      throw ConvergenceError("only " + std::to_string(res.n_converged) + " of " +
                             std::to_string(options.requested) + " states converged at N=" +
                             std::to_string(basis.size));
    basis.size += options.growth;
  }
}

/// Normalised oscillator eigenfunctions phi_0..phi_{n-1}(q) at frequency w, by the stable
/// three-term recurrence. Returned row-major: table[l * grid + i].
inline std::vector<double> hermite_functions(int n, double omega_b, double hbar, std::span<const double> q) {
  const std::size_t g = q.size();
  std::vector<double> table(static_cast<std::size_t>(n) * g, 0.0);
  const double scale = std::sqrt(omega_b / hbar);
  const double norm = std::pow(omega_b / (std::numbers::pi * hbar), 0.25);
  for (std::size_t i = 0; i < g; ++i) {
    const double xi = scale * q[i];
    double prev = 0.0;
    double cur = norm * std::exp(-0.5 * xi * xi);
    table[i] = cur;
    for (int l = 0; l + 1 < n; ++l) {
      const double next = std::sqrt(2.0 / (l + 1)) * xi * cur - std::sqrt(static_cast<double>(l) / (l + 1)) * prev;
      prev = cur;
      cur = next;
      table[static_cast<std::size_t>(l + 1) * g + i] = cur;
    }
  }
  return table;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

/// |Psi_state(q)|^2 on the grid. Throws if more than 1e-6 of the probability lies
/// outside the grid.
inline std::vector<double> state_density(const SpectralResult& result, std::span<const double> q_grid,
                                         double hbar = 1.0, int state = 0, bool check_mass = true) {
  if (result.n_converged <= state) throw ConvergenceError("requested state is not converged");
  if (q_grid.size() < 2) throw DomainError("density grid needs at least two points");
  for (double x : q_grid)
    if (!std::isfinite(x)) throw DomainError("density grid must be finite");
  const int n = result.basis.size;
  const auto table = hermite_functions(n, result.basis.omega_b, hbar, q_grid);
  const std::size_t g = q_grid.size();
  std::vector<double> psi(g, 0.0);
  for (int l = 0; l < n; ++l) {
    const double c = result.vectors(l, state);
    if (c == 0.0) continue;
    const double* row = table.data() + static_cast<std::size_t>(l) * g;
    for (std::size_t i = 0; i < g; ++i) psi[i] += c * row[i];
  }
  for (double& v : psi) v *= v;
  if (check_mass) {
    const double mass = trapezoid(q_grid, psi);
    if (1.0 - mass > 1e-6)
      throw DomainError("density grid too narrow: missing probability " + std::to_string(1.0 - mass));
  }
  return psi;
}

inline std::vector<double> ground_density(const SpectralResult& result, std::span<const double> q_grid,
                                          double hbar = 1.0) {
  return state_density(result, q_grid, hbar, 0);
}

/// Symmetric grid wide enough for the ground state: the outer classical scale plus a
/// generous margin in basis lengths.
inline std::vector<double> default_density_grid(const SystemParams& params, int points = 2001) {
  double reach = 8.0 * std::sqrt(params.hbar / default_basis_frequency(params));
  if (params.k < 0.0) reach += well_position(params);
  std::vector<double> q(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) q[static_cast<std::size_t>(i)] = -reach + 2.0 * reach * i / (points - 1);
  return q;
}

struct BimodalityOnsets {
  double two_maxima = std::nan("");  // first k with two density maxima
  double separated = std::nan("");   // first k with central density below ratio * peak
};

struct BimodalityOptions {
  double lambda = 0.2;
  double hbar = 1.0;
  double k_start = -0.01;
  double k_end = -1.0;
  double k_step = 0.005;
  double separation_ratio = 0.1;
  int basis_size = 160;
  int grid_points = 2001;
};

namespace detail {

struct DensityShape {
  int maxima = 0;
  double center_ratio = 1.0;
};

inline DensityShape density_shape(const SystemParams& params, const BimodalityOptions& opt) {
  const BasisSpec basis{opt.basis_size, default_basis_frequency(params)};
  EigenOptions eo;
  eo.requested = 1;
  const SpectralResult res = converged_spectrum(params, basis, eo);
  auto grid = default_density_grid(params, opt.grid_points | 1);  // odd: q = 0 on the grid
  const auto rho = ground_density(res, grid, params.hbar);
  const double peak = *std::max_element(rho.begin(), rho.end());
  DensityShape shape;
  shape.center_ratio = rho[rho.size() / 2] / peak;
  for (std::size_t i = 1; i + 1 < rho.size(); ++i)
    if (rho[i] > rho[i - 1] && rho[i] >= rho[i + 1] && rho[i] > 1e-6 * peak) ++shape.maxima;
  return shape;
}

}  // namespace detail

/// Scans k downward at fixed lambda and reports where the ground-state density first
/// shows two maxima and where the two lobes separate. Each onset is refined by
/// bisection to 1e-4 once bracketed by the scan.
inline BimodalityOnsets bimodality_scan(const BimodalityOptions& opt) {
  if (!(opt.k_step > 0.0) || !(opt.k_start > opt.k_end) || !(opt.k_start < 0.0))
    throw DomainError("bimodality scan needs a descending range of negative k");
  auto shape_at = [&](double k) {
    return detail::density_shape(SystemParams{k, opt.lambda, opt.hbar}, opt);
  };
  auto refine = [&](double hi, double lo, auto&& predicate) {
    // predicate false at hi (closer to 0), true at lo
    while (hi - lo > 1e-4) {
      const double mid = 0.5 * (hi + lo);
      if (predicate(shape_at(mid))) lo = mid;
      else hi = mid;
    }
    return 0.5 * (hi + lo);
  };
  auto bimodal = [](const detail::DensityShape& s) { return s.maxima >= 2; };
  auto separated = [&](const detail::DensityShape& s) { return s.center_ratio < opt.separation_ratio; };

  BimodalityOnsets out;
  double prev_k = opt.k_start;
  detail::DensityShape prev = shape_at(prev_k);
  if (bimodal(prev)) out.two_maxima = prev_k;
  if (separated(prev)) out.separated = prev_k;
  const int steps = static_cast<int>(std::floor((opt.k_start - opt.k_end) / opt.k_step + 1e-9));
  for (int s = 1; s <= steps && (std::isnan(out.two_maxima) || std::isnan(out.separated)); ++s) {
    const double k = opt.k_start - s * opt.k_step;
    const detail::DensityShape cur = shape_at(k);
    if (std::isnan(out.two_maxima) && bimodal(cur)) out.two_maxima = refine(prev_k, k, bimodal);
    if (std::isnan(out.separated) && separated(cur)) out.separated = refine(prev_k, k, separated);
    prev_k = k;
  }
  return out;
}

}  // namespace qgeom
