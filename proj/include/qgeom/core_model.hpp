#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qgeom/error.hpp"

namespace qgeom {

/// Point in the (k, lambda) parameter plane of
///   H = p^2/2 + k q^2/2 + lambda q^4/24,
/// mass fixed to 1.
struct SystemParams {
  double k = 1.0;
  double lambda = 0.2;
  double hbar = 1.0;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw DomainError("lambda must be positive");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw DomainError("hbar must be positive");
    if (!std::isfinite(k)) throw DomainError("k must be finite");
  }
};

enum class FixedPointKind { center, hyperbolic };

struct FixedPoint {
  double q = 0.0;
  double p = 0.0;
  FixedPointKind kind = FixedPointKind::center;
};

inline double potential(double q, const SystemParams& params) {
  const double q2 = q * q;
  return 0.5 * params.k * q2 + params.lambda * q2 * q2 / 24.0;
}

inline double potential_derivative(double q, const SystemParams& params) {
  return params.k * q + params.lambda * q * q * q / 6.0;
}

inline double potential_curvature(double q, const SystemParams& params) {
  return params.k + 0.5 * params.lambda * q * q;
}

/// Eigenvalues of the Jacobian of Hamilton's equations at (q, 0):
/// +-sqrt(-V''(q)). Purely imaginary at a center, real at a saddle.
inline std::pair<std::complex<double>, std::complex<double>> linearization_eigenvalues(
    double q, const SystemParams& params) {
  const std::complex<double> root = std::sqrt(std::complex<double>(-potential_curvature(q, params)));
  return {root, -root};
}

/// |q*| of the two wells, sqrt(-6k/lambda). Requires k < 0.
inline double well_position(const SystemParams& params) {
  if (!(params.k < 0.0)) throw DomainError("well_position requires k < 0");
  return std::sqrt(-6.0 * params.k / params.lambda);
}

inline std::vector<FixedPoint> fixed_points(const SystemParams& params) {
  params.validate();
  auto classify = [&](double q) {
    const auto [l1, l2] = linearization_eigenvalues(q, params);
    (void)l2;
    return std::abs(l1.real()) > 0.0 ? FixedPointKind::hyperbolic : FixedPointKind::center;
  };
  if (params.k >= 0.0) return {FixedPoint{0.0, 0.0, FixedPointKind::center}};
  const double qs = well_position(params);
  return {FixedPoint{-qs, 0.0, classify(-qs)}, FixedPoint{0.0, 0.0, classify(0.0)},
          FixedPoint{qs, 0.0, classify(qs)}};
}

/// Depth of each well below the central barrier, 3k^2/(2 lambda).
inline double barrier_height(const SystemParams& params) {
  if (!(params.k < 0.0)) throw DomainError("barrier_height requires k < 0");
  return 1.5 * params.k * params.k / params.lambda;
}

/// Minimum of the potential in the original frame.
inline double potential_minimum(const SystemParams& params) {
  return params.k < 0.0 ? -barrier_height(params) : 0.0;
}

}  // namespace qgeom
