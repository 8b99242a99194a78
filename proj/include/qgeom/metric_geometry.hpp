#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qgeom/error.hpp"
#include "qgeom/qmt_quantum.hpp"

namespace qgeom {

inline double metric_determinant(const MetricValue& m) { return m.g11 * m.g22 - m.g12 * m.g12; }

/// Rectangular grid over (x1, x2) = (k, lambda), uniform per axis.
struct ParamGrid {
  std::vector<double> k_values;
  std::vector<double> lambda_values;

  static std::vector<double> axis(double lo, double step, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
    return v;
  }

  [[nodiscard]] int nk() const { return static_cast<int>(k_values.size()); }
  [[nodiscard]] int nl() const { return static_cast<int>(lambda_values.size()); }

  static double spacing(const std::vector<double>& v, const char* name) {
    if (v.size() < 2) return 0.0;
    const double h = v[1] - v[0];
    if (!(h > 0.0)) throw DomainError(std::string(name) + " axis must be ascending");
    const double tol = 1e-12 * std::max(1.0, std::abs(v.back()) + std::abs(v.front()));
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::abs((v[i] - v[i - 1]) - h) > std::max(tol, 1e-9 * h))
        throw DomainError(std::string(name) + " axis spacing is not uniform");
    return h;
  }
  [[nodiscard]] double hk() const { return spacing(k_values, "k"); }
  [[nodiscard]] double hl() const { return spacing(lambda_values, "lambda"); }
};

using Field2D = Eigen::ArrayXXd;  // (k index, lambda index)
using Mask2D = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct MetricField {
  Field2D g11, g12, g22;
  Mask2D valid;

  MetricField() = default;
  MetricField(int nk, int nl)
      : g11(Field2D::Zero(nk, nl)), g12(Field2D::Zero(nk, nl)), g22(Field2D::Zero(nk, nl)),
        valid(Mask2D::Constant(nk, nl, true)) {}

  void set(int i, int j, const MetricValue& m) {
    g11(i, j) = m.g11;
    g12(i, j) = m.g12;
    g22(i, j) = m.g22;
  }
  [[nodiscard]] MetricValue at(int i, int j) const { return {g11(i, j), g12(i, j), g22(i, j)}; }
};

struct CurvatureField {
  Field2D R;
  Mask2D valid;
};

struct CurvatureOptions {
  double det_floor = 1e-18;
  bool forbid_k_zero = false;  // parameter-space use: the metric is singular at k = 0
};

namespace detail {

// Derivative along one axis of a 2D array: fourth-order central where two neighbours
// exist on each side, second-order central one node in, second-order one-sided at ends.
inline Field2D axis_derivative(const Field2D& f, int axis, double h) {
  const Eigen::Index n = axis == 0 ? f.rows() : f.cols();
  if (n < 3) throw DomainError("curvature needs at least three nodes per axis");
  Field2D d(f.rows(), f.cols());
  auto at = [&](Eigen::Index i, Eigen::Index other) { return axis == 0 ? f(i, other) : f(other, i); };
  auto put = [&](Eigen::Index i, Eigen::Index other, double v) {
    if (axis == 0) d(i, other) = v;
    else d(other, i) = v;
  };
  const Eigen::Index m = axis == 0 ? f.cols() : f.rows();
  for (Eigen::Index o = 0; o < m; ++o) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double v;
      if (i >= 2 && i + 2 < n) {
        v = (at(i - 2, o) - 8.0 * at(i - 1, o) + 8.0 * at(i + 1, o) - at(i + 2, o)) / (12.0 * h);
      } else if (i >= 1 && i + 1 < n) {
        v = (at(i + 1, o) - at(i - 1, o)) / (2.0 * h);
      } else if (i == 0) {
        v = (-3.0 * at(0, o) + 4.0 * at(1, o) - at(2, o)) / (2.0 * h);
      } else {
        v = (3.0 * at(n - 1, o) - 4.0 * at(n - 2, o) + at(n - 3, o)) / (2.0 * h);
      }
      put(i, o, v);
    }
  }
  return d;
}

// Invalid nodes poison every node whose derivative stencils (two passes) reach them.
inline Mask2D dilate(const Mask2D& valid, int reach) {
  Mask2D out = valid;
  const auto nk = valid.rows();
  const auto nl = valid.cols();
  for (Eigen::Index i = 0; i < nk; ++i)
    for (Eigen::Index j = 0; j < nl; ++j) {
      if (valid(i, j)) continue;
      for (Eigen::Index di = -reach; di <= reach; ++di) {
        const auto ii = i + di;
        if (ii >= 0 && ii < nk) out(ii, j) = false;
      }
      for (Eigen::Index dj = -reach; dj <= reach; ++dj) {
        const auto jj = j + dj;
        if (jj >= 0 && jj < nl) out(i, jj) = false;
      }
    }
  return out;
}

}  // namespace detail

/// Scalar curvature of a 2D metric: R = (A + B)/sqrt(g) with A = d1 F1, B = d2 F2,
///   F1 = g12 d2g11 /(g11 sqrt g) - d1g22 / sqrt g,
///   F2 = 2 d1g12 / sqrt g - d2g11 / sqrt g - g12 d1g11 /(g11 sqrt g).
inline CurvatureField scalar_curvature(const MetricField& field, const ParamGrid& grid,
                                       const CurvatureOptions& opt = {}) {
  const int nk = grid.nk();
  const int nl = grid.nl();
  if (field.g11.rows() != nk || field.g11.cols() != nl) throw DomainError("metric field does not match grid");
  const double h1 = grid.hk();
  const double h2 = grid.hl();
  if (opt.forbid_k_zero && nk > 0 && grid.k_values.front() <= 0.0 && grid.k_values.back() >= 0.0)
    throw DomainError("curvature stencil would cross k = 0");

  Field2D det = field.g11 * field.g22 - field.g12 * field.g12;
  Mask2D valid = field.valid;
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nl; ++j)
      if (!(det(i, j) > opt.det_floor) || !(field.g11(i, j) > 0.0) || !std::isfinite(det(i, j)))
        valid(i, j) = false;
  // Masked nodes get a harmless placeholder so differences stay finite; they and every
  // node within reach of them are masked in the output.
  Field2D g11 = field.g11, g12 = field.g12, g22 = field.g22;
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nl; ++j)
      if (!valid(i, j)) {
        g11(i, j) = 1.0;
        g12(i, j) = 0.0;
        g22(i, j) = 1.0;
        det(i, j) = 1.0;
      }
  const Field2D sq = det.sqrt();
  const Field2D d1g11 = detail::axis_derivative(g11, 0, h1);
  const Field2D d2g11 = detail::axis_derivative(g11, 1, h2);
  const Field2D d1g12 = detail::axis_derivative(g12, 0, h1);
  const Field2D d1g22 = detail::axis_derivative(g22, 0, h1);
  const Field2D ratio = g12 / (g11 * sq);
  const Field2D F1 = ratio * d2g11 - d1g22 / sq;
  const Field2D F2 = 2.0 * d1g12 / sq - d2g11 / sq - ratio * d1g11;
  const Field2D A = detail::axis_derivative(F1, 0, h1);
  const Field2D B = detail::axis_derivative(F2, 1, h2);

  CurvatureField out;
  out.R = (A + B) / sq;
  out.valid = detail::dilate(valid, 4);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nl; ++j)
      if (!out.valid(i, j) || !std::isfinite(out.R(i, j))) {
        out.valid(i, j) = false;
        out.R(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
  return out;
}

enum class ExtremumKind { maximum, minimum };

inline const char* to_string(ExtremumKind k) { return k == ExtremumKind::maximum ? "max" : "min"; }

struct Extremum {
  double location;
  double value;
  ExtremumKind kind;
  int index;  // grid node nearest the refined location
};

/// Interior local extrema of a sampled 1D function. Non-finite samples break the
/// slice; each extremum is refined by the parabola through its three nodes.
inline std::vector<Extremum> find_extrema(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("extrema slice: x and y sizes differ");
  if (x.size() < 5) throw DomainError("extrema slice needs at least five points");
  std::vector<Extremum> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double a = y[i - 1], b = y[i], c = y[i + 1];
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
    ExtremumKind kind;
    if (b > a && b >= c) kind = ExtremumKind::maximum;
    else if (b < a && b <= c) kind = ExtremumKind::minimum;
    else continue;
    // Lagrange parabola through (x0,a), (x1,b), (x2,c).
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double d01 = (b - a) / (x1 - x0);
    const double d12 = (c - b) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    double loc = x1, val = b;
    if (curv != 0.0) {
      // p(t) = b + s (t - x1) + curv (t - x1)^2 with s the slope at x1
      const double s = d01 + curv * (x1 - x0);
      const double off = -s / (2.0 * curv);
      if (std::abs(off) <= std::max(x1 - x0, x2 - x1)) {
        loc = x1 + off;
        val = b + s * off + curv * off * off;
      }
    }
    out.push_back({loc, val, kind, static_cast<int>(i)});
  }
  return out;
}

}  // namespace qgeom
