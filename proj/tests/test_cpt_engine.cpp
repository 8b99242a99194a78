#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qgeom/classical_orbit.hpp"
#include "qgeom/cpt_engine.hpp"
#include "qgeom/trig_series.hpp"

using namespace qgeom;

namespace {

constexpr auto kCos = Phase::cos_;
constexpr auto kSin = Phase::sin_;

void expect_rel(double got, double want, double tol = 1e-12) {
  EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << got << " vs " << want;
}

const CptResult& pos(int order) {
  static std::map<int, CptResult> cache;
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, run_cpt({Branch::k_positive, order})).first;
  return it->second;
}
const CptResult& neg(int order) {
  static std::map<int, CptResult> cache;
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, run_cpt({Branch::k_negative, order})).first;
  return it->second;
}

Series random_series(std::mt19937& rng) {
  std::uniform_int_distribution<int> m(0, 5), c(-9, 9), e(0, 3);
  Series s;
  for (int t = 0; t < 6; ++t)
    s.add(m(rng), t % 2 ? kSin : kCos, Monomial{e(rng), e(rng), -e(rng), 0, 0}, Rational(c(rng), 1 + e(rng)));
  return s;
}

}  // namespace

// ---- series algebra ----

TEST(TrigSeries, ProductMatchesPointwiseProduct) {
  std::mt19937 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Series a = random_series(rng), b = random_series(rng);
    const Series ab = a.times(b);
    for (double phi : {0.1, 1.3, 2.9})
      EXPECT_NEAR(ab.eval(phi, 0.7, 0.3, 1.4), a.eval(phi, 0.7, 0.3, 1.4) * b.eval(phi, 0.7, 0.3, 1.4), 1e-9);
  }
}

TEST(TrigSeries, NegativeHarmonicsFold) {
  EXPECT_EQ(Series::harmonic(-2, kSin, 1), Series::harmonic(2, kSin, -1));
  EXPECT_EQ(Series::harmonic(-3, kCos, 5), Series::harmonic(3, kCos, 5));
  EXPECT_TRUE(Series::harmonic(0, kSin, 4).empty());
}

TEST(TrigSeries, ZeroCoefficientsPruned) {
  Series s = Series::harmonic(2, kCos, 3);
  s -= Series::harmonic(2, kCos, 3);
  EXPECT_TRUE(s.empty());
}

TEST(TrigSeries, SurdExponentsNormalise) {
  const Series r2 = Series::constant(1, {0, 0, 0, 2, 0});  // sqrt 2
  EXPECT_EQ(r2.times(r2), Series::constant(2));
  const Series r3 = Series::constant(1, {0, 0, 0, 0, 1});  // sqrt 3
  EXPECT_EQ(r3.times(r3).times(r3), Series::constant(3, {0, 0, 0, 0, 1}));
}

TEST(TrigSeries, DerivativesAndIntegral) {
  std::mt19937 rng(11);
  for (int t = 0; t < 10; ++t) {
    Series s = random_series(rng);
    s -= s.average();
    const double h = 1e-6, phi = 0.8, I = 0.6;
    const double num = (s.eval(phi + h, I, 0.2, 1.1) - s.eval(phi - h, I, 0.2, 1.1)) / (2 * h);
    EXPECT_NEAR(s.d_phi().eval(phi, I, 0.2, 1.1), num, 1e-6);
    const double numI = (s.eval(phi, I + h, 0.2, 1.1) - s.eval(phi, I - h, 0.2, 1.1)) / (2 * h);
    EXPECT_NEAR(s.d_action().eval(phi, I, 0.2, 1.1), numI, 1e-6);
    EXPECT_EQ(s.integrate_phi().d_phi(), s);
  }
  EXPECT_THROW(Series::constant(1).integrate_phi(), ConsistencyError);
}

TEST(TrigSeries, AverageWithHarmonic) {
  // <cos(2 phi) * cos(2 phi)> = 1/2
  const Series s = Series::harmonic(2, kCos, 1);
  EXPECT_EQ(s.average_with(2, kCos), Series::constant(Rational(1, 2)));
}

// ---- generating functions ----

TEST(WFunctions, PositiveBranchGolden) {
  const auto& W = pos(2).w.W;
  ASSERT_EQ(W.size(), 2u);
  EXPECT_EQ(W[0].size(), 2u);
  expect_rel(W[0].coefficient_of(2, kSin, 4, 1, -6), 8.0 / 192.0);
  expect_rel(W[0].coefficient_of(4, kSin, 4, 1, -6), -1.0 / 192.0);
  EXPECT_EQ(W[1].size(), 4u);
  const double d = 55296.0;
  expect_rel(W[1].coefficient_of(2, kSin, 6, 2, -12), -384.0 / d);
  expect_rel(W[1].coefficient_of(4, kSin, 6, 2, -12), 132.0 / d);
  expect_rel(W[1].coefficient_of(6, kSin, 6, 2, -12), -32.0 / d);
  expect_rel(W[1].coefficient_of(8, kSin, 6, 2, -12), 3.0 / d);
}

TEST(WFunctions, NegativeBranchGolden) {
  const auto& W = neg(2).w.W;
  ASSERT_EQ(W.size(), 2u);
  const double p1 = 1.0 / (12.0 * std::pow(2.0, 0.25) * std::sqrt(3.0));
  EXPECT_EQ(W[0].size(), 2u);
  expect_rel(W[0].coefficient_of(1, kCos, 3, 1, -3), -9.0 * p1);
  expect_rel(W[0].coefficient_of(3, kCos, 3, 1, -3), p1);
  const double p2 = -1.0 / (384.0 * std::sqrt(2.0));
  EXPECT_EQ(W[1].size(), 3u);
  expect_rel(W[1].coefficient_of(2, kSin, 4, 2, -6), 37.0 * p2);
  expect_rel(W[1].coefficient_of(4, kSin, 4, 2, -6), -8.0 * p2);
  expect_rel(W[1].coefficient_of(6, kSin, 4, 2, -6), p2);
}

TEST(WFunctions, PositiveBranchThirdOrderGolden) {
  const auto& W = pos(3).w.W;
  const double d = 5308416.0;
  const int m[6] = {2, 4, 6, 8, 10, 12};
  const double c[6] = {9264, -4101, 1624, -441, 72, -5};
  for (int i = 0; i < 6; ++i) expect_rel(W[2].coefficient_of(m[i], kSin, 8, 3, -18), c[i] / d);
}

TEST(WFunctions, PositiveBranchStructure) {
  const auto& W = pos(6).w.W;
  for (std::size_t mu = 0; mu < W.size(); ++mu) {
    EXPECT_TRUE(W[mu].average().empty());
    for (const auto& [key, c] : W[mu].terms()) {
      EXPECT_EQ(key.phase, kSin);
      EXPECT_EQ(key.mono.i2, 2 * static_cast<int>(mu + 2));
      EXPECT_EQ(key.mono.eps, static_cast<int>(mu + 1));
    }
  }
}

TEST(WFunctions, ZeroMeanBothBranches) {
  for (const auto* r : {&pos(6), &neg(6)})
    for (const auto& W : r->w.W) EXPECT_TRUE(W.average().empty());
}

TEST(WFunctions, OrderValidation) {
  EXPECT_THROW(run_cpt({Branch::k_positive, 0}), DomainError);
  EXPECT_THROW(run_cpt({Branch::k_positive, 17}), DomainError);
}

// ---- canonical transform ----

TEST(CanonicalTransform, EmptyGeneratorIsIdentity) {
  const auto ct = canonical_transform(WFunctions{});
  EXPECT_TRUE(ct.dI.empty());
  EXPECT_TRUE(ct.dphi.empty());
}

TEST(CanonicalTransform, FirstOrderActionShiftHasZeroMean) {
  EXPECT_TRUE(pos(1).ct.dI.average().empty());
}

TEST(CanonicalTransform, ResidualShrinksWithOrder) {
  const double lam = 0.05, I = 0.4;
  double prev = 1.0;
  for (int order : {1, 2, 4}) {
    double worst = 0.0;
    for (double phi0 : {0.3, 1.1, 2.5, 4.0}) worst = std::max(worst, transform_residual(pos(order), phi0, I, lam, 1.0));
    EXPECT_LT(worst, prev);
    prev = worst;
  }
  EXPECT_LT(prev, 1e-7);
  for (double phi0 : {0.3, 2.2}) EXPECT_LT(transform_residual(neg(4), phi0, 0.3, std::sqrt(0.05), 1.0), 1e-5);
}

// ---- deformation functions ----

TEST(Deformation, PositiveBranchLeadingOrder) {
  const auto& O1 = pos(2).deformation.O[0];
  // (I / sqrt k) sin^2 = I/(2 sqrt k) (1 - cos 2 phi0)
  expect_rel(O1.coefficient_of(0, kCos, 2, 0, -2), 0.5);
  expect_rel(O1.coefficient_of(2, kCos, 2, 0, -2), -0.5);
  EXPECT_EQ(O1.coefficient_of(4, kCos, 2, 0, -2), 0.0);
}

TEST(Deformation, NegativeBranchLeadingTerms) {
  const auto& O1 = neg(2).deformation.O[0];
  expect_rel(O1.coefficient_of(0, kCos, 0, -2, 4), 3.0);  // -3k / lambda'^2 with k = -kappa
  expect_rel(O1.coefficient_of(1, kSin, 1, -1, 1), -std::pow(2.0, 0.75) * std::sqrt(3.0));
}

TEST(Deformation, MatchesNumericOrbit) {
  const double k = 1.0, lam = 0.05, I = 0.3, phi0 = 0.7;
  const CptResult& r = pos(6);
  const double phi = phi0 + r.ct.dphi.eval(phi0, I, lam, k);
  const Orbit o = integrate_orbit(I, {k, lam, 1.0});
  // trigonometric interpolation of q at angle phi
  const double n = static_cast<double>(o.samples.size());
  std::complex<double> q{};
  for (int m = -40; m <= 40; ++m) {
    std::complex<double> c{};
    for (std::size_t j = 0; j < o.samples.size(); ++j) {
      const double pj = -std::numbers::pi / 2 + 2.0 * std::numbers::pi * static_cast<double>(j) / n;
      c += o.samples[j] * std::polar(1.0, -m * pj);
    }
    q += c / n * std::polar(1.0, m * phi);
  }
  const double numeric = 0.5 * q.real() * q.real();
  const double series = r.deformation.O[0].eval(phi0, I, lam, k);
  EXPECT_NEAR(series, numeric, 1e-8 * std::abs(numeric) + 1e-10);
}

// ---- Fourier coefficients and frequency ----

TEST(BetaSeries, PositiveBranchGolden) {
  const auto& b = pos(4).beta;
  expect_rel(b.re[0][0].coefficient_of(0, kCos, 2, 0, -2), 0.5);
  expect_rel(b.re[0][0].coefficient_of(0, kCos, 4, 1, -8), -1.0 / 16.0);
  expect_rel(b.re[0][0].coefficient_of(0, kCos, 6, 2, -14), 85.0 / 4608.0);
  expect_rel(b.re[0][0].coefficient_of(0, kCos, 8, 3, -20), -125.0 / 18432.0);
  expect_rel(b.re[1][0].coefficient_of(0, kCos, 4, 0, -4), 1.0 / 16.0);
  expect_rel(b.re[1][0].coefficient_of(0, kCos, 6, 1, -10), -17.0 / 1152.0);
  expect_rel(b.re[0][2].coefficient_of(0, kCos, 2, 0, -2), -0.25);
}

TEST(BetaSeries, NegativeBranchGolden) {
  const auto& b = neg(4).beta;
  EXPECT_NEAR(b.im[0][1].coefficient_of(0, kCos, 1, -1, 1), 1.45648, 1e-5);
  EXPECT_NEAR(b.im[0][1].coefficient_of(0, kCos, 3, 1, -5), -0.128735, 1e-6);
}

TEST(BetaSeries, Reality) {
  const auto& p = pos(6).beta;
  for (int i = 0; i < 2; ++i)
    for (const auto& s : p.im[static_cast<std::size_t>(i)]) EXPECT_TRUE(s.empty());
  const auto& n = neg(6).beta;
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m <= n.max_harmonic(); ++m) {
      const auto mm = static_cast<std::size_t>(m);
      if (m % 2 == 0) EXPECT_TRUE(n.im[static_cast<std::size_t>(i)][mm].empty()) << i << ' ' << m;
      else EXPECT_TRUE(n.re[static_cast<std::size_t>(i)][mm].empty()) << i << ' ' << m;
    }
}

TEST(Frequency, LowOrderCoefficients) {
  const auto& w = pos(3).frequency.omega;
  expect_rel(w.coefficient_of(0, kCos, 0, 0, 2), 1.0);
  expect_rel(w.coefficient_of(0, kCos, 2, 1, -4), 1.0 / 8.0);
  expect_rel(neg(3).frequency.omega.coefficient_of(0, kCos, 0, 0, 2), std::sqrt(2.0));
}

TEST(Frequency, ConvergesToNumericFrequency) {
  const SystemParams p{1.0, 0.2, 1.0};
  const double I = 0.5, exact = omega_of_action(I, p);
  double prev = 1.0;
  for (int order : {1, 2, 4, 6}) {
    const double err = std::abs(pos(order).frequency.omega.eval(0.0, I, p.lambda, p.k) - exact);
    EXPECT_LT(err, prev);
    EXPECT_LT(err, 2.0 * std::pow(p.lambda * I, order + 1));
    prev = err;
  }
}

TEST(Frequency, NegativeBranchSmallActionLimit) {
  const double w = neg(4).frequency.omega.eval(0.0, 1e-8, std::sqrt(0.2), 1.0);
  EXPECT_NEAR(w, std::sqrt(2.0), 1e-6);
}

// ---- assembled tables ----

TEST(CmtTables, PositiveBranch) {
  const auto t = extract_cmt_table(pos(6));
  EXPECT_NEAR(t.values[0][0], 0.03125, 1e-12);
  EXPECT_NEAR(t.values[0][1], 0.0143229, 1e-4);
  EXPECT_NEAR(t.values[0][1], 0.0143229, 1e-7);
  EXPECT_NEAR(t.values[0][2], 0.00650703, 1e-7);
}

TEST(CmtTables, NegativeBranch) {
  const auto t = extract_cmt_table(neg(6));
  EXPECT_NEAR(t.values[0][0], 2.1213, 1e-3);
  EXPECT_NEAR(t.values[0][0], 3.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(t.values[0][1], 0.40625, 1e-12);
  EXPECT_NEAR(t.values[0][2], 0.176777, 1e-6);
  EXPECT_EQ(t.values[2][1], 0.0);
}

TEST(CmtTables, OrderConsistency) {
  for (auto* get : {&pos, &neg}) {
    const auto lo = extract_cmt_table(get(4)), hi = extract_cmt_table(get(6));
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t n = std::min(lo.values[c].size(), hi.values[c].size());
      ASSERT_GT(n, 0u);
      for (std::size_t a = 0; a < n; ++a) EXPECT_NEAR(lo.values[c][a], hi.values[c][a], 1e-12) << c << ' ' << a;
    }
  }
}
