#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qgeom/harness.hpp"

using namespace qgeom;

namespace {

SweepConfig small_k_sweep() {
  SweepConfig c;
  c.mode = SweepMode::k_sweep;
  c.k_min = -1.0;
  c.k_max = -0.8;
  c.k_step = 0.05;
  c.lambda = 0.2;
  c.lambda_step = 0.01;
  c.states = 20;
  return c;
}

std::string csv_of(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  write_sweep_csv(os, rows);
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(1234567.0), "1234567");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(std::nan("")), "");
  EXPECT_EQ(format_number(INFINITY), "");
}

TEST(SweepCsv, HeaderIsExact) {
  std::ostringstream os;
  write_sweep_csv(os, {});
  EXPECT_EQ(os.str(), "k,lambda,g11_q,g12_q,g22_q,det_q,R_q,g11_cl,g12_cl,g22_cl,det_cl,R_cl,tail_q,tail_cl,flags\n");
}

TEST(SweepCsv, MaskedValuesAreEmptyFields) {
  SweepRow r;
  r.k = 0.5;
  r.lambda = 0.2;
  r.flags = {"near_k0", "tail_warn"};
  std::ostringstream os;
  write_sweep_csv(os, {r});
  const std::string body = os.str().substr(os.str().find('\n') + 1);
  EXPECT_EQ(body, "0.5,0.2,,,,,,,,,,,,,near_k0|tail_warn\n");
}

TEST(SweepConfig, EmptyRangesAreUsageErrors) {
  auto c = small_k_sweep();
  c.k_max = -1.5;
  EXPECT_THROW(run_sweep(c), UsageError);
  c = small_k_sweep();
  c.k_step = 0.0;
  EXPECT_THROW(run_sweep(c), UsageError);
  c = small_k_sweep();
  c.mode = SweepMode::lambda_sweep;
  c.lambda_min = 0.3;
  c.lambda_max = 0.1;
  EXPECT_THROW(run_sweep(c), UsageError);
  c = small_k_sweep();
  c.engines.clear();
  EXPECT_THROW(run_sweep(c), UsageError);
}

TEST(SweepConfig, NonPositiveCouplingIsDomainError) {
  auto c = small_k_sweep();
  c.lambda = -0.1;
  EXPECT_THROW(run_sweep(c), DomainError);
}

TEST(SweepConfig, EngineNames) {
  EXPECT_EQ(parse_engine("quantum-numeric"), Engine::quantum_numeric);
  EXPECT_EQ(parse_engine("cpt"), Engine::cpt);
  EXPECT_THROW(parse_engine("nope"), UsageError);
  EXPECT_THROW(sweep_column({}, "nope"), UsageError);
}

TEST(Sweep, QuantumColumnsWithoutClassicalEngines) {
  auto c = small_k_sweep();
  c.engines = {Engine::quantum_numeric};
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.q.has_value());
    EXPECT_FALSE(r.cl.has_value());
    EXPECT_TRUE(std::isnan(r.R_cl));
  }
  // curvature needs a lambda stencil, which the padding supplies
  for (const auto& r : rows) EXPECT_TRUE(std::isfinite(r.R_q));
}

TEST(Sweep, ClassicalColumnsWithoutQuantumEngines) {
  auto c = small_k_sweep();
  c.engines = {Engine::classical_series};
  const auto rows = run_sweep(c);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.q.has_value());
    EXPECT_TRUE(r.cl.has_value());
    EXPECT_TRUE(std::isfinite(r.R_cl));
  }
}

TEST(Sweep, EnginesDoNotInteract) {
  auto both = small_k_sweep();
  auto q = both;
  q.engines = {Engine::quantum_numeric};
  auto cl = both;
  cl.engines = {Engine::classical_series};
  const auto rb = run_sweep(both), rq = run_sweep(q), rc = run_sweep(cl);
  for (std::size_t i = 0; i < rb.size(); ++i) {
    EXPECT_EQ(rb[i].q->g11, rq[i].q->g11);
    EXPECT_EQ(rb[i].R_q, rq[i].R_q);
    EXPECT_EQ(rb[i].cl->g22, rc[i].cl->g22);
    EXPECT_EQ(rb[i].R_cl, rc[i].R_cl);
  }
}

TEST(Sweep, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto c = small_k_sweep();
  c.threads = 1;
  const std::string a = csv_of(run_sweep(c));
  const std::string b = csv_of(run_sweep(c));
  c.threads = 3;
  const std::string d = csv_of(run_sweep(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
}

TEST(Sweep, RowOrderFollowsGrid) {
  SweepConfig c;
  c.mode = SweepMode::grid;
  c.k_min = 0.5;
  c.k_max = 0.6;
  c.k_step = 0.05;
  c.lambda_min = 0.1;
  c.lambda_max = 0.2;
  c.lambda_step = 0.05;
  c.engines = {Engine::quantum_series};
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(rows[i * 3 + j].k, 0.5 + 0.05 * static_cast<double>(i), 1e-12);
      EXPECT_NEAR(rows[i * 3 + j].lambda, 0.1 + 0.05 * static_cast<double>(j), 1e-12);
    }
}

TEST(Sweep, FlagsNearOrigin) {
  SweepConfig c;
  c.k_min = -0.2;
  c.k_max = 0.2;
  c.k_step = 0.1;
  c.lambda = 0.2;
  c.states = 20;
  c.engines = {Engine::quantum_numeric};
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 5u);
  auto has = [](const SweepRow& r, const std::string& f) {
    return std::find(r.flags.begin(), r.flags.end(), f) != r.flags.end();
  };
  EXPECT_FALSE(has(rows[0], "near_k0"));
  EXPECT_TRUE(has(rows[1], "near_k0"));
  EXPECT_TRUE(has(rows[2], "near_k0"));
  EXPECT_TRUE(has(rows[2], "masked_curvature"));
  EXPECT_TRUE(std::isnan(rows[2].R_q));
  EXPECT_TRUE(rows[2].q.has_value());  // the metric itself is fine at k = 0
  EXPECT_FALSE(has(rows[4], "near_k0"));
}

TEST(Sweep, SeriesEnginesMaskedOutsideTheirBranch) {
  SweepConfig c;
  c.k_min = -0.6;
  c.k_max = -0.5;
  c.k_step = 0.05;
  c.engines = {Engine::quantum_series};
  const auto rows = run_sweep(c);
  for (const auto& r : rows) EXPECT_FALSE(r.q.has_value());
}

TEST(Sweep, TailWarningOutsideSeriesRadius) {
  SweepConfig c;
  c.k_min = 0.1;
  c.k_max = 0.2;
  c.k_step = 0.05;
  c.lambda = 0.5;
  c.engines = {Engine::quantum_series};
  const auto rows = run_sweep(c);
  auto warned = [](const SweepRow& r) {
    return std::find(r.flags.begin(), r.flags.end(), "tail_warn") != r.flags.end();
  };
  EXPECT_TRUE(warned(rows.front()));

  c.k_min = 2.0;
  c.k_max = 2.1;
  c.lambda = 0.1;
  EXPECT_FALSE(warned(run_sweep(c).front()));
}

TEST(Sweep, MetricAgreementAwayFromOrigin) {
  SweepConfig c;
  c.k_min = -1.0;
  c.k_max = 1.0;
  c.k_step = 0.1;
  c.lambda = 0.2;
  c.states = 30;
  for (const auto& r : run_sweep(c)) {
    if (std::abs(r.k) < 0.6 - 1e-9) continue;
    ASSERT_TRUE(r.q && r.cl);
    EXPECT_LT(rel(r.q->g11, r.cl->g11), 0.05) << "k=" << r.k;
  }
}

TEST(Sweep, MetricAgreementAlongCoupling) {
  SweepConfig c;
  c.mode = SweepMode::lambda_sweep;
  c.k = -0.5;
  c.lambda_min = 0.05;
  c.lambda_max = 0.5;
  c.lambda_step = 0.05;
  c.states = 30;
  for (const auto& r : run_sweep(c)) {
    ASSERT_TRUE(r.q && r.cl);
    EXPECT_LT(rel(r.q->g11, r.cl->g11), 0.05) << "lambda=" << r.lambda;
    EXPECT_LT(rel(r.q->g12, r.cl->g12), 0.05) << "lambda=" << r.lambda;
    EXPECT_LT(rel(r.q->g22, r.cl->g22), 0.05) << "lambda=" << r.lambda;
  }
}

TEST(Landmarks, SyntheticPeakAndDip) {
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 100; ++i) {
    SweepRow r;
    r.k = -1.0 + 0.01 * i;
    r.lambda = 0.2;
    const double x = r.k;
    r.q = MetricValue{1.0 - (x + 0.3) * (x + 0.3), std::cos(6.0 * (x + 0.8)), 1.0};
    rows.push_back(r);
  }
  const auto marks = landmarks(rows, SweepMode::k_sweep, {"g11_q", "g12_q", "R_q"});
  const auto peak = nearest_landmark(marks, "g11_q", ExtremumKind::maximum, -0.3);
  ASSERT_TRUE(peak);
  EXPECT_NEAR(peak->location, -0.3, 1e-6);
  EXPECT_NEAR(peak->value, 1.0, 1e-9);
  EXPECT_NEAR(peak->step, 0.01, 1e-12);
  const auto dip = nearest_landmark(marks, "g12_q", ExtremumKind::minimum, -0.3);
  ASSERT_TRUE(dip);
  EXPECT_NEAR(dip->location, -0.8 + M_PI / 6.0, 1e-3);
  EXPECT_FALSE(nearest_landmark(marks, "R_q", ExtremumKind::minimum, 0.0));
}

TEST(Landmarks, GridSweepsRejected) { EXPECT_THROW(landmarks({}, SweepMode::grid), DomainError); }

TEST(Compare, HarmonicLikeGapsTrackClassicalFrequency) {
  const auto rep = compare({1.0, 0.2, 1.0}, 10);
  EXPECT_DOUBLE_EQ(rep.action, 0.5);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.mprime, r.m);
    if (r.m % 2 != 0 || r.m > 8) continue;
    EXPECT_LT(std::abs(r.gap_q - r.gap_cl) / r.gap_q, 0.03) << "m=" << r.m;
  }
}

TEST(Compare, HighChannelsNegligible) {
  const auto rep = compare({1.0, 0.2, 1.0}, 10);
  for (const auto& r : rep.rows) {
    if (r.m <= 4) continue;
    for (double v : {r.G.g11, r.G.g12, r.G.g22}) EXPECT_LT(std::abs(v), 1e-5) << "m=" << r.m;
    ASSERT_TRUE(r.Gcl);
    for (double v : {r.Gcl->g11, r.Gcl->g12, r.Gcl->g22}) EXPECT_LT(std::abs(v), 1e-5) << "m'=" << r.mprime;
  }
}

TEST(Compare, ScaledFourierCoefficients) {
  const auto rep = compare({1.0, 0.2, 1.0}, 4);
  // odd harmonics of an even deformation vanish, matching the parity selection rule
  EXPECT_EQ(rep.rows[0].B1, 0.0);
  EXPECT_LT(std::abs(rep.rows[0].beta1p), 1e-12);
  EXPECT_GT(std::abs(rep.rows[1].beta1p), 0.0);
}

TEST(Compare, DoubleWellPairing) {
  const auto rep = compare({-1.0, 0.2, 1.0}, 10);
  ASSERT_EQ(rep.rows.size(), 10u);
  EXPECT_LT(rep.rows[0].gap_q, 1e-9);
  for (const auto& r : rep.rows) {
    if (r.m % 2 == 0) {
      EXPECT_EQ(r.mprime, r.m / 2);
      EXPECT_TRUE(r.Gcl.has_value());
    } else {
      EXPECT_EQ(r.mprime, -1);
      EXPECT_FALSE(r.Gcl.has_value());
      EXPECT_TRUE(std::isnan(r.gap_cl));
    }
  }
}

TEST(Compare, PairingFailsAboveTheBarrier) {
  // a shallow well has no quasi-degenerate doublet at all
  EXPECT_THROW(compare({-0.05, 0.2, 1.0}, 4), ConsistencyError);
}

TEST(Compare, CsvShape) {
  const auto rep = compare({-1.0, 0.2, 1.0}, 4);
  std::ostringstream os;
  write_compare_csv(os, rep);
  std::istringstream is(os.str());
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
    ++n;
  }
  EXPECT_EQ(n, 5);
}
