#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cutofflab/error.hpp"
#include "cutofflab/rd_continuity.hpp"
#include "support/oracles.hpp"

using namespace cutofflab;
using namespace cutofflab::rd;

namespace {

const Selector kOutcome = Selector::by_name("round1_total");

oracle::QuadraticDgp curved(double jump = 0.0) {
  oracle::QuadraticDgp g;
  g.jump = jump;
  g.curv_treated = -0.002;
  g.curv_control = 0.003;
  return g;
}

oracle::QuadraticDgp linear(double jump, double noise) {
  oracle::QuadraticDgp g;
  g.jump = jump;
  g.curv_treated = 0.0;
  g.curv_control = 0.0;
  g.noise_sd = noise;
  g.athlete_sd = noise > 0.0 ? 0.1 : 0.0;
  return g;
}

Dataset transform(const Dataset& ds, double a, double b) {
  std::vector<JumpRecord> recs(ds.records().begin(), ds.records().end());
  for (auto& r : recs) r.round1_total = a + b * r.round1_total;
  return Dataset(recs, "transformed");
}

}  // namespace

TEST(Kernel, TriangularWeights) {
  EXPECT_DOUBLE_EQ(triangular_weight(30.5, 30.5, 4.0), 1.0);
  EXPECT_DOUBLE_EQ(triangular_weight(34.5, 30.5, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(triangular_weight(28.5, 30.5, 4.0), 0.5);
  EXPECT_DOUBLE_EQ(triangular_weight(10.0, 30.5, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(kernel_weight(Kernel::Uniform, 27.0, 30.5, 4.0), 1.0);
  EXPECT_THROW(triangular_weight(30.0, 30.5, 0.0), InvalidParameters);
}

TEST(LocalLinear, ExactRecoveryWithoutNoise) {
  const auto ds = oracle::quadratic_dataset(linear(0.3, 0.0), 1);
  const auto fit = local_linear_jump(ds, kOutcome, 30.5, 6.5);
  EXPECT_NEAR(fit.tau, 0.3, 1e-12);
  const auto res = rd_continuity_estimate(ds, kOutcome, 30.5, {.bandwidth = 6.5});
  EXPECT_NEAR(res.tau_conventional, 0.3, 1e-12);
  EXPECT_NEAR(res.tau_bias_corrected, res.tau_conventional, 1e-12);
}

TEST(LocalLinear, UniformWideKernelIsOls) {
  const auto ds = oracle::quadratic_dataset(curved(0.2), 3);
  const auto fit = local_linear_jump(ds, kOutcome, 30.5, 1000.0, {}, Kernel::Uniform);
  const Eigen::Index n = static_cast<Eigen::Index>(ds.size());
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  Eigen::Index i = 0;
  for (const auto& r : ds.records()) {
    const double rt = r.pre_event_rank - 30.5;
    const double t = r.pre_event_rank < 30.5 ? 1.0 : 0.0;
    X.row(i) << 1.0, t, rt, t * rt;
    y(i) = r.round1_total;
    ++i;
  }
  const Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  ASSERT_EQ(fit.coefficients.size(), 4);
  EXPECT_LT((fit.coefficients - ols).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(fit.tau, ols(1), 1e-9);
}

TEST(LocalLinear, NoisyJumpWithinThreeSe) {
  auto g = curved(0.274);
  const auto ds = oracle::quadratic_dataset(g, 11);
  const auto res = rd_continuity_estimate(ds, kOutcome, 30.5, {.bandwidth = 5.5});
  EXPECT_NEAR(res.tau_conventional, 0.274, 3.0 * res.se_conventional);
  EXPECT_NEAR(res.tau_bias_corrected, 0.274, 3.0 * res.se_robust);
  EXPECT_EQ(res.rank_lo, 26);
  EXPECT_EQ(res.rank_hi, 35);
}

TEST(LocalLinear, TooFewMassPoints) {
  const auto ds = oracle::quadratic_dataset(curved(), 2);
  EXPECT_THROW(local_linear_jump(ds, kOutcome, 30.5, 1.0), EstimationError);
}

TEST(Continuity, LocationScaleEquivariance) {
  const auto ds = oracle::quadratic_dataset(curved(0.1), 21);
  const auto base = rd_continuity_estimate(ds, kOutcome, 30.5, {.bandwidth = 7.0});
  const auto moved = rd_continuity_estimate(transform(ds, 4.0, -2.5), kOutcome, 30.5, {.bandwidth = 7.0});
  EXPECT_NEAR(moved.tau_conventional, -2.5 * base.tau_conventional, 1e-10);
  EXPECT_NEAR(moved.tau_bias_corrected, -2.5 * base.tau_bias_corrected, 1e-10);
  EXPECT_NEAR(moved.se_conventional, 2.5 * base.se_conventional, 1e-10);
  EXPECT_NEAR(moved.se_robust, 2.5 * base.se_robust, 1e-10);
  EXPECT_NEAR(moved.p_robust, base.p_robust, 1e-10);
}

TEST(Continuity, ClusterChoiceChangesOnlyStandardErrors) {
  const auto ds = oracle::quadratic_dataset(curved(0.1), 22);
  const auto by_athlete = rd_continuity_estimate(ds, kOutcome, 30.5, {.bandwidth = 7.0});
  const auto by_obs = rd_continuity_estimate(ds, kOutcome, 30.5, {.cluster = ClusterBy::Observation, .bandwidth = 7.0});
  EXPECT_DOUBLE_EQ(by_athlete.tau_conventional, by_obs.tau_conventional);
  EXPECT_NE(by_athlete.se_conventional, by_obs.se_conventional);
  EXPECT_EQ(by_athlete.cluster, "athlete_id");
}

TEST(Continuity, CovariatesReported) {
  const auto ds = oracle::quadratic_dataset(curved(0.1), 23);
  const auto res = rd_continuity_estimate(ds, kOutcome, 30.5,
                                          {.covariates = {Selector::by_name("wc_points_before")}, .bandwidth = 7.0});
  ASSERT_EQ(res.covariates_used.size(), 1u);
  EXPECT_EQ(res.covariates_used[0], "wc_points_before");
}

TEST(Continuity, SizeAndCoverageOverReplicates) {
  int covered = 0;
  int rejected = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto null_ds = oracle::quadratic_dataset(curved(0.0), 500 + r);
    rejected += rd_continuity_estimate(null_ds, kOutcome, 30.5).p_robust < 0.05;
    const auto ds = oracle::quadratic_dataset(curved(0.3), 900 + r);
    const auto res = rd_continuity_estimate(ds, kOutcome, 30.5);
    covered += std::fabs(res.tau_bias_corrected - 0.3) <= 1.959963984540054 * res.se_robust;
  }
  EXPECT_GE(covered / double(reps), 0.89);
  EXPECT_LE(covered / double(reps), 0.99);
  EXPECT_GE(rejected / double(reps), 0.01);
  EXPECT_LE(rejected / double(reps), 0.11);
}

TEST(Bandwidth, ShrinksAtFifthRootRate) {
  // Medians: the boundary curvature is noisy at the base size and a few
  // replicates land on the upper clamp.
  auto median_h = [](int scale, std::uint64_t seed0) {
    std::vector<double> hs;
    for (int r = 0; r < 40; ++r) {
      auto g = curved();
      g.events *= scale;
      hs.push_back(mse_optimal_bandwidth(oracle::quadratic_dataset(g, seed0 + r), kOutcome, 30.5).h);
    }
    std::sort(hs.begin(), hs.end());
    return 0.5 * (hs[19] + hs[20]);
  };
  const double ratio = median_h(16, 6000) / median_h(1, 5000);
  EXPECT_NEAR(ratio, std::pow(16.0, -0.2), 0.15 * std::pow(16.0, -0.2));
}

TEST(Bandwidth, InvariantToNegation) {
  auto g = linear(0.0, 0.5);
  g.slope = 0.0;
  const auto ds = oracle::quadratic_dataset(g, 31);
  const auto a = mse_optimal_bandwidth(ds, kOutcome, 30.5);
  const auto b = mse_optimal_bandwidth(transform(ds, 0.0, -1.0), kOutcome, 30.5);
  EXPECT_NEAR(a.h, b.h, 0.1 * a.h);
}

TEST(Bandwidth, CurvatureNarrowsBandwidth) {
  auto flat = curved();
  flat.curv_treated = -0.0005;
  flat.curv_control = 0.0005;
  auto steep = curved();
  steep.curv_treated = -0.01;
  steep.curv_control = 0.015;
  double hf = 0.0, hs = 0.0;
  for (int r = 0; r < 5; ++r) {
    hf += mse_optimal_bandwidth(oracle::quadratic_dataset(flat, 60 + r), kOutcome, 30.5).h;
    hs += mse_optimal_bandwidth(oracle::quadratic_dataset(steep, 60 + r), kOutcome, 30.5).h;
  }
  EXPECT_LT(hs, hf);
}

TEST(Bandwidth, RequiresTwentyPerSide) {
  auto g = curved();
  g.events = 1;
  const auto ds = oracle::quadratic_dataset(g, 1).filter([](const JumpRecord& r) { return r.pre_event_rank > 25; }, "");
  EXPECT_THROW(mse_optimal_bandwidth(ds, kOutcome, 30.5), EstimationError);
}

TEST(DiffInDisc, EqualsDifferenceOfSeparateFits) {
  auto before = oracle::quadratic_records(curved(0.05), 41);
  for (auto& r : before) {
    r.regime = Regime::Before;
    r.qual_rank_nominal = r.pre_event_rank > 10 ? std::optional<int>(r.pre_event_rank - 10) : std::nullopt;
  }
  auto g = curved(0.30);
  g.event_prefix = "F";
  auto after = oracle::quadratic_records(g, 42);
  std::vector<JumpRecord> pooled = before;
  pooled.insert(pooled.end(), after.begin(), after.end());
  const Dataset ds(pooled, "pooled");
  const auto dd = diff_in_disc(ds, kOutcome, 30.5, {.bandwidth = 7.0});
  const auto tb = local_linear_jump(ds.with_regime(Regime::Before), kOutcome, 30.5, 7.0).tau;
  const auto ta = local_linear_jump(ds.with_regime(Regime::After), kOutcome, 30.5, 7.0).tau;
  EXPECT_NEAR(dd.delta_tau, ta - tb, 1e-12);
  EXPECT_NEAR(dd.tau_before, tb, 1e-12);
  EXPECT_NEAR(dd.tau_after, ta, 1e-12);
  EXPECT_NEAR(dd.delta_tau, 0.25, 3.0 * dd.se);
}

TEST(DiffInDisc, NullDifference) {
  auto before = oracle::quadratic_records(curved(0.2), 51);
  for (auto& r : before) {
    r.regime = Regime::Before;
    r.qual_rank_nominal = r.pre_event_rank > 10 ? std::optional<int>(r.pre_event_rank - 10) : std::nullopt;
  }
  auto g = curved(0.2);
  g.event_prefix = "F";
  auto after = oracle::quadratic_records(g, 52);
  before.insert(before.end(), after.begin(), after.end());
  const auto dd = diff_in_disc(Dataset(before, "pooled"), kOutcome, 30.5);
  EXPECT_LT(std::fabs(dd.delta_tau), 3.0 * dd.se);
  EXPECT_THROW(diff_in_disc(Dataset(after, "after only"), kOutcome, 30.5), EstimationError);
}

TEST(PlotData, ConstantOutcome) {
  auto g = linear(0.0, 0.0);
  g.base = 0.6;
  g.slope = 0.0;
  const auto ds = oracle::quadratic_dataset(g, 1);
  const auto plot = rd_plot_data(ds, kOutcome, 30.5, 28, 33);
  ASSERT_EQ(plot.rows.size(), 50u);
  for (const auto& row : plot.rows) {
    EXPECT_NEAR(row.bin_mean, 0.6, 1e-12);
    EXPECT_NEAR(row.poly_fit, 0.6, 1e-9);
    EXPECT_EQ(row.const_fit.has_value(), row.rank >= 28 && row.rank <= 33);
  }
}

TEST(PlotData, SmoothOutcomeContinuousAtCutoff) {
  auto g = linear(0.0, 0.2);
  g.events = 200;
  const auto ds = oracle::quadratic_dataset(g, 5);
  const auto plot = rd_plot_data(ds, kOutcome, 30.5, 28, 33);
  const auto& last_t = plot.rows[29];
  const auto& first_c = plot.rows[30];
  EXPECT_NEAR(first_c.poly_fit - last_t.poly_fit, g.slope, 0.06);
}

TEST(Polynomial, ExactCubic) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(1.0 - 2.0 * i + 0.5 * i * i - 0.01 * i * i * i);
  }
  const auto fit = fit_polynomial(x, y, 3, 10.0);
  EXPECT_NEAR(fit(7.5), 1.0 - 15.0 + 0.5 * 56.25 - 0.01 * 421.875, 1e-9);
  EXPECT_NEAR(fit.second_derivative(4.0), 1.0 - 0.06 * 4.0, 1e-9);
}
