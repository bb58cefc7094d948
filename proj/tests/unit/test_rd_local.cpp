#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cutofflab/error.hpp"
#include "cutofflab/rd_local.hpp"
#include "support/oracles.hpp"

using namespace cutofflab;
using namespace cutofflab::rd;

namespace {

WindowSample make_sample(std::vector<double> treated, std::vector<double> control) {
  WindowSample s;
  for (double v : treated) {
    s.values.push_back(v);
    s.treated.push_back(1);
  }
  for (double v : control) {
    s.values.push_back(v);
    s.treated.push_back(0);
  }
  s.n_treated = treated.size();
  s.n_control = control.size();
  return s;
}

std::vector<int> labels(const WindowSample& s) { return {s.treated.begin(), s.treated.end()}; }

// Events with every rank 1..50 where the covariate is supplied per rank.
Dataset covariate_dataset(int events, const std::function<double(int rank, int event)>& value) {
  std::vector<JumpRecord> recs;
  for (int e = 0; e < events; ++e) {
    for (int rank = 1; rank <= 50; ++rank) {
      JumpRecord r;
      r.athlete_id = "A" + std::to_string((rank + 7 * e) % 60);
      r.event_id = "E" + std::to_string(e);
      r.regime = Regime::After;
      r.pre_event_rank = rank;
      r.qual_rank_nominal = rank;
      r.wc_points_before = value(rank, e);
      r.advanced = rank <= 30;
      recs.push_back(r);
    }
  }
  return Dataset(recs, "covariates");
}

}  // namespace

TEST(Window, SymmetricConstruction) {
  EXPECT_EQ(RdWindow::symmetric(30.5, 1), (RdWindow{30, 31, 30.5}));
  EXPECT_EQ(RdWindow::symmetric(30.5, 3), (RdWindow{28, 33, 30.5}));
  EXPECT_EQ(RdWindow::symmetric(30.5, 3).half_width(), 3);
  EXPECT_THROW((RdWindow{30, 31, 30.0}).validate(), InvalidParameters);
  EXPECT_THROW((RdWindow{31, 33, 30.5}).validate(), InvalidParameters);
  EXPECT_TRUE(is_treated(30, 30.5));
  EXPECT_FALSE(is_treated(31, 30.5));
}

TEST(DiffInMeans, Arithmetic) {
  EXPECT_NEAR(diff_in_means(make_sample({1, 1, 0}, {0, 0, 0})), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(diff_in_means(make_sample({1, 2, 3}, {1, 2, 3})), 0.0);
  EXPECT_THROW(diff_in_means(make_sample({}, {0, 1})), EstimationError);
}

TEST(DiffInMeans, RecoversInjectedJump) {
  oracle::QuadraticDgp g;
  g.events = 400;
  g.jump = 0.25;
  g.slope = 0.0;
  g.curv_treated = 0.0;
  g.curv_control = 0.0;
  const auto ds = oracle::quadratic_dataset(g, 8);
  const auto s = window_sample(ds, Selector::by_name("round1_total"), RdWindow::symmetric(30.5, 1));
  EXPECT_EQ(s.n_treated, 400u);
  const double se = std::sqrt(2.0 * (0.3 * 0.3 + 0.1 * 0.1) / 400.0);
  EXPECT_NEAR(diff_in_means(s), 0.25, 3.0 * se);
}

TEST(Fisher, FourUnitExactEnumeration) {
  const auto s = make_sample({1, 1}, {0, 0});
  // Both the labelling {1,1}|{0,0} and its mirror reach |diff| = 1.
  const double exact = oracle::exact_permutation_p(s.values, labels(s));
  EXPECT_NEAR(exact, 1.0 / 3.0, 1e-15);
  FisherOptions enumerate;
  enumerate.mode = FisherMode::Enumerate;
  EXPECT_NEAR(fisher_p(s, enumerate), exact, 1e-15);

  FisherOptions sim;
  sim.n_permutations = 60000;
  sim.seed = 5;
  EXPECT_NEAR(fisher_p(s, sim), exact, 0.01);
}

TEST(Fisher, EnumerationMatchesOracle) {
  std::mt19937_64 eng(17);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> t(6), c(8);
    for (double& v : t) v = z(eng) + 0.5;
    for (double& v : c) v = z(eng);
    const auto s = make_sample(t, c);
    FisherOptions opt;
    opt.mode = FisherMode::Enumerate;
    EXPECT_NEAR(fisher_p(s, opt), oracle::exact_permutation_p(s.values, labels(s)), 1e-12);
    opt.mode = FisherMode::Auto;
    opt.n_permutations = 10000;  // C(14, 6) = 3003 is enumerated
    EXPECT_NEAR(fisher_p(s, opt), oracle::exact_permutation_p(s.values, labels(s)), 1e-12);
  }
}

TEST(Fisher, ConstantOutcomesGivePOne) {
  const auto s = make_sample({2, 2, 2}, {2, 2});
  EXPECT_DOUBLE_EQ(fisher_p(s), 1.0);
}

TEST(Fisher, SimulatedPValueIsDeterministicAndOrderFree) {
  const auto s = make_sample({0.3, 1.4, 0.9, 2.2}, {0.1, -0.4, 0.8, 0.0, 0.5});
  FisherOptions opt;
  opt.n_permutations = 999;
  const double p = fisher_p(s, opt);
  EXPECT_EQ(p, fisher_p(s, opt));
  const auto reordered = make_sample({2.2, 0.9, 1.4, 0.3}, {0.5, 0.0, 0.8, -0.4, 0.1});
  EXPECT_EQ(p, fisher_p(reordered, opt));
  const double floor = 1.0 / 1000.0;
  EXPECT_GE(p, floor);
}

TEST(Fisher, NullCalibration) {
  std::mt19937_64 eng(2024);
  std::normal_distribution<double> z;
  int rejections = 0;
  const int replicates = 1000;
  FisherOptions opt;
  opt.n_permutations = 199;
  for (int r = 0; r < replicates; ++r) {
    std::vector<double> t(10), c(10);
    for (double& v : t) v = z(eng);
    for (double& v : c) v = z(eng);
    opt.seed = 1000 + r;
    rejections += fisher_p(make_sample(t, c), opt) <= 0.05;
  }
  EXPECT_LE(static_cast<double>(rejections) / replicates, 0.07);
}

TEST(Fisher, BinomialCoefficient) {
  EXPECT_EQ(binomial_coefficient(4, 2), 6u);
  EXPECT_EQ(binomial_coefficient(60, 30), 118264581564861424u);
  EXPECT_EQ(binomial_coefficient(200, 100), SIZE_MAX);
}

TEST(RdLocal, PerfectSeparationHitsFloor) {
  std::vector<JumpRecord> recs;
  for (int e = 0; e < 10; ++e) {
    for (int rank : {30, 31}) {
      JumpRecord r;
      r.athlete_id = "A" + std::to_string(rank);
      r.event_id = "E" + std::to_string(e);
      r.pre_event_rank = rank;
      r.qual_rank_nominal = rank;
      r.advanced = rank == 30;
      recs.push_back(r);
    }
  }
  const Dataset ds(recs, "separated");
  FisherOptions opt;
  opt.n_permutations = 2000;
  const auto res = rd_local_estimate(ds, Selector::by_name("advanced"), RdWindow::symmetric(30.5, 1), opt);
  EXPECT_DOUBLE_EQ(res.estimate, 1.0);
  EXPECT_DOUBLE_EQ(res.p_value, 1.0 / 2001.0);
  EXPECT_EQ(res.n_treated, 10u);
  EXPECT_EQ(res.n_control, 10u);
}

TEST(SelectWindow, IndependentCovariateReachesMax) {
  // Same value for every rank within an event: perfectly balanced.
  const auto ds = covariate_dataset(30, [](int, int e) { return 10.0 * e; });
  WindowSearchOptions opt;
  opt.max_half_width = 6;
  opt.fisher.n_permutations = 199;
  const auto sel = select_window(ds, {Selector::by_name("wc_points_before")}, 30.5, opt);
  EXPECT_TRUE(sel.balanced);
  EXPECT_EQ(sel.window, RdWindow::symmetric(30.5, 6));
}

TEST(SelectWindow, ConstructedImbalanceGivesTwentyEightToThirtyThree) {
  const auto ds = covariate_dataset(30, [](int rank, int e) {
    if (rank <= 27) return 500.0 + e;
    if (rank >= 34) return 0.0 + e;
    return 100.0 + e;
  });
  WindowSearchOptions opt;
  opt.fisher.n_permutations = 499;
  const auto sel = select_window(ds, {Selector::by_name("wc_points_before")}, 30.5, opt);
  EXPECT_TRUE(sel.balanced);
  EXPECT_EQ(sel.window.lower, 28);
  EXPECT_EQ(sel.window.upper, 33);
  ASSERT_EQ(sel.steps.size(), 4u);
  EXPECT_LT(sel.steps.back().min_p, 0.15);
}

TEST(SelectWindow, ThresholdOneStopsAtOne) {
  std::mt19937_64 eng(4);
  std::normal_distribution<double> z;
  std::vector<double> noise(40 * 50);
  for (double& v : noise) v = 50.0 + 10.0 * z(eng);
  const auto ds = covariate_dataset(40, [&](int rank, int e) { return noise[e * 50 + rank - 1]; });
  WindowSearchOptions opt;
  opt.threshold = 1.0;
  opt.fisher.n_permutations = 199;
  const auto sel = select_window(ds, {Selector::by_name("wc_points_before")}, 30.5, opt);
  EXPECT_EQ(sel.window.half_width(), 1);
  EXPECT_FALSE(sel.balanced);
}

TEST(SelectWindow, NarrowerForStricterThreshold) {
  std::mt19937_64 eng(6);
  std::normal_distribution<double> z;
  std::vector<double> vals(40 * 50);
  for (int e = 0; e < 40; ++e) {
    for (int rank = 1; rank <= 50; ++rank) vals[e * 50 + rank - 1] = 200.0 - 2.0 * rank + 15.0 * z(eng);
  }
  const auto ds = covariate_dataset(40, [&](int rank, int e) { return vals[e * 50 + rank - 1]; });
  int prev = 100;
  for (double threshold : {0.01, 0.05, 0.15, 0.3, 0.6}) {
    WindowSearchOptions opt;
    opt.threshold = threshold;
    opt.fisher.n_permutations = 199;
    const int hw = select_window(ds, {Selector::by_name("wc_points_before")}, 30.5, opt).window.half_width();
    EXPECT_LE(hw, prev) << threshold;
    prev = hw;
  }
}
