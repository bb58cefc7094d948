#include <benchmark/benchmark.h>

#include <random>

#include "cutofflab/contest_model.hpp"
#include "cutofflab/rd_continuity.hpp"
#include "cutofflab/rd_local.hpp"
#include "cutofflab/simulator.hpp"
#include "cutofflab/wls.hpp"

using namespace cutofflab;

namespace {

const Dataset& default_dataset() {
  static const Dataset ds = sim::simulate_dataset({});
  return ds;
}

void BM_SimulateDataset(benchmark::State& state) {
  sim::SimulationConfig cfg;
  for (auto _ : state) {
    auto ds = sim::simulate_dataset(cfg);
    benchmark::DoNotOptimize(ds);
  }
}
BENCHMARK(BM_SimulateDataset)->Unit(benchmark::kMillisecond);

void BM_FisherP(benchmark::State& state) {
  const auto after = default_dataset().with_regime(Regime::After);
  const auto adv = Selector::by_name("advanced");
  const auto window = rd::RdWindow::symmetric(30.5, static_cast<int>(state.range(0)));
  rd::FisherOptions opt;
  opt.n_permutations = 10000;
  for (auto _ : state) benchmark::DoNotOptimize(rd::fisher_p(after, adv, window, opt));
}
BENCHMARK(BM_FisherP)->Arg(1)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Wls(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::mt19937_64 eng(3);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = static_cast<double>(i % 50) - 24.5;
    const double t = r < 0 ? 1.0 : 0.0;
    x.row(i) << 1.0, t, r, t * r;
    y(i) = 0.3 * t + 0.01 * r + z(eng);
    w(i) = std::max(0.0, 1.0 - std::abs(r) / 10.0);
  }
  for (auto _ : state) {
    wls::WlsFit fit(x, y, w);
    benchmark::DoNotOptimize(fit.linear_weights(1));
  }
}
BENCHMARK(BM_Wls)->Arg(1000)->Arg(5000)->Arg(20000);

void BM_ContinuityEstimate(benchmark::State& state) {
  const auto after = default_dataset().with_regime(Regime::After);
  const auto y = Selector::by_name("round1_total");
  for (auto _ : state) benchmark::DoNotOptimize(rd::rd_continuity_estimate(after, y, 30.5));
}
BENCHMARK(BM_ContinuityEstimate)->Unit(benchmark::kMillisecond);

void BM_SampleOutcomes(benchmark::State& state) {
  const contest::ContestParams p{1.0, 1.0, 0.5, 1};
  for (auto _ : state) benchmark::DoNotOptimize(contest::sample_outcomes(p, 100000, 7));
}
BENCHMARK(BM_SampleOutcomes)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
