#include "cutofflab/contest_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cutofflab/error.hpp"
#include "cutofflab/parallel.hpp"
#include "cutofflab/rng.hpp"

namespace cutofflab::contest {
namespace {

constexpr std::size_t kSampleBlock = 4096;

}  // namespace

void ContestParams::validate() const {
  if (!(prize > 0.0) || !std::isfinite(prize)) {
    throw InvalidParameters("contest: prize W must be positive, got " + std::to_string(prize));
  }
  if (!(win_bonus >= 0.0) || !std::isfinite(win_bonus)) {
    throw InvalidParameters("contest: win bonus u must be nonnegative");
  }
  if (!(loss_penalty >= win_bonus) || !std::isfinite(loss_penalty)) {
    throw InvalidParameters("contest: loss penalty d must be at least the win bonus u");
  }
  if (salience != 0 && salience != 1) {
    throw InvalidParameters("contest: salience must be 0 or 1");
  }
}

EquilibriumSolution solve_equilibrium(const ContestParams& params) {
  params.validate();
  const double s = params.salience;
  const double v1 = params.prize + params.loss_penalty * s;
  const double v2 = params.prize + params.win_bonus * s;

  EquilibriumSolution sol;
  sol.params = params;
  sol.stake1 = v1;
  sol.stake2 = v2;
  sol.support_upper = v2;
  sol.atom_at_zero = (v1 - v2) / v1;
  // Player 1 earns v1 * F2(x) - d*s - x, constant on the support; at x = v2
  // that is v1 - v2 - d*s = -u*s.
  sol.payoff1 = -params.win_bonus * s;
  sol.payoff2 = 0.0;
  sol.win_prob2 = v2 / (2.0 * v1);
  sol.win_prob1 = 1.0 - sol.win_prob2;
  sol.effort1_derived = v2 / 2.0;
  sol.effort2_derived = v2 * v2 / (2.0 * v1);
  sol.effort1_printed = v1 * v1 * v2 / (v1 + v2);
  sol.effort2_printed = v2 * v2 * v1 / (v1 + v2);
  return sol;
}

double cdf_player1(const EquilibriumSolution& sol, double x) {
  if (x <= 0.0) return 0.0;
  return std::clamp(x / sol.stake2, 0.0, 1.0);
}

double cdf_player2(const EquilibriumSolution& sol, double x) {
  if (x < 0.0) return 0.0;
  return std::clamp((x + sol.stake1 - sol.stake2) / sol.stake1, 0.0, 1.0);
}

double quantile_player1(const EquilibriumSolution& sol, double u) { return u * sol.stake2; }

double quantile_player2(const EquilibriumSolution& sol, double u) {
  if (u < sol.atom_at_zero) return 0.0;
  return std::min(sol.stake2, u * sol.stake1 - (sol.stake1 - sol.stake2));
}

VerificationReport verify_equilibrium(const ContestParams& params, std::size_t grid_points, double tolerance) {
  if (grid_points < 50) {
    throw InvalidParameters("verify_equilibrium: grid_points must be at least 50");
  }
  const EquilibriumSolution sol = solve_equilibrium(params);
  const double v1 = sol.stake1;
  const double v2 = sol.stake2;
  const double ds = params.loss_penalty * params.salience;
  const double upper = 1.1 * v2;

  VerificationReport rep;
  rep.grid_points = grid_points;
  rep.grid_spacing = upper / static_cast<double>(grid_points - 1);
  rep.tolerance = tolerance < 0.0 ? 2.0 * rep.grid_spacing : tolerance;
  rep.max_improvement1 = -std::numeric_limits<double>::infinity();
  rep.max_improvement2 = -std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < grid_points; ++k) {
    const double x = rep.grid_spacing * static_cast<double>(k);
    // Probability of beating the opponent's mixture with pure effort x.
    // F1 is continuous; F2 has an atom at zero that ties half the time.
    double beat2 = cdf_player2(sol, x);
    if (x == 0.0) beat2 = 0.5 * sol.atom_at_zero;
    const double beat1 = cdf_player1(sol, x);

    const double payoff1 = v1 * beat2 - ds - x;
    const double payoff2 = v2 * beat1 - x;
    rep.max_improvement1 = std::max(rep.max_improvement1, payoff1 - sol.payoff1);
    rep.max_improvement2 = std::max(rep.max_improvement2, payoff2 - sol.payoff2);
  }
  rep.max_improvement = std::max(rep.max_improvement1, rep.max_improvement2);
  rep.passed = rep.max_improvement <= rep.tolerance;
  return rep;
}

std::vector<ContestDraw> sample_outcomes(const ContestParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidParameters("sample_outcomes: n must be at least 1");
  const EquilibriumSolution sol = solve_equilibrium(params);
  std::vector<ContestDraw> out(n);
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  parallel_for(blocks, [&](std::size_t b) {
    Engine eng = substream(seed, {b});
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      ContestDraw& d = out[i];
      d.effort1 = quantile_player1(sol, uniform01(eng));
      d.effort2 = quantile_player2(sol, uniform01(eng));
      const double coin = uniform01(eng);
      if (d.effort1 > d.effort2) {
        d.winner = 1;
      } else if (d.effort2 > d.effort1) {
        d.winner = 2;
      } else {
        d.winner = coin < 0.5 ? 1 : 2;
      }
    }
  });
  return out;
}

ValuePoint value_functions(double x, double d, double u, double baseline_loss_slope) {
  auto value = [x](double gain_slope, double loss_slope) {
    return x >= 0.0 ? gain_slope * x : loss_slope * x;
  };
  return {x, value(1.0, baseline_loss_slope), value(1.0, baseline_loss_slope + d),
          value(1.0 + u, baseline_loss_slope)};
}

std::vector<ValuePoint> figure1_series(double d, double u, double baseline_loss_slope, double x_min,
                                       double x_max, std::size_t points) {
  if (!(baseline_loss_slope > 1.0)) {
    throw InvalidParameters("figure1_series: baseline loss slope must exceed 1");
  }
  if (d < 0.0 || u < 0.0) throw InvalidParameters("figure1_series: d and u must be nonnegative");
  if (!(x_max > x_min) || points < 2) throw InvalidParameters("figure1_series: empty range");

  std::vector<ValuePoint> out;
  out.reserve(points);
  const double step = (x_max - x_min) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = k + 1 == points ? x_max : x_min + step * static_cast<double>(k);
    out.push_back(value_functions(x, d, u, baseline_loss_slope));
  }
  return out;
}

}  // namespace cutofflab::contest
