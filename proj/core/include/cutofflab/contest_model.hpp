#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cutofflab::contest {

/// Two-player all-pay contest with expectation-based loss aversion.
///
/// Player 1 holds a positive expectation and loses `loss_penalty * salience`
/// on top of the prize when beaten; player 2 holds a negative expectation and
/// gains `win_bonus * salience` on top of the prize when winning.
struct ContestParams {
  double prize = 1.0;         ///< W > 0
  double loss_penalty = 0.0;  ///< d >= u
  double win_bonus = 0.0;     ///< u >= 0
  int salience = 1;           ///< s in {0, 1}

  /// Throws InvalidParameters when the invariants do not hold.
  void validate() const;
};

/// Mixed-strategy equilibrium of the contest. Player 1 mixes uniformly on
/// [0, v2]; player 2 puts mass (v1 - v2) / v1 on zero and mixes uniformly
/// on (0, v2] with the remainder.
struct EquilibriumSolution {
  ContestParams params;
  double stake1 = 0.0;  ///< v1 = W + d*s
  double stake2 = 0.0;  ///< v2 = W + u*s
  double support_upper = 0.0;
  double atom_at_zero = 0.0;
  double payoff1 = 0.0;
  double payoff2 = 0.0;
  double win_prob1 = 0.0;
  double win_prob2 = 0.0;
  double effort1_derived = 0.0;
  double effort2_derived = 0.0;
  /// Closed forms v1^2 v2 / (v1 + v2) and v2^2 v1 / (v1 + v2) as printed in
  /// the source model. They do not follow from the CDFs and are reported for
  /// reference only.
  double effort1_printed = 0.0;
  double effort2_printed = 0.0;
};

EquilibriumSolution solve_equilibrium(const ContestParams& params);

/// F1(x), clamped to [0, 1].
double cdf_player1(const EquilibriumSolution& sol, double x);
/// F2(x), clamped to [0, 1]; F2(0) equals the atom at zero.
double cdf_player2(const EquilibriumSolution& sol, double x);

/// Inverse CDFs used for sampling; u in [0, 1).
double quantile_player1(const EquilibriumSolution& sol, double u);
double quantile_player2(const EquilibriumSolution& sol, double u);

struct VerificationReport {
  std::size_t grid_points = 0;
  double grid_spacing = 0.0;
  double tolerance = 0.0;
  /// max over grid of (pure-effort payoff - equilibrium payoff), per player.
  double max_improvement1 = 0.0;
  double max_improvement2 = 0.0;
  double max_improvement = 0.0;
  bool passed = false;
};

/// Checks that no pure effort on a uniform grid over [0, 1.1 * v2] improves
/// on the equilibrium payoff against the opponent's mixture by more than
/// `tolerance`. A negative tolerance selects the default 2 * grid spacing.
/// Ties are split by a fair coin, which matters only at player 2's atom.
VerificationReport verify_equilibrium(const ContestParams& params, std::size_t grid_points = 200,
                                      double tolerance = -1.0);

struct ContestDraw {
  double effort1 = 0.0;
  double effort2 = 0.0;
  int winner = 0;  ///< 1 or 2
};

/// Inverse-transform draws from the equilibrium mixtures. Draws are produced
/// in fixed blocks, each block on its own substream of `seed`, so the result
/// does not depend on the thread count.
std::vector<ContestDraw> sample_outcomes(const ContestParams& params, std::size_t n, std::uint64_t seed);

struct ValuePoint {
  double x = 0.0;
  double baseline = 0.0;
  double positive_expectation = 0.0;
  double negative_expectation = 0.0;
};

/// The three value functions evaluated at a single gain/loss x.
ValuePoint value_functions(double x, double d, double u, double baseline_loss_slope);

/// Piecewise-linear value functions through the origin: baseline (gain slope
/// 1, loss slope `baseline_loss_slope`), positive expectation (loss slope
/// raised by d) and negative expectation (gain slope raised by u).
/// Evaluated on `points` evenly spaced abscissae over [x_min, x_max].
std::vector<ValuePoint> figure1_series(double d, double u, double baseline_loss_slope, double x_min,
                                       double x_max, std::size_t points = 201);

}  // namespace cutofflab::contest
