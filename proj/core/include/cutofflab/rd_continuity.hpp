#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cutofflab/data_model.hpp"

namespace cutofflab::rd {

enum class Kernel { Triangular, Uniform };

/// max(0, 1 - |rank - cutoff| / h). Throws InvalidParameters for h <= 0.
double triangular_weight(double rank, double cutoff, double h);
double kernel_weight(Kernel k, double rank, double cutoff, double h);

/// Boundary constants of local-linear regression with the triangular kernel
/// on [0, 1]: the intercept bias is h^2 m''/2 * kBiasConstant and its
/// variance sigma^2 / (f n h) * kVarianceConstant.
inline constexpr double kBiasConstant = -0.1;
inline constexpr double kVarianceConstant = 4.8;

struct LocalFit {
  double tau = 0.0;
  Eigen::VectorXd coefficients;
  std::vector<std::string> coefficient_names;
  std::size_t n_treated = 0;  ///< rows with positive weight
  std::size_t n_control = 0;
};

/// Weighted least squares of the outcome on {1, T, r, T*r} plus additive
/// covariates, r = rank - cutoff, T = 1(rank < cutoff), using kernel
/// weights at bandwidth h. tau is the coefficient on T. Rows missing the
/// outcome or any covariate are dropped. Throws EstimationError with fewer
/// than two positive-weight mass points on a side or a singular design.
LocalFit local_linear_jump(const Dataset& ds, const Selector& outcome, double cutoff, double h,
                           const std::vector<Selector>& covariates = {}, Kernel kernel = Kernel::Triangular);

struct BandwidthResult {
  double h = 0.0;
  double b = 0.0;
  double pilot = 0.0;
  double bias_constant = 0.0;  ///< B in MSE(h) = (h^2 B)^2 + V / (n h)
  double variance_constant = 0.0;  ///< V
  double curvature_treated = 0.0;  ///< m'' at the cutoff from the treated-side quartic
  double curvature_control = 0.0;
  std::size_t n = 0;
  bool flagged = false;
  std::string note;
};

/// Plug-in MSE-optimal bandwidth h = (V / (4 B^2 n))^(1/5) with
///   B = kBiasConstant * (m''_T - m''_C) / 2 from side-specific global
///       quartic fits, and
///   V = kVarianceConstant * (s2_T / f_T + s2_C / f_C) from kernel-weighted
///       local-linear residual variances and one-sided kernel densities at a
///       pilot bandwidth sd(rank) * n^(-1/5).
/// b = h. Degenerate curvature or variance falls back to the pilot; h is
/// kept inside [smallest bandwidth with three mass points per side, widest
/// distance to the cutoff + 0.5]. Both cases set `flagged`.
/// Requires 20 observations per side.
BandwidthResult mse_optimal_bandwidth(const Dataset& ds, const Selector& outcome, double cutoff);

struct ContinuityOptions {
  std::vector<Selector> covariates;
  ClusterBy cluster = ClusterBy::Athlete;
  /// Fixed bandwidth (b = h); MSE-optimal when empty.
  std::optional<double> bandwidth;
};

struct RdContinuityResult {
  std::string outcome;
  double cutoff = 30.5;
  double tau_conventional = 0.0;
  double tau_bias_corrected = 0.0;
  double se_conventional = 0.0;
  double se_robust = 0.0;
  double p_conventional = 1.0;
  double p_robust = 1.0;
  double bandwidth_h = 0.0;
  double bandwidth_b = 0.0;
  bool bandwidth_flagged = false;
  int rank_lo = 0;  ///< smallest rank with positive weight
  int rank_hi = 0;
  std::size_t effective_n_treated = 0;
  std::size_t effective_n_control = 0;
  std::size_t n_observations = 0;  ///< rows entering the estimation sample
  std::vector<std::string> covariates_used;
  std::string cluster;
};

/// Local-linear jump at h with cluster-robust conventional SE, and the
/// robust bias-corrected estimate: the local-linear estimate minus its bias
/// implied by side-specific local-quadratic curvatures at b. The corrected
/// estimator is linear in the outcome and its SE is the cluster-robust SE of
/// that combined linear form with local-quadratic residuals. Normal p-values.
RdContinuityResult rd_continuity_estimate(const Dataset& ds, const Selector& outcome, double cutoff,
                                          const ContinuityOptions& options = {});

struct DiffInDiscResult {
  std::string outcome;
  double cutoff = 30.5;
  double delta_tau = 0.0;
  double se = 0.0;
  double p_conventional = 1.0;
  double tau_before = 0.0;
  double tau_after = 0.0;
  double bandwidth = 0.0;
  bool bandwidth_flagged = false;
  int rank_lo = 0;
  int rank_hi = 0;
  std::size_t n_treated_before = 0;
  std::size_t n_control_before = 0;
  std::size_t n_treated_after = 0;
  std::size_t n_control_after = 0;
  std::size_t n_observations = 0;
  std::vector<std::string> covariates_used;
  std::string cluster;
};

/// Pooled WLS on {1, T, r, T r, P, P T, P r, P T r} (+ covariates) with
/// P = 1(regime After) and a common bandwidth; delta_tau is the P*T
/// coefficient with a cluster-robust SE and conventional normal p.
DiffInDiscResult diff_in_disc(const Dataset& pooled, const Selector& outcome, double cutoff,
                              const ContinuityOptions& options = {});

struct PlotRow {
  int rank = 0;
  std::size_t n = 0;
  double bin_mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double poly_fit = 0.0;
  std::optional<double> const_fit;  ///< side mean when the rank lies in the window
};

struct PlotData {
  std::string outcome;
  double cutoff = 30.5;
  int poly_degree = 3;
  std::vector<PlotRow> rows;
};

/// Per-rank means with normal 95% intervals, side-specific global
/// polynomial fits of `poly_degree`, and side means within
/// [window_lo, window_hi].
PlotData rd_plot_data(const Dataset& ds, const Selector& outcome, double cutoff, int window_lo, int window_hi,
                      int poly_degree = 3);

/// Polynomial least-squares fit of y on x of the given degree; returns a
/// callable evaluating the fit. Exposed for tests.
struct PolyFit {
  Eigen::VectorXd coef;  ///< in powers of (x - center) / scale
  double center = 0.0;
  double scale = 1.0;
  double operator()(double x) const;
  double second_derivative(double x) const;
};
PolyFit fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, int degree,
                       double center = 0.0);

}  // namespace cutofflab::rd
