#pragma once

#include <span>

#include <Eigen/Dense>

namespace cutofflab::wls {

/// Weighted least squares solved by column-pivoted QR of sqrt(W) X.
class WlsFit {
 public:
  /// Rows with zero weight are allowed and simply do not contribute.
  /// Throws EstimationError when the weighted design is rank deficient.
  WlsFit(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome, const Eigen::VectorXd& weights);

  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
  /// y - X b for every row, including zero-weight rows.
  const Eigen::VectorXd& residuals() const noexcept { return resid_; }

  /// Weights l such that coefficient j equals l' y for any outcome y
  /// (row j of (X'WX)^{-1} X'W).
  Eigen::VectorXd linear_weights(Eigen::Index j) const;

  Eigen::Index rows() const noexcept { return design_rows_; }
  Eigen::Index cols() const noexcept { return coef_.size(); }

 private:
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::VectorXd sqrt_w_;
  Eigen::VectorXd coef_;
  Eigen::VectorXd resid_;
  Eigen::Index design_rows_ = 0;
};

/// Liang-Zeger cluster-robust variance of the linear estimator l'y with
/// residuals e: G/(G-1) * sum_g (sum_{i in g} l_i e_i)^2, where G counts
/// clusters containing at least one row with l_i != 0. Cluster ids are
/// arbitrary nonnegative ints. Throws EstimationError when G < 2.
double cluster_robust_variance(const Eigen::VectorXd& l, const Eigen::VectorXd& residuals,
                               std::span<const int> clusters);

/// Heteroskedasticity-robust variance n/(n-1) * sum_i l_i^2 e_i^2 with n the
/// number of rows where l_i != 0. Equals cluster_robust_variance when every
/// row is its own cluster.
double hc_robust_variance(const Eigen::VectorXd& l, const Eigen::VectorXd& residuals);

}  // namespace cutofflab::wls
