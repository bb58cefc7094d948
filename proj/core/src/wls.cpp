#include "cutofflab/wls.hpp"

#include <string>
#include <unordered_map>

#include "cutofflab/error.hpp"

namespace cutofflab::wls {

WlsFit::WlsFit(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome, const Eigen::VectorXd& weights)
    : design_rows_(design.rows()) {
  if (design.rows() != outcome.size() || design.rows() != weights.size()) {
    throw EstimationError("wls: dimension mismatch");
  }
  if ((weights.array() < 0.0).any()) throw EstimationError("wls: negative weight");
  sqrt_w_ = weights.array().sqrt();
  const Eigen::MatrixXd xw = sqrt_w_.asDiagonal() * design;
  qr_.compute(xw);
  qr_.setThreshold(1e-10);
  if (qr_.rank() < design.cols()) {
    throw EstimationError("wls: rank-deficient design (rank " + std::to_string(qr_.rank()) + " < " +
                          std::to_string(design.cols()) + " columns)");
  }
  coef_ = qr_.solve((sqrt_w_.array() * outcome.array()).matrix());
  resid_ = outcome - design * coef_;
}

Eigen::VectorXd WlsFit::linear_weights(Eigen::Index j) const {
  // sqrt(W) X P = Q R, so (X'WX)^{-1} X' sqrt(W) = P R^{-1} Q'; row j of it is
  // (Q R^{-T} P' e_j)'.
  const Eigen::Index k = coef_.size();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
  e(j) = 1.0;
  const Eigen::VectorXd pe = qr_.colsPermutation().transpose() * e;
  const Eigen::VectorXd a =
      qr_.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>().transpose().solve(pe);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(design_rows_);
  full.head(k) = a;
  const Eigen::VectorXd q_a = qr_.householderQ() * full;
  return (q_a.array() * sqrt_w_.array()).matrix();
}

double cluster_robust_variance(const Eigen::VectorXd& l, const Eigen::VectorXd& residuals,
                               std::span<const int> clusters) {
  if (static_cast<Eigen::Index>(clusters.size()) != l.size() || l.size() != residuals.size()) {
    throw EstimationError("cluster_robust_variance: dimension mismatch");
  }
  std::unordered_map<int, double> score;
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (l(i) == 0.0) continue;
    score[clusters[static_cast<std::size_t>(i)]] += l(i) * residuals(i);
  }
  const double g = static_cast<double>(score.size());
  if (score.size() < 2) throw EstimationError("cluster_robust_variance: fewer than two clusters");
  double sum = 0.0;
  for (const auto& [id, s] : score) sum += s * s;
  return g / (g - 1.0) * sum;
}

double hc_robust_variance(const Eigen::VectorXd& l, const Eigen::VectorXd& residuals) {
  double sum = 0.0;
  double n = 0.0;
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (l(i) == 0.0) continue;
    sum += l(i) * l(i) * residuals(i) * residuals(i);
    n += 1.0;
  }
  if (n < 2.0) throw EstimationError("hc_robust_variance: fewer than two observations");
  return n / (n - 1.0) * sum;
}

}  // namespace cutofflab::wls
