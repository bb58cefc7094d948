#include "cutofflab/rd_continuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "cutofflab/error.hpp"
#include "cutofflab/stats.hpp"
#include "cutofflab/wls.hpp"

namespace cutofflab::rd {
namespace {

constexpr std::size_t kMinPerSide = 20;

// Rows of the dataset that enter a continuity estimation.
struct Sample {
  std::vector<double> y;
  std::vector<int> rank;
  std::vector<char> after;
  std::vector<int> cluster;
  Eigen::MatrixXd z;  // covariates, one column each

  std::size_t size() const { return y.size(); }
};

Sample build_sample(const Dataset& ds, const Selector& outcome, const std::vector<Selector>& covariates,
                    ClusterBy cluster) {
  Sample s;
  std::vector<std::vector<double>> zrows;
  std::vector<const JumpRecord*> kept;
  for (const JumpRecord& r : ds.records()) {
    auto v = outcome(r);
    if (!v) continue;
    std::vector<double> zr;
    bool complete = true;
    for (const Selector& c : covariates) {
      auto cv = c(r);
      if (!cv) {
        complete = false;
        break;
      }
      zr.push_back(*cv);
    }
    if (!complete) continue;
    s.y.push_back(*v);
    s.rank.push_back(r.pre_event_rank);
    s.after.push_back(r.regime == Regime::After ? 1 : 0);
    zrows.push_back(std::move(zr));
    kept.push_back(&r);
  }
  std::vector<JumpRecord> copies;
  copies.reserve(kept.size());
  for (const JumpRecord* r : kept) copies.push_back(*r);
  s.cluster = cluster_ids(copies, cluster);
  s.z.resize(static_cast<Eigen::Index>(s.y.size()), static_cast<Eigen::Index>(covariates.size()));
  for (std::size_t i = 0; i < zrows.size(); ++i) {
    for (std::size_t j = 0; j < covariates.size(); ++j) {
      s.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = zrows[i][j];
    }
  }
  return s;
}

bool treated_side(int rank, double cutoff) { return rank < cutoff; }

// Positive-weight rows at bandwidth h.
struct Active {
  std::vector<std::size_t> rows;
  Eigen::VectorXd w;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  int rank_lo = std::numeric_limits<int>::max();
  int rank_hi = std::numeric_limits<int>::min();
};

Active activate(const Sample& s, double cutoff, double h, Kernel kernel) {
  Active a;
  std::vector<double> ws;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = kernel_weight(kernel, s.rank[i], cutoff, h);
    if (w <= 0.0) continue;
    a.rows.push_back(i);
    ws.push_back(w);
    (treated_side(s.rank[i], cutoff) ? a.n_treated : a.n_control) += 1;
    a.rank_lo = std::min(a.rank_lo, s.rank[i]);
    a.rank_hi = std::max(a.rank_hi, s.rank[i]);
  }
  a.w = Eigen::Map<const Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(ws.size()));
  return a;
}

void require_mass_points(const Sample& s, const Active& a, double cutoff, std::size_t needed,
                         const char* what) {
  std::set<int> tr;
  std::set<int> ct;
  for (std::size_t i : a.rows) (treated_side(s.rank[i], cutoff) ? tr : ct).insert(s.rank[i]);
  if (tr.size() < needed || ct.size() < needed) {
    throw EstimationError(std::string(what) + ": insufficient support (" + std::to_string(tr.size()) +
                          " treated / " + std::to_string(ct.size()) + " control mass points with positive "
                          "weight, need " + std::to_string(needed) + " per side)");
  }
}

void require_clusters(const Sample& s, const Active& a, double cutoff) {
  std::set<int> tr;
  std::set<int> ct;
  for (std::size_t i : a.rows) (treated_side(s.rank[i], cutoff) ? tr : ct).insert(s.cluster[i]);
  if (tr.size() < 2 || ct.size() < 2) {
    throw EstimationError("fewer than two clusters on a side of the cutoff");
  }
}

// Polynomial design on the active rows: {1, T, r, T r, ..., r^p, T r^p}
// followed by covariates. With `period` the whole block is repeated
// multiplied by P = after.
Eigen::MatrixXd side_design(const Sample& s, const Active& a, double cutoff, int degree, bool period) {
  const Eigen::Index n = static_cast<Eigen::Index>(a.rows.size());
  const Eigen::Index base = 2 * (degree + 1);
  const Eigen::Index k = base * (period ? 2 : 1) + s.z.cols();
  Eigen::MatrixXd x(n, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = a.rows[static_cast<std::size_t>(r)];
    const double rt = s.rank[i] - cutoff;
    const double t = treated_side(s.rank[i], cutoff) ? 1.0 : 0.0;
    double pw = 1.0;
    for (int p = 0; p <= degree; ++p) {
      x(r, 2 * p) = pw;
      x(r, 2 * p + 1) = t * pw;
      pw *= rt;
    }
    if (period) {
      const double pd = s.after[i] ? 1.0 : 0.0;
      for (Eigen::Index c = 0; c < base; ++c) x(r, base + c) = pd * x(r, c);
    }
    for (Eigen::Index c = 0; c < s.z.cols(); ++c) x(r, k - s.z.cols() + c) = s.z(static_cast<Eigen::Index>(i), c);
  }
  return x;
}

Eigen::VectorXd gather(const std::vector<double>& v, const Active& a) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(a.rows.size()));
  for (std::size_t r = 0; r < a.rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v[a.rows[r]];
  return out;
}

std::vector<int> gather_clusters(const Sample& s, const Active& a) {
  std::vector<int> out(a.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) out[r] = s.cluster[a.rows[r]];
  return out;
}

std::vector<std::string> linear_names(const std::vector<Selector>& covariates) {
  std::vector<std::string> names = {"intercept", "treated", "rank_c", "treated:rank_c"};
  for (const Selector& c : covariates) names.push_back(c.name());
  return names;
}

double sd_of(const std::vector<int>& v) {
  std::vector<double> d(v.begin(), v.end());
  return std::sqrt(stats::sample_variance(d));
}

// Distance from the cutoff to the k-th nearest distinct mass point on a side.
double kth_distance(const std::vector<int>& ranks, double cutoff, bool treated, std::size_t k) {
  std::set<double> dist;
  for (int r : ranks) {
    if (treated_side(r, cutoff) == treated) dist.insert(std::fabs(r - cutoff));
  }
  if (dist.size() < k) return std::numeric_limits<double>::infinity();
  return *std::next(dist.begin(), static_cast<std::ptrdiff_t>(k - 1));
}

}  // namespace

double triangular_weight(double rank, double cutoff, double h) {
  if (!(h > 0.0)) throw InvalidParameters("bandwidth must be positive");
  return std::max(0.0, 1.0 - std::fabs(rank - cutoff) / h);
}

double kernel_weight(Kernel k, double rank, double cutoff, double h) {
  if (k == Kernel::Triangular) return triangular_weight(rank, cutoff, h);
  if (!(h > 0.0)) throw InvalidParameters("bandwidth must be positive");
  return std::fabs(rank - cutoff) < h ? 1.0 : 0.0;
}

double PolyFit::operator()(double x) const {
  const double u = (x - center) / scale;
  double v = 0.0;
  for (Eigen::Index p = coef.size() - 1; p >= 0; --p) v = v * u + coef(p);
  return v;
}

double PolyFit::second_derivative(double x) const {
  const double u = (x - center) / scale;
  double v = 0.0;
  for (Eigen::Index p = coef.size() - 1; p >= 2; --p) {
    v += static_cast<double>(p * (p - 1)) * coef(p) * std::pow(u, static_cast<double>(p - 2));
  }
  return v / (scale * scale);
}

PolyFit fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, int degree, double center) {
  if (x.size() != y.size() || x.empty()) throw EstimationError("fit_polynomial: empty or mismatched input");
  if (degree < 0) throw InvalidParameters("fit_polynomial: negative degree");
  PolyFit fit;
  fit.center = center;
  double spread = 0.0;
  for (double xi : x) spread = std::max(spread, std::fabs(xi - center));
  fit.scale = spread > 0.0 ? spread : 1.0;
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (x[static_cast<std::size_t>(i)] - center) / fit.scale;
    double pw = 1.0;
    for (int p = 0; p <= degree; ++p) {
      design(i, p) = pw;
      pw *= u;
    }
  }
  const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  wls::WlsFit w(design, yy, Eigen::VectorXd::Ones(n));
  fit.coef = w.coefficients();
  return fit;
}

LocalFit local_linear_jump(const Dataset& ds, const Selector& outcome, double cutoff, double h,
                           const std::vector<Selector>& covariates, Kernel kernel) {
  if (!(h > 0.0)) throw InvalidParameters("local_linear_jump: bandwidth must be positive");
  const Sample s = build_sample(ds, outcome, covariates, ClusterBy::Observation);
  const Active a = activate(s, cutoff, h, kernel);
  require_mass_points(s, a, cutoff, 2, "local_linear_jump");
  const Eigen::MatrixXd x = side_design(s, a, cutoff, 1, false);
  wls::WlsFit fit(x, gather(s.y, a), a.w);
  LocalFit out;
  out.coefficients = fit.coefficients();
  out.tau = out.coefficients(1);
  out.coefficient_names = linear_names(covariates);
  out.n_treated = a.n_treated;
  out.n_control = a.n_control;
  return out;
}

BandwidthResult mse_optimal_bandwidth(const Dataset& ds, const Selector& outcome, double cutoff) {
  const Sample s = build_sample(ds, outcome, {}, ClusterBy::Observation);
  BandwidthResult res;
  res.n = s.size();

  std::vector<double> xt, yt, xc, yc;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (treated_side(s.rank[i], cutoff)) {
      xt.push_back(s.rank[i]);
      yt.push_back(s.y[i]);
    } else {
      xc.push_back(s.rank[i]);
      yc.push_back(s.y[i]);
    }
  }
  if (xt.size() < kMinPerSide || xc.size() < kMinPerSide) {
    throw EstimationError("mse_optimal_bandwidth: need at least 20 observations per side");
  }

  const double n = static_cast<double>(res.n);
  const double d3 = std::max(kth_distance(s.rank, cutoff, true, 3), kth_distance(s.rank, cutoff, false, 3));
  const double d2 = std::max(kth_distance(s.rank, cutoff, true, 2), kth_distance(s.rank, cutoff, false, 2));
  if (!std::isfinite(d3)) {
    throw EstimationError("mse_optimal_bandwidth: need at least three mass points per side");
  }
  double widest = 0.0;
  for (int r : s.rank) widest = std::max(widest, std::fabs(r - cutoff));
  const double h_min = d3 + 0.5;
  const double h_max = widest + 0.5;

  // Pilot: rule-of-thumb scale, widened to reach two mass points per side.
  res.pilot = std::max(sd_of(s.rank) * std::pow(n, -0.2), d2 + 0.5);

  // Curvature from global quartics, one per side.
  try {
    res.curvature_treated = fit_polynomial(xt, yt, 4, cutoff).second_derivative(cutoff);
    res.curvature_control = fit_polynomial(xc, yc, 4, cutoff).second_derivative(cutoff);
  } catch (const EstimationError&) {
    res.curvature_treated = res.curvature_control = 0.0;
  }
  res.bias_constant = kBiasConstant * (res.curvature_treated - res.curvature_control) / 2.0;

  // Conditional variance and density at the cutoff, per side.
  double v = 0.0;
  for (bool treated : {true, false}) {
    double sw = 0.0;
    double swe = 0.0;
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (treated_side(s.rank[i], cutoff) != treated) continue;
      const double w = triangular_weight(s.rank[i], cutoff, res.pilot);
      if (w <= 0.0) continue;
      xs.push_back(s.rank[i] - cutoff);
      ys.push_back(s.y[i]);
      ws.push_back(w);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd x(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = xs[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(ws.data(), m);
    const wls::WlsFit fit(x, Eigen::Map<const Eigen::VectorXd>(ys.data(), m), w);
    for (Eigen::Index i = 0; i < m; ++i) {
      sw += w(i);
      swe += w(i) * fit.residuals()(i) * fit.residuals()(i);
    }
    const double sigma2 = swe / sw;
    // One-sided kernel density; the triangular kernel integrates to 1/2 on [0, 1].
    const double density = 2.0 * sw / (n * res.pilot);
    v += sigma2 / density;
  }
  res.variance_constant = kVarianceConstant * v;

  const double b2 = res.bias_constant * res.bias_constant;
  double h = 0.0;
  if (!(b2 > 0.0) || !std::isfinite(b2) || !(res.variance_constant > 0.0)) {
    h = res.pilot;
    res.flagged = true;
    res.note = "degenerate curvature or variance; pilot bandwidth used";
  } else {
    h = std::pow(res.variance_constant / (4.0 * b2 * n), 0.2);
  }
  if (h < h_min) {
    h = h_min;
    res.flagged = true;
    res.note += (res.note.empty() ? "" : "; ") + std::string("raised to three mass points per side");
  } else if (h > h_max) {
    h = h_max;
    res.flagged = true;
    res.note += (res.note.empty() ? "" : "; ") + std::string("capped at the data range");
  }
  res.h = h;
  res.b = h;
  return res;
}

RdContinuityResult rd_continuity_estimate(const Dataset& ds, const Selector& outcome, double cutoff,
                                          const ContinuityOptions& opt) {
  RdContinuityResult res;
  res.outcome = outcome.name();
  res.cutoff = cutoff;
  res.cluster = std::string(to_string(opt.cluster));
  for (const Selector& c : opt.covariates) res.covariates_used.push_back(c.name());

  if (opt.bandwidth) {
    if (!(*opt.bandwidth > 0.0)) throw InvalidParameters("bandwidth must be positive");
    res.bandwidth_h = res.bandwidth_b = *opt.bandwidth;
  } else {
    const BandwidthResult bw = mse_optimal_bandwidth(ds, outcome, cutoff);
    res.bandwidth_h = bw.h;
    res.bandwidth_b = bw.b;
    res.bandwidth_flagged = bw.flagged;
  }

  const Sample s = build_sample(ds, outcome, opt.covariates, opt.cluster);
  res.n_observations = s.size();
  const double h = res.bandwidth_h;
  const double b = res.bandwidth_b;

  // Conventional local-linear fit.
  const Active al = activate(s, cutoff, h, Kernel::Triangular);
  require_mass_points(s, al, cutoff, 2, "rd_continuity_estimate");
  require_clusters(s, al, cutoff);
  const Eigen::MatrixXd xl = side_design(s, al, cutoff, 1, false);
  const wls::WlsFit lin(xl, gather(s.y, al), al.w);
  const Eigen::VectorXd l_lin = lin.linear_weights(1);
  const std::vector<int> cl_lin = gather_clusters(s, al);
  res.tau_conventional = lin.coefficients()(1);
  res.se_conventional = std::sqrt(wls::cluster_robust_variance(l_lin, lin.residuals(), cl_lin));
  res.effective_n_treated = al.n_treated;
  res.effective_n_control = al.n_control;
  res.rank_lo = al.rank_lo;
  res.rank_hi = al.rank_hi;

  // Local-quadratic fit at b for the curvature on each side.
  const Active aq = activate(s, cutoff, b, Kernel::Triangular);
  require_mass_points(s, aq, cutoff, 3, "rd_continuity_estimate (bias fit)");
  const Eigen::MatrixXd xq = side_design(s, aq, cutoff, 2, false);
  const wls::WlsFit quad(xq, gather(s.y, aq), aq.w);
  // Columns 4 and 5: r^2 and T r^2; half the control / treated-minus-control
  // second derivatives.
  const double beta2_control = quad.coefficients()(4);
  const double beta2_treated = quad.coefficients()(4) + quad.coefficients()(5);
  const Eigen::VectorXd l_q4 = quad.linear_weights(4);
  const Eigen::VectorXd l_q5 = quad.linear_weights(5);

  // Bias of the local-linear estimator against a side-wise quadratic:
  // sum_i l_i r_i^2 beta2_side(i).
  double c_treated = 0.0;
  double c_control = 0.0;
  for (std::size_t r = 0; r < al.rows.size(); ++r) {
    const std::size_t i = al.rows[r];
    const double rt = s.rank[i] - cutoff;
    (treated_side(s.rank[i], cutoff) ? c_treated : c_control) += l_lin(static_cast<Eigen::Index>(r)) * rt * rt;
  }
  const double bias = c_treated * beta2_treated + c_control * beta2_control;
  res.tau_bias_corrected = res.tau_conventional - bias;

  // Combined linear form over the union of active rows: l_lin - (c_T (l4 + l5) + c_C l4).
  std::vector<double> omega(s.size(), 0.0);
  std::vector<double> resid(s.size(), 0.0);
  std::vector<char> used(s.size(), 0);
  for (std::size_t r = 0; r < al.rows.size(); ++r) {
    omega[al.rows[r]] += l_lin(static_cast<Eigen::Index>(r));
    used[al.rows[r]] = 1;
  }
  for (std::size_t r = 0; r < aq.rows.size(); ++r) {
    const Eigen::Index e = static_cast<Eigen::Index>(r);
    omega[aq.rows[r]] -= c_treated * (l_q4(e) + l_q5(e)) + c_control * l_q4(e);
    resid[aq.rows[r]] = quad.residuals()(e);
    used[aq.rows[r]] = 1;
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (used[i]) idx.push_back(i);
  }
  Eigen::VectorXd om(static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd re(static_cast<Eigen::Index>(idx.size()));
  std::vector<int> cl(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    om(static_cast<Eigen::Index>(r)) = omega[idx[r]];
    re(static_cast<Eigen::Index>(r)) = resid[idx[r]];
    cl[r] = s.cluster[idx[r]];
  }
  res.se_robust = std::sqrt(wls::cluster_robust_variance(om, re, cl));

  res.p_conventional = stats::normal_two_sided_p(res.tau_conventional / res.se_conventional);
  res.p_robust = stats::normal_two_sided_p(res.tau_bias_corrected / res.se_robust);
  return res;
}

DiffInDiscResult diff_in_disc(const Dataset& pooled, const Selector& outcome, double cutoff,
                              const ContinuityOptions& opt) {
  if (!pooled.has_regime(Regime::Before) || !pooled.has_regime(Regime::After)) {
    throw EstimationError("diff_in_disc: both regimes must be present");
  }
  DiffInDiscResult res;
  res.outcome = outcome.name();
  res.cutoff = cutoff;
  res.cluster = std::string(to_string(opt.cluster));
  for (const Selector& c : opt.covariates) res.covariates_used.push_back(c.name());

  if (opt.bandwidth) {
    if (!(*opt.bandwidth > 0.0)) throw InvalidParameters("bandwidth must be positive");
    res.bandwidth = *opt.bandwidth;
  } else {
    const BandwidthResult bw = mse_optimal_bandwidth(pooled, outcome, cutoff);
    res.bandwidth = bw.h;
    res.bandwidth_flagged = bw.flagged;
  }

  const Sample s = build_sample(pooled, outcome, opt.covariates, opt.cluster);
  res.n_observations = s.size();
  const Active a = activate(s, cutoff, res.bandwidth, Kernel::Triangular);
  for (std::size_t i : a.rows) {
    const bool t = treated_side(s.rank[i], cutoff);
    if (s.after[i]) {
      (t ? res.n_treated_after : res.n_control_after) += 1;
    } else {
      (t ? res.n_treated_before : res.n_control_before) += 1;
    }
  }
  if (res.n_treated_before == 0 || res.n_control_before == 0 || res.n_treated_after == 0 ||
      res.n_control_after == 0) {
    throw EstimationError("diff_in_disc: a regime is missing on one side inside the bandwidth");
  }
  require_mass_points(s, a, cutoff, 2, "diff_in_disc");
  require_clusters(s, a, cutoff);
  res.rank_lo = a.rank_lo;
  res.rank_hi = a.rank_hi;

  const Eigen::MatrixXd x = side_design(s, a, cutoff, 1, true);
  const wls::WlsFit fit(x, gather(s.y, a), a.w);
  // Column layout: 0..3 base block, 4..7 the same multiplied by P.
  res.tau_before = fit.coefficients()(1);
  res.delta_tau = fit.coefficients()(5);
  res.tau_after = res.tau_before + res.delta_tau;
  const Eigen::VectorXd l = fit.linear_weights(5);
  res.se = std::sqrt(wls::cluster_robust_variance(l, fit.residuals(), gather_clusters(s, a)));
  res.p_conventional = stats::normal_two_sided_p(res.delta_tau / res.se);
  return res;
}

PlotData rd_plot_data(const Dataset& ds, const Selector& outcome, double cutoff, int window_lo, int window_hi,
                      int poly_degree) {
  PlotData out;
  out.outcome = outcome.name();
  out.cutoff = cutoff;
  out.poly_degree = poly_degree;

  std::vector<std::vector<double>> by_rank(kMaxRank + 1);
  std::vector<double> xt, yt, xc, yc;
  for (const JumpRecord& r : ds.records()) {
    auto v = outcome(r);
    if (!v) continue;
    by_rank[static_cast<std::size_t>(r.pre_event_rank)].push_back(*v);
    if (treated_side(r.pre_event_rank, cutoff)) {
      xt.push_back(r.pre_event_rank);
      yt.push_back(*v);
    } else {
      xc.push_back(r.pre_event_rank);
      yc.push_back(*v);
    }
  }
  if (xt.empty() && xc.empty()) throw EstimationError("rd_plot_data: no observations");

  auto side_fit = [&](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<PolyFit> {
    std::set<double> distinct(x.begin(), x.end());
    if (distinct.empty()) return std::nullopt;
    const int degree = std::min<int>(poly_degree, static_cast<int>(distinct.size()) - 1);
    return fit_polynomial(x, y, degree, cutoff);
  };
  const auto fit_t = side_fit(xt, yt);
  const auto fit_c = side_fit(xc, yc);

  auto window_mean = [&](bool treated) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int rank = window_lo; rank <= window_hi; ++rank) {
      if (rank < kMinRank || rank > kMaxRank || treated_side(rank, cutoff) != treated) continue;
      for (double v : by_rank[static_cast<std::size_t>(rank)]) {
        sum += v;
        ++n;
      }
    }
    return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
  };
  const auto const_t = window_mean(true);
  const auto const_c = window_mean(false);

  for (int rank = kMinRank; rank <= kMaxRank; ++rank) {
    const auto& vals = by_rank[static_cast<std::size_t>(rank)];
    if (vals.empty()) continue;
    PlotRow row;
    row.rank = rank;
    row.n = vals.size();
    const stats::Summary sm = stats::summarize(vals);
    row.bin_mean = sm.mean;
    const double half = 1.959963984540054 * sm.sd / std::sqrt(static_cast<double>(sm.n));
    row.ci_lo = sm.mean - half;
    row.ci_hi = sm.mean + half;
    const bool t = treated_side(rank, cutoff);
    const auto& fit = t ? fit_t : fit_c;
    row.poly_fit = fit ? (*fit)(rank) : std::numeric_limits<double>::quiet_NaN();
    if (rank >= window_lo && rank <= window_hi) row.const_fit = t ? const_t : const_c;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace cutofflab::rd
