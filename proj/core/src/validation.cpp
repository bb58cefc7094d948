#include "cutofflab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cutofflab/error.hpp"
#include "cutofflab/stats.hpp"

namespace cutofflab::validation {

std::vector<BalanceRow> balance_table(const Dataset& ds, const std::vector<Selector>& covariates,
                                      const std::vector<rd::RdWindow>& windows,
                                      const rd::ContinuityOptions& continuity, const rd::FisherOptions& fisher) {
  if (covariates.empty()) throw InvalidParameters("balance_table: no covariates given");
  std::vector<BalanceRow> rows;
  for (const Selector& cov : covariates) {
    BalanceRow row;
    row.covariate = cov.name();
    for (const rd::RdWindow& w : windows) row.local.push_back(rd::rd_local_estimate(ds, cov, w, fisher));
    const double cutoff = windows.empty() ? 30.5 : windows.front().cutoff;
    rd::ContinuityOptions opt = continuity;
    // A covariate cannot adjust for itself.
    opt.covariates.clear();
    try {
      row.continuity = rd::rd_continuity_estimate(ds, cov, cutoff, opt);
    } catch (const EstimationError& e) {
      row.continuity_error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

DensityTest density_binomial(std::size_t n_treated, std::size_t n_control) {
  DensityTest t;
  t.n_treated = n_treated;
  t.n_control = n_control;
  t.p_value = stats::binomial_two_sided_p(n_treated, n_treated + n_control);
  return t;
}

DensityTest density_binomial(const Dataset& ds, const rd::RdWindow& window) {
  window.validate();
  std::size_t nt = 0;
  std::size_t nc = 0;
  for (const JumpRecord& r : ds.records()) {
    if (r.pre_event_rank < window.lower || r.pre_event_rank > window.upper) continue;
    (rd::is_treated(r.pre_event_rank, window.cutoff) ? nt : nc) += 1;
  }
  DensityTest t = density_binomial(nt, nc);
  t.window = window;
  return t;
}

std::vector<PlaceboRow> placebo_cutoffs(const Dataset& ds, const Selector& outcome, const PlaceboOptions& opt) {
  int lo_rank = std::numeric_limits<int>::max();
  int hi_rank = std::numeric_limits<int>::min();
  for (const JumpRecord& r : ds.records()) {
    lo_rank = std::min(lo_rank, r.pre_event_rank);
    hi_rank = std::max(hi_rank, r.pre_event_rank);
  }
  if (ds.empty()) throw EstimationError("placebo_cutoffs: empty dataset");

  std::vector<PlaceboRow> rows;
  for (double c : opt.cutoffs) {
    PlaceboRow row;
    row.cutoff = c;
    for (int hw : opt.half_widths) {
      const rd::RdWindow w = rd::RdWindow::symmetric(c, hw);
      if (w.lower < lo_rank || w.upper > hi_rank) {
        throw EstimationError("placebo window [" + std::to_string(w.lower) + ", " + std::to_string(w.upper) +
                              "] at cutoff " + std::to_string(c) + " reaches past the observed ranks; "
                              "empty side");
      }
      PlaceboWindow pw;
      pw.result = rd::rd_local_estimate(ds, outcome, w, opt.fisher);
      for (const Selector& cov : opt.balance_covariates) {
        const rd::WindowSample s = rd::window_sample(ds, cov, w);
        if (s.n_treated == 0 || s.n_control == 0) continue;
        pw.balance_min_p = std::min(pw.balance_min_p, rd::fisher_p(s, opt.fisher));
      }
      pw.balance_failed = pw.balance_min_p < kBalanceThreshold;
      row.windows.push_back(pw);
    }

    const bool below = c < opt.true_cutoff;
    const Dataset side = ds.filter(
        [&](const JumpRecord& r) { return below ? r.pre_event_rank < opt.true_cutoff : r.pre_event_rank > opt.true_cutoff; },
        "placebo side");
    try {
      row.continuity = rd::rd_continuity_estimate(side, outcome, c, opt.continuity);
    } catch (const EstimationError& e) {
      row.continuity_error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FrequencyRow> frequency_table(const Dataset& ds, double cutoff, int half_width) {
  if (half_width < 1) throw InvalidParameters("frequency_table: half width must be at least 1");
  const rd::RdWindow w = rd::RdWindow::symmetric(cutoff, half_width);
  std::vector<FrequencyRow> rows;
  for (int rank = w.lower; rank <= w.upper; ++rank) {
    FrequencyRow row;
    row.rank = rank;
    row.treated = rd::is_treated(rank, cutoff);
    rows.push_back(row);
  }
  for (const JumpRecord& r : ds.records()) {
    if (r.pre_event_rank < w.lower || r.pre_event_rank > w.upper) continue;
    FrequencyRow& row = rows[static_cast<std::size_t>(r.pre_event_rank - w.lower)];
    (r.regime == Regime::Before ? row.count_before : row.count_after) += 1;
  }
  return rows;
}

}  // namespace cutofflab::validation
