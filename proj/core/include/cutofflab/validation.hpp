#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cutofflab/data_model.hpp"
#include "cutofflab/rd_continuity.hpp"
#include "cutofflab/rd_local.hpp"

namespace cutofflab::validation {

/// Windows whose minimum covariate-balance p falls below this are marked.
inline constexpr double kBalanceThreshold = 0.15;

struct BalanceRow {
  std::string covariate;
  std::vector<rd::RdLocalResult> local;  ///< one per requested window
  std::optional<rd::RdContinuityResult> continuity;
  std::string continuity_error;  ///< set when the continuity fit failed
};

/// RD estimates with each predetermined covariate as the outcome: local
/// randomization in every window plus one continuity-based estimate.
std::vector<BalanceRow> balance_table(const Dataset& ds, const std::vector<Selector>& covariates,
                                      const std::vector<rd::RdWindow>& windows,
                                      const rd::ContinuityOptions& continuity,
                                      const rd::FisherOptions& fisher = {});

struct DensityTest {
  rd::RdWindow window;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  double p_value = 1.0;
};

/// Exact binomial test (probability 1/2) of treated vs control counts.
DensityTest density_binomial(std::size_t n_treated, std::size_t n_control);
/// Counts every observation in the window, whatever its outcomes.
DensityTest density_binomial(const Dataset& ds, const rd::RdWindow& window);

struct PlaceboWindow {
  rd::RdLocalResult result;
  bool balance_failed = false;  ///< min covariate p below kBalanceThreshold
  double balance_min_p = 1.0;
};

struct PlaceboRow {
  double cutoff = 0.0;
  std::vector<PlaceboWindow> windows;
  std::optional<rd::RdContinuityResult> continuity;
  std::string continuity_error;
};

struct PlaceboOptions {
  std::vector<double> cutoffs = {20.5, 40.5};
  std::vector<int> half_widths = {1, 2};
  std::vector<Selector> balance_covariates;
  rd::ContinuityOptions continuity;
  rd::FisherOptions fisher;
  /// The real cutoff. Continuity fits at a placebo cutoff only use
  /// observations on the placebo's side of it, so the real jump cannot leak
  /// into the placebo estimate.
  double true_cutoff = 30.5;
};

/// Re-runs rd_local_estimate and rd_continuity_estimate at each placebo
/// cutoff. Windows reaching past the observed rank range raise
/// EstimationError.
std::vector<PlaceboRow> placebo_cutoffs(const Dataset& ds, const Selector& outcome, const PlaceboOptions& options);

struct FrequencyRow {
  int rank = 0;
  bool treated = false;
  std::size_t count_before = 0;
  std::size_t count_after = 0;
};

/// Observation counts per rank within half_width mass points of the cutoff.
std::vector<FrequencyRow> frequency_table(const Dataset& ds, double cutoff, int half_width = 5);

struct ValidationReport {
  std::string regime;  ///< "before", "after" or "pooled"
  std::vector<BalanceRow> balance_rows;
  std::vector<DensityTest> density_tests;
  std::vector<PlaceboRow> placebo_rows;
  std::vector<FrequencyRow> frequency_rows;
};

}  // namespace cutofflab::validation
