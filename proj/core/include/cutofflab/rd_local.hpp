#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cutofflab/data_model.hpp"

namespace cutofflab::rd {

/// Closed window [lower, upper] of integer ranks around a non-integer cutoff.
/// Units with rank <= floor(cutoff) are treated.
struct RdWindow {
  int lower = 30;
  int upper = 31;
  double cutoff = 30.5;

  /// Window with `half_width` ranks on each side: half_width 1 at 30.5 is
  /// [30, 31], 3 is [28, 33].
  static RdWindow symmetric(double cutoff, int half_width);

  int last_treated() const;
  int first_control() const;
  /// Ranks per side when symmetric; the smaller side otherwise.
  int half_width() const;

  /// Throws InvalidParameters unless lower <= floor(c) < ceil(c) <= upper
  /// and c is not an integer.
  void validate() const;

  bool operator==(const RdWindow&) const = default;
};

bool is_treated(int rank, double cutoff);

/// In-window units with a value for the outcome.
struct WindowSample {
  std::vector<double> values;
  std::vector<char> treated;  // 1 = treated
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
};

WindowSample window_sample(const Dataset& ds, const Selector& outcome, const RdWindow& window);

/// mean(treated) - mean(control). Throws EstimationError if a side is empty.
double diff_in_means(const WindowSample& sample);
double diff_in_means(const Dataset& ds, const Selector& outcome, const RdWindow& window);

enum class FisherMode {
  Simulate,   ///< random fixed-margins relabelings
  Enumerate,  ///< every assignment of n_treated labels (small windows only)
  Auto,       ///< Enumerate when C(N, n_treated) <= n_permutations
};

struct FisherOptions {
  std::size_t n_permutations = 10000;
  std::uint64_t seed = 20240601;
  FisherMode mode = FisherMode::Simulate;
  /// Enumerate refuses more assignments than this.
  std::size_t enumeration_limit = 5'000'000;
};

/// Two-sided Fisherian randomization p-value of |difference in means|
/// holding the number of treated units fixed.
///   Simulate:  (1 + #{perm >= observed}) / (1 + n_permutations)
///   Enumerate: #{assignments >= observed} / C(N, n_treated)
/// Replicate r always draws from substream (seed, r), so the value does not
/// depend on the thread count.
double fisher_p(const WindowSample& sample, const FisherOptions& options = {});
double fisher_p(const Dataset& ds, const Selector& outcome, const RdWindow& window,
                const FisherOptions& options = {});

/// Number of assignments C(n, k), saturating at SIZE_MAX.
std::size_t binomial_coefficient(std::size_t n, std::size_t k);

struct RdLocalResult {
  std::string outcome;
  double estimate = 0.0;  ///< treated minus control
  double p_value = 1.0;
  RdWindow window;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t n_permutations = 0;
  FisherMode mode = FisherMode::Simulate;
};

RdLocalResult rd_local_estimate(const Dataset& ds, const Selector& outcome, const RdWindow& window,
                                const FisherOptions& options = {});

struct WindowSearchOptions {
  double threshold = 0.15;
  int max_half_width = 10;
  FisherOptions fisher;
};

struct WindowStep {
  int half_width = 0;
  RdWindow window;
  double min_p = 1.0;
  std::vector<double> covariate_p;  // NaN when a covariate has an empty side
};

struct WindowSelection {
  RdWindow window;
  bool balanced = true;  ///< false when even the smallest window fails
  std::vector<WindowStep> steps;
};

/// Widens the symmetric window one rank per side at a time and keeps the
/// widest window whose balance tests, and those of every nested window,
/// all have p >= threshold. Covariate rows with missing values are dropped
/// for that covariate only. If the smallest window already fails it is
/// returned with balanced = false.
WindowSelection select_window(const Dataset& ds, const std::vector<Selector>& covariates, double cutoff,
                              const WindowSearchOptions& options = {});

}  // namespace cutofflab::rd
