#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cutofflab/data_model.hpp"

namespace cutofflab::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< sample SD (n - 1); 0 when n == 1
  double min = 0.0;
  double max = 0.0;
};

/// Throws InvalidParameters on an empty sample.
Summary summarize(std::span<const double> xs);

double mean(std::span<const double> xs);
/// Sample variance with n - 1 denominator; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

/// Standard normal CDF and its two-sided tail p for a z statistic.
double normal_cdf(double z);
double normal_two_sided_p(double z);
/// Two-sided p for a t statistic with (possibly fractional) df.
double student_t_two_sided_p(double t, double df);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;  ///< Welch-Satterthwaite df (t-tests only)
};

/// Welch unequal-variance t-test of mean(a) - mean(b). Both variances zero:
/// p = 1 when the means agree, 0 otherwise. Needs at least two values per
/// sample; throws InvalidParameters otherwise.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct MannWhitneyResult {
  double u = 0.0;  ///< U statistic of sample a
  double z = 0.0;
  double p_value = 1.0;
};

/// Mann-Whitney rank-sum test with mid-ranks for ties, tie-corrected normal
/// approximation, no continuity correction. z < 0 when a tends to be smaller.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b);

/// Exact two-sided binomial test of k successes in n trials at probability
/// 1/2 by tail doubling: min(1, 2 * min(P[X <= k], P[X >= k])).
double binomial_two_sided_p(std::uint64_t k, std::uint64_t n);

// ---------------------------------------------------------------------------
// Descriptive and group-comparison tables

struct VariableSummary {
  std::string variable;
  Summary summary;
};

struct RegimeSummary {
  Regime regime = Regime::Before;
  std::size_t observations = 0;
  std::vector<VariableSummary> variables;
};

/// Mean, SD, min and max of every built-in variable per regime present.
/// Missing values are dropped per variable; the share of advancers is the
/// mean of `advanced`. Throws InvalidParameters on an empty dataset.
std::vector<RegimeSummary> descriptive_table(const Dataset& ds);

enum class GroupTest { Welch, MannWhitney };

struct GroupRow {
  int rank_lo = 0;
  int rank_hi = 0;
  Summary first;
  Summary second;
  double difference = 0.0;  ///< mean(first) - mean(second)
  double statistic = 0.0;   ///< t or z
  double p_value = 1.0;
  bool flagged = false;  ///< one side empty or too small to test
  std::string note;
};

struct GroupComparison {
  std::string outcome;
  Regime first = Regime::Before;
  Regime second = Regime::After;
  GroupTest test = GroupTest::Welch;
  int bin_width = 5;
  std::vector<GroupRow> rows;
};

/// Compares the two regimes within pre-event rank bins of `bin_width`
/// (1-5, 6-10, ...). Bins that cannot be tested are flagged, not fatal.
/// Throws InvalidParameters if either regime is absent.
GroupComparison group_compare(const Dataset& ds, const Selector& outcome, int bin_width = 5,
                              GroupTest test = GroupTest::Welch, Regime first = Regime::Before,
                              Regime second = Regime::After);

}  // namespace cutofflab::stats
