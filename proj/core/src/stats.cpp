#include "cutofflab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cutofflab/error.hpp"

namespace cutofflab::stats {

Summary summarize(std::span<const double> xs) {
  if (xs.empty()) throw InvalidParameters("summarize: empty sample");
  Summary s;
  s.n = xs.size();
  s.mean = mean(xs);
  s.sd = std::sqrt(sample_variance(xs));
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InvalidParameters("welch_t_test: each sample needs at least two values");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double diff = mean(a) - mean(b);

  TestResult r;
  if (va + vb == 0.0) {
    r.statistic = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    r.df = na + nb - 2.0;
    return r;
  }
  r.statistic = diff / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.statistic, r.df);
  return r;
}

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidParameters("mann_whitney: samples must be nonempty");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;

  std::vector<std::pair<double, bool>> pooled;  // value, belongs to a
  pooled.reserve(n);
  for (double x : a) pooled.emplace_back(x, true);
  for (double x : b) pooled.emplace_back(x, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) rank_sum_a += mid_rank;
    }
    i = j;
  }

  const double dna = static_cast<double>(na);
  const double dnb = static_cast<double>(nb);
  const double dn = static_cast<double>(n);
  MannWhitneyResult r;
  r.u = rank_sum_a - dna * (dna + 1.0) / 2.0;
  const double mu = dna * dnb / 2.0;
  double var = dna * dnb / 12.0 * (dn + 1.0);
  if (n > 1) var -= dna * dnb / 12.0 * tie_term / (dn * (dn - 1.0));
  if (var <= 0.0) {
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.z = (r.u - mu) / std::sqrt(var);
  r.p_value = std::min(1.0, normal_two_sided_p(r.z));
  return r;
}

double binomial_two_sided_p(std::uint64_t k, std::uint64_t n) {
  if (k > n) throw InvalidParameters("binomial_two_sided_p: k exceeds n");
  if (n == 0) return 1.0;
  boost::math::binomial dist(static_cast<double>(n), 0.5);
  const double lower = boost::math::cdf(dist, static_cast<double>(k));
  const double upper = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

std::vector<RegimeSummary> descriptive_table(const Dataset& ds) {
  if (ds.empty()) throw InvalidParameters("descriptive_table: empty dataset");
  const std::vector<std::string> variables = {"advanced",         "pre_event_rank",      "wc_points_before",
                                              "previous_event_rank", "home_event",       "round1_total",
                                              "round1_distance_points", "round1_style_points"};
  std::vector<RegimeSummary> out;
  for (Regime regime : {Regime::Before, Regime::After}) {
    if (!ds.has_regime(regime)) continue;
    RegimeSummary rs;
    rs.regime = regime;
    for (const std::string& name : variables) {
      const Selector sel = Selector::by_name(name);
      std::vector<double> xs;
      for (const JumpRecord& r : ds.records()) {
        if (r.regime != regime) continue;
        if (auto v = sel(r)) xs.push_back(*v);
      }
      if (xs.empty()) continue;
      rs.variables.push_back({name, summarize(xs)});
    }
    rs.observations = static_cast<std::size_t>(
        std::count_if(ds.records().begin(), ds.records().end(), [regime](const JumpRecord& r) { return r.regime == regime; }));
    out.push_back(std::move(rs));
  }
  return out;
}

GroupComparison group_compare(const Dataset& ds, const Selector& outcome, int bin_width, GroupTest test,
                              Regime first, Regime second) {
  if (bin_width < 1) throw InvalidParameters("group_compare: bin width must be positive");
  if (!ds.has_regime(first) || !ds.has_regime(second)) {
    throw InvalidParameters("group_compare: both regimes must be present");
  }
  GroupComparison cmp;
  cmp.outcome = outcome.name();
  cmp.first = first;
  cmp.second = second;
  cmp.test = test;
  cmp.bin_width = bin_width;

  for (int lo = kMinRank; lo <= kMaxRank; lo += bin_width) {
    const int hi = std::min(kMaxRank, lo + bin_width - 1);
    std::vector<double> xa;
    std::vector<double> xb;
    for (const JumpRecord& r : ds.records()) {
      if (r.pre_event_rank < lo || r.pre_event_rank > hi) continue;
      auto v = outcome(r);
      if (!v) continue;
      if (r.regime == first) xa.push_back(*v);
      if (r.regime == second) xb.push_back(*v);
    }
    GroupRow row;
    row.rank_lo = lo;
    row.rank_hi = hi;
    if (!xa.empty()) row.first = summarize(xa);
    if (!xb.empty()) row.second = summarize(xb);
    if (xa.empty() || xb.empty()) {
      row.flagged = true;
      row.note = "empty bin";
      row.difference = std::numeric_limits<double>::quiet_NaN();
      row.statistic = std::numeric_limits<double>::quiet_NaN();
      row.p_value = std::numeric_limits<double>::quiet_NaN();
      cmp.rows.push_back(row);
      continue;
    }
    row.difference = row.first.mean - row.second.mean;
    if (test == GroupTest::Welch) {
      if (xa.size() < 2 || xb.size() < 2) {
        row.flagged = true;
        row.note = "fewer than two observations";
        row.statistic = std::numeric_limits<double>::quiet_NaN();
        row.p_value = std::numeric_limits<double>::quiet_NaN();
      } else {
        const TestResult t = welch_t_test(xa, xb);
        row.statistic = t.statistic;
        row.p_value = t.p_value;
      }
    } else {
      const MannWhitneyResult mw = mann_whitney(xa, xb);
      row.statistic = mw.z;
      row.p_value = mw.p_value;
    }
    cmp.rows.push_back(row);
  }
  return cmp;
}

}  // namespace cutofflab::stats
