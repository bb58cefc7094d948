#include "cutofflab/rd_local.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cutofflab/error.hpp"
#include "cutofflab/parallel.hpp"
#include "cutofflab/rng.hpp"

namespace cutofflab::rd {
namespace {

constexpr std::size_t kReplicateBlock = 512;

bool at_least(double stat, double observed) {
  return stat >= observed - 1e-12 * std::max(1.0, std::fabs(observed));
}

double abs_diff(double sum_treated, double total, std::size_t nt, std::size_t n) {
  const double nc = static_cast<double>(n - nt);
  return std::fabs(sum_treated / static_cast<double>(nt) - (total - sum_treated) / nc);
}

double enumerate_p(const WindowSample& s, double observed) {
  const std::size_t n = s.values.size();
  const std::size_t k = s.n_treated;
  const double total = std::accumulate(s.values.begin(), s.values.end(), 0.0);
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t count = 0;
  std::size_t assignments = 0;
  while (true) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += s.values[i];
    if (at_least(abs_diff(sum, total, k, n), observed)) ++count;
    ++assignments;
    // next k-combination in lexicographic order
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return static_cast<double>(count) / static_cast<double>(assignments);
}

double simulate_p(const WindowSample& s, double observed, const FisherOptions& opt) {
  const std::size_t n = s.values.size();
  const std::size_t k = s.n_treated;
  const double total = std::accumulate(s.values.begin(), s.values.end(), 0.0);
  const std::size_t reps = opt.n_permutations;
  const std::size_t blocks = (reps + kReplicateBlock - 1) / kReplicateBlock;
  std::vector<std::size_t> hits(blocks, 0);

  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> pool(s.values);
    const std::size_t lo = b * kReplicateBlock;
    const std::size_t hi = std::min(reps, lo + kReplicateBlock);
    std::size_t local = 0;
    for (std::size_t r = lo; r < hi; ++r) {
      Engine eng = substream(opt.seed, {r});
      // Partial Fisher-Yates: the first k slots become the treated group.
      // The pool's starting order differs between replicates of a block,
      // which is harmless since each selection is uniform from any order.
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(eng)]);
        sum += pool[i];
      }
      if (at_least(abs_diff(sum, total, k, n), observed)) ++local;
    }
    hits[b] = local;
  });
  const std::size_t count = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  return (1.0 + static_cast<double>(count)) / (1.0 + static_cast<double>(reps));
}

}  // namespace

RdWindow RdWindow::symmetric(double cutoff, int half_width) {
  if (half_width < 1) throw InvalidParameters("window half width must be at least 1");
  RdWindow w;
  w.cutoff = cutoff;
  w.lower = static_cast<int>(std::floor(cutoff)) - half_width + 1;
  w.upper = static_cast<int>(std::ceil(cutoff)) + half_width - 1;
  w.validate();
  return w;
}

int RdWindow::last_treated() const { return static_cast<int>(std::floor(cutoff)); }
int RdWindow::first_control() const { return static_cast<int>(std::ceil(cutoff)); }

int RdWindow::half_width() const {
  return std::min(last_treated() - lower + 1, upper - first_control() + 1);
}

void RdWindow::validate() const {
  if (!std::isfinite(cutoff) || std::floor(cutoff) == cutoff) {
    throw InvalidParameters("cutoff must be a non-integer rank boundary such as 30.5");
  }
  if (!(lower <= last_treated() && first_control() <= upper)) {
    throw InvalidParameters("window [" + std::to_string(lower) + ", " + std::to_string(upper) +
                            "] does not straddle cutoff " + std::to_string(cutoff));
  }
}

bool is_treated(int rank, double cutoff) { return rank <= static_cast<int>(std::floor(cutoff)); }

WindowSample window_sample(const Dataset& ds, const Selector& outcome, const RdWindow& window) {
  window.validate();
  WindowSample s;
  for (const JumpRecord& r : ds.records()) {
    if (r.pre_event_rank < window.lower || r.pre_event_rank > window.upper) continue;
    auto v = outcome(r);
    if (!v) continue;
    const bool t = is_treated(r.pre_event_rank, window.cutoff);
    s.values.push_back(*v);
    s.treated.push_back(t ? 1 : 0);
    (t ? s.n_treated : s.n_control) += 1;
  }
  return s;
}

double diff_in_means(const WindowSample& s) {
  if (s.n_treated == 0 || s.n_control == 0) {
    throw EstimationError("empty side: " + std::to_string(s.n_treated) + " treated / " +
                          std::to_string(s.n_control) + " control units in window");
  }
  double st = 0.0;
  double sc = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) (s.treated[i] ? st : sc) += s.values[i];
  return st / static_cast<double>(s.n_treated) - sc / static_cast<double>(s.n_control);
}

double diff_in_means(const Dataset& ds, const Selector& outcome, const RdWindow& window) {
  return diff_in_means(window_sample(ds, outcome, window));
}

std::size_t binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    // c * num / i is exact at every step; guard the multiplication.
    if (c > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    c = c * num / i;
  }
  return c;
}

double fisher_p(const WindowSample& s, const FisherOptions& opt) {
  const double observed = std::fabs(diff_in_means(s));
  if (opt.n_permutations < 1) throw InvalidParameters("fisher_p: n_permutations must be at least 1");
  // Ordering the pool by label makes the simulated stream independent of the
  // input order of units.
  WindowSample sorted = s;
  {
    std::vector<std::size_t> order(s.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (s.treated[a] != s.treated[b]) return s.treated[a] > s.treated[b];
      return s.values[a] < s.values[b];
    });
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted.values[i] = s.values[order[i]];
      sorted.treated[i] = s.treated[order[i]];
    }
  }

  const std::size_t assignments = binomial_coefficient(s.values.size(), s.n_treated);
  FisherMode mode = opt.mode;
  if (mode == FisherMode::Auto) {
    mode = assignments <= opt.n_permutations ? FisherMode::Enumerate : FisherMode::Simulate;
  }
  if (mode == FisherMode::Enumerate) {
    if (assignments > opt.enumeration_limit) {
      throw InvalidParameters("fisher_p: " + std::to_string(assignments) +
                              " assignments exceed the enumeration limit");
    }
    return enumerate_p(sorted, observed);
  }
  return simulate_p(sorted, observed, opt);
}

double fisher_p(const Dataset& ds, const Selector& outcome, const RdWindow& window, const FisherOptions& opt) {
  return fisher_p(window_sample(ds, outcome, window), opt);
}

RdLocalResult rd_local_estimate(const Dataset& ds, const Selector& outcome, const RdWindow& window,
                                const FisherOptions& options) {
  const WindowSample s = window_sample(ds, outcome, window);
  RdLocalResult r;
  r.outcome = outcome.name();
  r.estimate = diff_in_means(s);
  r.p_value = fisher_p(s, options);
  r.window = window;
  r.n_treated = s.n_treated;
  r.n_control = s.n_control;
  r.n_permutations = options.n_permutations;
  r.mode = options.mode;
  return r;
}

WindowSelection select_window(const Dataset& ds, const std::vector<Selector>& covariates, double cutoff,
                              const WindowSearchOptions& opt) {
  if (covariates.empty()) throw InvalidParameters("select_window: at least one covariate is required");
  if (opt.max_half_width < 1) throw InvalidParameters("select_window: max_half_width must be at least 1");

  WindowSelection sel;
  sel.window = RdWindow::symmetric(cutoff, 1);
  for (int w = 1; w <= opt.max_half_width; ++w) {
    WindowStep step;
    step.half_width = w;
    step.window = RdWindow::symmetric(cutoff, w);
    step.min_p = 1.0;
    bool any_tested = false;
    for (const Selector& cov : covariates) {
      const WindowSample s = window_sample(ds, cov, step.window);
      if (s.n_treated == 0 || s.n_control == 0) {
        step.covariate_p.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const double p = fisher_p(s, opt.fisher);
      step.covariate_p.push_back(p);
      step.min_p = std::min(step.min_p, p);
      any_tested = true;
    }
    if (!any_tested) throw EstimationError("select_window: no covariate has data on both sides");
    const bool pass = step.min_p >= opt.threshold;
    sel.steps.push_back(step);
    if (!pass) {
      if (w == 1) sel.balanced = false;
      break;
    }
    sel.window = step.window;
  }
  return sel;
}

}  // namespace cutofflab::rd
