#include "cutofflab/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace cutofflab::io {
namespace {

using nlohmann::json;

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string full(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string counts(std::size_t a, std::size_t b) { return std::to_string(a) + " / " + std::to_string(b); }

std::string fmt_p(double p) { return fmt3(p); }

std::string with_se(double est, double se) { return fmt3(est) + " (" + fmt3(se) + ")"; }

json local_json(const rd::RdLocalResult& r) {
  return {{"outcome", r.outcome},
          {"estimate", num(r.estimate)},
          {"p_value", num(r.p_value)},
          {"window", to_json(r.window)},
          {"n_treated", r.n_treated},
          {"n_control", r.n_control},
          {"n_permutations", r.n_permutations}};
}

}  // namespace

std::string TextTable::render() const {
  std::vector<std::size_t> width;
  for (const auto& row : rows_) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  if (!title_.empty()) out += title_ + "\n";
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c == 0) {
        cell.resize(width[c], ' ');
      } else {
        cell.insert(0, width[c] - cell.size(), ' ');
      }
      out += cell;
      if (c + 1 < row.size()) out += "  ";
    }
    out += "\n";
    if (r == 0) out += std::string(total > 2 ? total - 2 : total, '-') + "\n";
  }
  for (const std::string& n : notes_) out += n + "\n";
  return out;
}

std::string fmt3(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string window_label(int lo, int hi) { return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]"; }

json to_json(const contest::EquilibriumSolution& s) {
  return {{"params",
           {{"W", s.params.prize}, {"d", s.params.loss_penalty}, {"u", s.params.win_bonus}, {"s", s.params.salience}}},
          {"v1", s.stake1},
          {"v2", s.stake2},
          {"support_upper", s.support_upper},
          {"atom_at_zero", s.atom_at_zero},
          {"payoff1", s.payoff1},
          {"payoff2", s.payoff2},
          {"p1", s.win_prob1},
          {"p2", s.win_prob2},
          {"effort1_derived", s.effort1_derived},
          {"effort2_derived", s.effort2_derived},
          {"effort1_printed", s.effort1_printed},
          {"effort2_printed", s.effort2_printed}};
}

json to_json(const contest::VerificationReport& r) {
  return {{"grid_points", r.grid_points},         {"grid_spacing", r.grid_spacing},
          {"tolerance", r.tolerance},             {"max_improvement_player1", r.max_improvement1},
          {"max_improvement_player2", r.max_improvement2}, {"max_improvement", r.max_improvement},
          {"passed", r.passed}};
}

json to_json(const rd::RdWindow& w) { return {{"lower", w.lower}, {"upper", w.upper}, {"cutoff", w.cutoff}}; }

json to_json(const rd::RdLocalResult& r) { return local_json(r); }

json to_json(const rd::WindowSelection& s) {
  json steps = json::array();
  for (const auto& st : s.steps) {
    json ps = json::array();
    for (double p : st.covariate_p) ps.push_back(num(p));
    steps.push_back({{"half_width", st.half_width}, {"window", to_json(st.window)}, {"min_p", num(st.min_p)},
                     {"covariate_p", ps}});
  }
  return {{"window", to_json(s.window)}, {"balanced", s.balanced}, {"steps", steps}};
}

json to_json(const rd::RdContinuityResult& r) {
  return {{"outcome", r.outcome},
          {"cutoff", r.cutoff},
          {"tau_conventional", num(r.tau_conventional)},
          {"tau_bias_corrected", num(r.tau_bias_corrected)},
          {"se_conventional", num(r.se_conventional)},
          {"se_robust", num(r.se_robust)},
          {"p_conventional", num(r.p_conventional)},
          {"p_robust", num(r.p_robust)},
          {"bandwidth_h", num(r.bandwidth_h)},
          {"bandwidth_b", num(r.bandwidth_b)},
          {"bandwidth_flagged", r.bandwidth_flagged},
          {"bandwidth_ranks", {r.rank_lo, r.rank_hi}},
          {"effective_n_treated", r.effective_n_treated},
          {"effective_n_control", r.effective_n_control},
          {"n_observations", r.n_observations},
          {"covariates_used", r.covariates_used},
          {"cluster", r.cluster}};
}

json to_json(const rd::DiffInDiscResult& r) {
  return {{"outcome", r.outcome},
          {"cutoff", r.cutoff},
          {"delta_tau", num(r.delta_tau)},
          {"se", num(r.se)},
          {"p_conventional", num(r.p_conventional)},
          {"tau_before", num(r.tau_before)},
          {"tau_after", num(r.tau_after)},
          {"bandwidth", num(r.bandwidth)},
          {"bandwidth_flagged", r.bandwidth_flagged},
          {"bandwidth_ranks", {r.rank_lo, r.rank_hi}},
          {"effective_n",
           {{"before", {{"treated", r.n_treated_before}, {"control", r.n_control_before}}},
            {"after", {{"treated", r.n_treated_after}, {"control", r.n_control_after}}}}},
          {"n_observations", r.n_observations},
          {"covariates_used", r.covariates_used},
          {"cluster", r.cluster}};
}

json to_json(const validation::ValidationReport& rep) {
  json balance = json::array();
  for (const auto& row : rep.balance_rows) {
    json local = json::array();
    for (const auto& l : row.local) local.push_back(local_json(l));
    json j = {{"covariate", row.covariate}, {"local", local}};
    j["continuity"] = row.continuity ? to_json(*row.continuity) : json(nullptr);
    if (!row.continuity_error.empty()) j["continuity_error"] = row.continuity_error;
    balance.push_back(j);
  }
  json density = json::array();
  for (const auto& d : rep.density_tests) {
    density.push_back({{"window", to_json(d.window)}, {"n_treated", d.n_treated}, {"n_control", d.n_control},
                       {"p_value", num(d.p_value)}});
  }
  json placebo = json::array();
  for (const auto& row : rep.placebo_rows) {
    json ws = json::array();
    for (const auto& w : row.windows) {
      json j = local_json(w.result);
      j["balance_failed"] = w.balance_failed;
      j["balance_min_p"] = num(w.balance_min_p);
      ws.push_back(j);
    }
    json j = {{"cutoff", row.cutoff}, {"local", ws}};
    j["continuity"] = row.continuity ? to_json(*row.continuity) : json(nullptr);
    if (!row.continuity_error.empty()) j["continuity_error"] = row.continuity_error;
    placebo.push_back(j);
  }
  json freq = json::array();
  for (const auto& f : rep.frequency_rows) {
    freq.push_back({{"rank", f.rank}, {"treated", f.treated}, {"count_before", f.count_before},
                    {"count_after", f.count_after}});
  }
  return {{"regime", rep.regime},
          {"balance_rows", balance},
          {"density_tests", density},
          {"placebo_rows", placebo},
          {"frequency_rows", freq}};
}

json to_json(const std::vector<stats::RegimeSummary>& table) {
  json out = json::array();
  for (const auto& rs : table) {
    json vars = json::array();
    for (const auto& v : rs.variables) {
      vars.push_back({{"variable", v.variable}, {"n", v.summary.n}, {"mean", num(v.summary.mean)},
                      {"sd", num(v.summary.sd)}, {"min", num(v.summary.min)}, {"max", num(v.summary.max)}});
    }
    out.push_back({{"regime", std::string(to_string(rs.regime))}, {"observations", rs.observations},
                   {"variables", vars}});
  }
  return out;
}

json to_json(const stats::GroupComparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    json j = {{"rank_lo", r.rank_lo},
              {"rank_hi", r.rank_hi},
              {"n_first", r.first.n},
              {"mean_first", num(r.first.mean)},
              {"sd_first", num(r.first.sd)},
              {"n_second", r.second.n},
              {"mean_second", num(r.second.mean)},
              {"sd_second", num(r.second.sd)},
              {"difference", num(r.difference)},
              {"statistic", num(r.statistic)},
              {"p_value", num(r.p_value)},
              {"flagged", r.flagged}};
    if (!r.note.empty()) j["note"] = r.note;
    rows.push_back(j);
  }
  return {{"outcome", c.outcome},
          {"first", std::string(to_string(c.first))},
          {"second", std::string(to_string(c.second))},
          {"test", c.test == stats::GroupTest::Welch ? "welch_t" : "mann_whitney"},
          {"bin_width", c.bin_width},
          {"rows", rows}};
}

std::string render_local_table(const std::string& title, const std::vector<Column<rd::RdLocalResult>>& cols) {
  TextTable t(title);
  std::vector<std::string> head = {""};
  std::vector<std::string> est = {"Point estimate"};
  std::vector<std::string> p = {"P-value"};
  std::vector<std::string> win = {"Window"};
  std::vector<std::string> n = {"Effective no of obs. (treated / controls)"};
  for (const auto& c : cols) {
    head.push_back(c.label);
    est.push_back(fmt3(c.result.estimate));
    p.push_back(fmt_p(c.result.p_value));
    win.push_back(window_label(c.result.window.lower, c.result.window.upper));
    n.push_back(counts(c.result.n_treated, c.result.n_control));
  }
  for (auto* row : {&head, &est, &p, &win, &n}) t.add_row(*row);
  t.add_note("Difference in means (treated minus control); two-sided Fisherian randomization p-values.");
  return t.render();
}

std::string render_continuity_table(const std::string& title,
                                    const std::vector<Column<rd::RdContinuityResult>>& cols) {
  TextTable t(title);
  std::vector<std::string> head = {""};
  std::vector<std::string> est = {"Point estimate"};
  std::vector<std::string> bc = {"Bias-corrected estimate"};
  std::vector<std::string> p = {"P-value (robust)"};
  std::vector<std::string> pc = {"P-value (conventional)"};
  std::vector<std::string> bw = {"Bandwidth"};
  std::vector<std::string> h = {"h"};
  std::vector<std::string> n = {"Effective no of obs. (treated / controls)"};
  std::vector<std::string> cov = {"Covariates"};
  std::vector<std::string> no = {"No of obs."};
  for (const auto& c : cols) {
    const auto& r = c.result;
    head.push_back(c.label);
    est.push_back(with_se(r.tau_conventional, r.se_conventional));
    bc.push_back(with_se(r.tau_bias_corrected, r.se_robust));
    p.push_back(fmt_p(r.p_robust));
    pc.push_back(fmt_p(r.p_conventional));
    bw.push_back(window_label(r.rank_lo, r.rank_hi));
    h.push_back(fmt3(r.bandwidth_h) + (r.bandwidth_flagged ? "*" : ""));
    n.push_back(counts(r.effective_n_treated, r.effective_n_control));
    std::string cv;
    for (const auto& name : r.covariates_used) cv += (cv.empty() ? "" : ",") + name;
    cov.push_back(cv.empty() ? "none" : cv);
    no.push_back(std::to_string(r.n_observations));
  }
  for (auto* row : {&head, &est, &bc, &p, &pc, &bw, &h, &n, &cov, &no}) t.add_row(*row);
  t.add_note("Local linear, triangular kernel, MSE-optimal bandwidth; SEs clustered (in parentheses).");
  t.add_note("P-values from robust bias correction; * bandwidth flagged by the selector.");
  return t.render();
}

std::string render_diffdisc_table(const std::string& title, const std::vector<Column<rd::DiffInDiscResult>>& cols) {
  TextTable t(title);
  std::vector<std::string> head = {""};
  std::vector<std::string> est = {"Point estimate"};
  std::vector<std::string> p = {"P-value"};
  std::vector<std::string> bw = {"Bandwidth"};
  std::vector<std::string> n = {"Effective no of obs. (treated / controls)"};
  std::vector<std::string> no = {"No of obs."};
  for (const auto& c : cols) {
    const auto& r = c.result;
    head.push_back(c.label);
    est.push_back(with_se(r.delta_tau, r.se));
    p.push_back(fmt_p(r.p_conventional));
    bw.push_back(window_label(r.rank_lo, r.rank_hi));
    n.push_back(counts(r.n_treated_before + r.n_treated_after, r.n_control_before + r.n_control_after));
    no.push_back(std::to_string(r.n_observations));
  }
  for (auto* row : {&head, &est, &p, &bw, &n, &no}) t.add_row(*row);
  t.add_note("Difference in discontinuities (After minus Before); clustered SEs; conventional p-values.");
  return t.render();
}

std::string render_validation(const validation::ValidationReport& rep) {
  std::string out;
  {
    TextTable t("RD estimates on predetermined covariates (" + rep.regime + ")");
    std::vector<std::string> head = {"Covariate"};
    if (!rep.balance_rows.empty()) {
      for (const auto& l : rep.balance_rows.front().local) head.push_back(window_label(l.window.lower, l.window.upper));
      head.push_back("Continuity");
    }
    t.add_row(head);
    for (const auto& row : rep.balance_rows) {
      std::vector<std::string> est = {row.covariate};
      std::vector<std::string> p = {"  p-value"};
      std::vector<std::string> n = {"  treated / controls"};
      for (const auto& l : row.local) {
        est.push_back(fmt3(l.estimate));
        p.push_back(fmt_p(l.p_value));
        n.push_back(counts(l.n_treated, l.n_control));
      }
      if (row.continuity) {
        est.push_back(with_se(row.continuity->tau_conventional, row.continuity->se_conventional));
        p.push_back(fmt_p(row.continuity->p_robust));
        n.push_back(counts(row.continuity->effective_n_treated, row.continuity->effective_n_control));
      } else {
        est.push_back("n/a");
        p.push_back("-");
        n.push_back("-");
      }
      t.add_row(est);
      t.add_row(p);
      t.add_row(n);
    }
    out += t.render() + "\n";
  }
  {
    TextTable t("Binomial density tests (" + rep.regime + ")");
    t.add_row({"Window", "Treated", "Controls", "P-value"});
    for (const auto& d : rep.density_tests) {
      t.add_row({window_label(d.window.lower, d.window.upper), std::to_string(d.n_treated),
                 std::to_string(d.n_control), fmt_p(d.p_value)});
    }
    out += t.render() + "\n";
  }
  {
    TextTable t("Frequency of mass points around the cutoff");
    t.add_row({"Pre-event rank", "Side", "Before", "After"});
    for (const auto& f : rep.frequency_rows) {
      t.add_row({std::to_string(f.rank), f.treated ? "treated" : "controls", std::to_string(f.count_before),
                 std::to_string(f.count_after)});
    }
    out += t.render() + "\n";
  }
  {
    TextTable t("RD estimates at placebo cutoffs (" + rep.regime + ")");
    std::vector<std::string> head = {""};
    std::vector<std::string> cut = {"Placebo cutoff"};
    std::vector<std::string> est = {"Point estimate"};
    std::vector<std::string> p = {"P-value"};
    std::vector<std::string> win = {"Window / bandwidth"};
    std::vector<std::string> n = {"Effective no of obs. (treated / controls)"};
    int col = 1;
    for (const auto& row : rep.placebo_rows) {
      for (const auto& w : row.windows) {
        head.push_back("(" + std::to_string(col++) + ")");
        cut.push_back(fmt3(row.cutoff).substr(0, fmt3(row.cutoff).size() - 2));
        est.push_back(fmt3(w.result.estimate));
        p.push_back(fmt_p(w.result.p_value));
        win.push_back(window_label(w.result.window.lower, w.result.window.upper) + (w.balance_failed ? "*" : ""));
        n.push_back(counts(w.result.n_treated, w.result.n_control));
      }
      head.push_back("(" + std::to_string(col++) + ")");
      cut.push_back(fmt3(row.cutoff).substr(0, fmt3(row.cutoff).size() - 2));
      if (row.continuity) {
        est.push_back(with_se(row.continuity->tau_conventional, row.continuity->se_conventional));
        p.push_back(fmt_p(row.continuity->p_robust));
        win.push_back(window_label(row.continuity->rank_lo, row.continuity->rank_hi));
        n.push_back(counts(row.continuity->effective_n_treated, row.continuity->effective_n_control));
      } else {
        est.push_back("n/a");
        p.push_back("-");
        win.push_back("-");
        n.push_back("-");
      }
    }
    for (auto* r : {&head, &cut, &est, &p, &win, &n}) t.add_row(*r);
    t.add_note("*This window does not pass covariate balance tests.");
    out += t.render();
  }
  return out;
}

std::string render_descriptive(const std::vector<stats::RegimeSummary>& table) {
  TextTable t("Descriptive statistics");
  std::vector<std::string> head = {"Variable"};
  for (const auto& rs : table) {
    head.push_back(std::string(to_string(rs.regime)) + " mean (SD)");
    head.push_back("min-max");
  }
  t.add_row(head);
  std::vector<std::string> names;
  for (const auto& rs : table) {
    for (const auto& v : rs.variables) {
      if (std::find(names.begin(), names.end(), v.variable) == names.end()) names.push_back(v.variable);
    }
  }
  for (const auto& name : names) {
    std::vector<std::string> row = {name};
    for (const auto& rs : table) {
      auto it = std::find_if(rs.variables.begin(), rs.variables.end(),
                             [&](const auto& v) { return v.variable == name; });
      if (it == rs.variables.end()) {
        row.push_back("-");
        row.push_back("-");
        continue;
      }
      row.push_back(fmt3(it->summary.mean) + " (" + fmt3(it->summary.sd) + ")");
      row.push_back(full(it->summary.min) + "-" + full(it->summary.max));
    }
    t.add_row(row);
  }
  std::vector<std::string> obs = {"No. of obs."};
  for (const auto& rs : table) {
    obs.push_back(std::to_string(rs.observations));
    obs.push_back("");
  }
  t.add_row(obs);
  return t.render();
}

std::string render_group_compare(const stats::GroupComparison& c) {
  TextTable t("Comparison of " + c.outcome + " by pre-event rank group (" + std::string(to_string(c.first)) +
              " vs " + std::string(to_string(c.second)) + ")");
  t.add_row({"Ranks", std::string(to_string(c.first)) + " mean (SD)", std::string(to_string(c.second)) + " mean (SD)",
             "Difference", c.test == stats::GroupTest::Welch ? "t" : "z", "P-value"});
  for (const auto& r : c.rows) {
    const std::string a = r.first.n ? fmt3(r.first.mean) + " (" + fmt3(r.first.sd) + ")" : "-";
    const std::string b = r.second.n ? fmt3(r.second.mean) + " (" + fmt3(r.second.sd) + ")" : "-";
    t.add_row({std::to_string(r.rank_lo) + "-" + std::to_string(r.rank_hi), a, b, fmt3(r.difference),
               fmt3(r.statistic), fmt_p(r.p_value) + (r.flagged ? " !" : "")});
  }
  t.add_note(c.test == stats::GroupTest::Welch ? "Two-sided p-values of Welch t-tests." :
                                                 "z and two-sided p-values of Mann-Whitney U tests.");
  return t.render();
}

std::string render_equilibrium(const contest::EquilibriumSolution& s, const contest::VerificationReport& rep) {
  TextTable t("All-pay contest equilibrium (W=" + full(s.params.prize) + ", d=" + full(s.params.loss_penalty) +
              ", u=" + full(s.params.win_bonus) + ", s=" + std::to_string(s.params.salience) + ")");
  t.add_row({"Quantity", "Player 1", "Player 2"});
  t.add_row({"Stake", fmt3(s.stake1), fmt3(s.stake2)});
  t.add_row({"Win probability", fmt3(s.win_prob1), fmt3(s.win_prob2)});
  t.add_row({"Expected payoff", fmt3(s.payoff1), fmt3(s.payoff2)});
  t.add_row({"Expected effort (from CDF)", fmt3(s.effort1_derived), fmt3(s.effort2_derived)});
  t.add_row({"Expected effort (printed form)", fmt3(s.effort1_printed), fmt3(s.effort2_printed)});
  t.add_row({"Atom at zero", "0.000", fmt3(s.atom_at_zero)});
  t.add_note("Support [0, " + fmt3(s.support_upper) + "]; best-response check over " + std::to_string(rep.grid_points) +
             " points: max improvement " + fmt3(rep.max_improvement) + " (tolerance " + fmt3(rep.tolerance) + ") " +
             (rep.passed ? "PASS" : "FAIL"));
  return t.render();
}

std::string plot_csv(const rd::PlotData& d) {
  std::string out = "rank,n,bin_mean,ci_lo,ci_hi,poly_fit,const_fit\n";
  for (const auto& r : d.rows) {
    out += std::to_string(r.rank) + "," + std::to_string(r.n) + "," + full(r.bin_mean) + "," + full(r.ci_lo) + "," +
           full(r.ci_hi) + "," + full(r.poly_fit) + "," + (r.const_fit ? full(*r.const_fit) : "") + "\n";
  }
  return out;
}

std::string figure1_csv(const std::vector<contest::ValuePoint>& series) {
  std::string out = "x,baseline,pos_expect,neg_expect\n";
  for (const auto& p : series) {
    out += full(p.x) + "," + full(p.baseline) + "," + full(p.positive_expectation) + "," +
           full(p.negative_expectation) + "\n";
  }
  return out;
}

std::string group_compare_csv(const stats::GroupComparison& c) {
  const std::string a(to_string(c.first));
  const std::string b(to_string(c.second));
  std::string out = "rank_lo,rank_hi," + a + "_n," + a + "_mean," + a + "_sd," + b + "_n," + b + "_mean," + b +
                    "_sd,difference,statistic,p_value\n";
  for (const auto& r : c.rows) {
    out += std::to_string(r.rank_lo) + "," + std::to_string(r.rank_hi) + "," + std::to_string(r.first.n) + "," +
           (r.first.n ? full(r.first.mean) : "") + "," + (r.first.n ? full(r.first.sd) : "") + "," +
           std::to_string(r.second.n) + "," + (r.second.n ? full(r.second.mean) : "") + "," +
           (r.second.n ? full(r.second.sd) : "") + "," + full(r.difference) + "," + full(r.statistic) + "," +
           full(r.p_value) + "\n";
  }
  return out;
}

}  // namespace cutofflab::io
