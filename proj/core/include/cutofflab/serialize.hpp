#pragma once

#include <string>
#include <vector>

#include "cutofflab/contest_model.hpp"
#include "cutofflab/rd_continuity.hpp"
#include "cutofflab/rd_local.hpp"
#include "cutofflab/stats.hpp"
#include "cutofflab/validation.hpp"
#include "json.hpp"

namespace cutofflab::io {

/// Column-aligned plain-text table. The first row is the header.
class TextTable {
 public:
  explicit TextTable(std::string title = {}) : title_(std::move(title)) {}
  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  void add_note(std::string note) { notes_.push_back(std::move(note)); }
  std::string render() const;

 private:
  std::string title_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> notes_;
};

/// Three decimals, as in the rendered tables; "-" for NaN.
std::string fmt3(double v);
std::string window_label(int lo, int hi);

nlohmann::json to_json(const contest::EquilibriumSolution& sol);
nlohmann::json to_json(const contest::VerificationReport& rep);
nlohmann::json to_json(const rd::RdWindow& w);
nlohmann::json to_json(const rd::RdLocalResult& r);
nlohmann::json to_json(const rd::WindowSelection& s);
nlohmann::json to_json(const rd::RdContinuityResult& r);
nlohmann::json to_json(const rd::DiffInDiscResult& r);
nlohmann::json to_json(const validation::ValidationReport& rep);
nlohmann::json to_json(const std::vector<stats::RegimeSummary>& table);
nlohmann::json to_json(const stats::GroupComparison& cmp);

/// A labeled column of a rendered results table.
template <typename Result>
struct Column {
  std::string label;
  Result result;
};

std::string render_local_table(const std::string& title, const std::vector<Column<rd::RdLocalResult>>& cols);
std::string render_continuity_table(const std::string& title,
                                    const std::vector<Column<rd::RdContinuityResult>>& cols);
std::string render_diffdisc_table(const std::string& title, const std::vector<Column<rd::DiffInDiscResult>>& cols);
std::string render_validation(const validation::ValidationReport& rep);
std::string render_descriptive(const std::vector<stats::RegimeSummary>& table);
std::string render_group_compare(const stats::GroupComparison& cmp);
std::string render_equilibrium(const contest::EquilibriumSolution& sol, const contest::VerificationReport& rep);

/// CSV columns: rank,n,bin_mean,ci_lo,ci_hi,poly_fit,const_fit
std::string plot_csv(const rd::PlotData& data);
/// CSV columns: x,baseline,pos_expect,neg_expect
std::string figure1_csv(const std::vector<contest::ValuePoint>& series);
/// CSV columns: rank_lo,rank_hi,<first>_mean,<first>_sd,... per group-comparison row
std::string group_compare_csv(const stats::GroupComparison& cmp);

}  // namespace cutofflab::io
