#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cutofflab {

/// Qualification regime: Before the rule change the top 10 of the World Cup
/// standings were prequalified; After it everybody jumps in qualification.
enum class Regime { Before, After };

std::string_view to_string(Regime r) noexcept;
/// Accepts "before" / "after" (case-insensitive).
Regime parse_regime(std::string_view text);

inline constexpr int kMinRank = 1;
inline constexpr int kMaxRank = 50;
/// Offset between nominal qualification rank and effective pre-event rank
/// under the Before regime.
inline constexpr int kPrequalifiedSlots = 10;

/// One athlete-event observation.
struct JumpRecord {
  std::string athlete_id;
  std::string event_id;
  int season = 0;
  Regime regime = Regime::After;
  std::optional<int> qual_rank_nominal;
  int pre_event_rank = 1;  ///< running variable
  double round1_distance_points = 0.0;
  double round1_style_points = 0.0;
  double round1_total = 0.0;
  bool advanced = false;
  double wc_points_before = 0.0;
  std::optional<int> previous_event_rank;
  bool home_event = false;

  bool operator==(const JumpRecord&) const = default;
};

/// Throws InvariantError describing the first violated record invariant.
void validate_record(const JumpRecord& rec);

/// Immutable, ordered collection of observations.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<JumpRecord> records, std::string provenance);

  std::span<const JumpRecord> records() const noexcept { return records_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  Dataset filter(const std::function<bool(const JumpRecord&)>& keep, std::string_view note) const;
  Dataset with_regime(Regime r) const;
  bool has_regime(Regime r) const;

  bool operator==(const Dataset& other) const { return records_ == other.records_; }

 private:
  std::vector<JumpRecord> records_;
  std::string provenance_;
};

/// Per-event structural check: complete events have 50 starters with exactly
/// 30 advancing. Returns one message per event that deviates.
std::vector<std::string> check_event_structure(const Dataset& ds);

/// Named accessor yielding a numeric value per record, or nothing when the
/// record lacks it (missing previous_event_rank, say).
class Selector {
 public:
  using Fn = std::function<std::optional<double>(const JumpRecord&)>;

  Selector(std::string name, Fn fn);

  /// Built-in column selectors: advanced, pre_event_rank, qual_rank_nominal,
  /// round1_total, round1_distance_points, round1_style_points,
  /// wc_points_before, previous_event_rank, home_event.
  static Selector by_name(std::string_view name);
  static std::vector<std::string> builtin_names();

  const std::string& name() const noexcept { return name_; }
  std::optional<double> operator()(const JumpRecord& r) const { return fn_(r); }

 private:
  std::string name_;
  Fn fn_;
};

/// Parses "a,b,c" into selectors.
std::vector<Selector> parse_selectors(std::string_view comma_list);

/// Cluster definition for robust standard errors.
enum class ClusterBy { Athlete, Event, Observation };

std::string_view to_string(ClusterBy c) noexcept;
ClusterBy parse_cluster(std::string_view text);

/// Dense cluster index per record (0..G-1), in order of first appearance.
std::vector<int> cluster_ids(std::span<const JumpRecord> records, ClusterBy by);

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvOptions {
  /// Reject the whole file on the first bad row (default) or skip bad rows
  /// and collect their diagnostics.
  bool strict = true;
};

struct LoadResult {
  Dataset dataset;
  std::vector<std::string> rejected;  ///< row-indexed diagnostics (non-strict mode)
};

/// Header of the on-disk format, in column order.
const std::vector<std::string>& csv_columns();

LoadResult load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
LoadResult parse_csv(std::string_view text, std::string provenance, const CsvOptions& options = {});

std::string to_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace cutofflab
