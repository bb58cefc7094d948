#include "cutofflab/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>

#include "cutofflab/error.hpp"

namespace cutofflab {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(Regime r) noexcept { return r == Regime::Before ? "before" : "after"; }

Regime parse_regime(std::string_view text) {
  const std::string t = lower(text);
  if (t == "before") return Regime::Before;
  if (t == "after") return Regime::After;
  throw ParseError("regime must be 'before' or 'after', got '" + std::string(text) + "'");
}

void validate_record(const JumpRecord& r) {
  if (r.pre_event_rank < kMinRank || r.pre_event_rank > kMaxRank) {
    throw InvariantError("pre_event_rank " + std::to_string(r.pre_event_rank) + " outside [1, 50]");
  }
  if (!(r.wc_points_before >= 0.0)) throw InvariantError("wc_points_before must be nonnegative");
  if (!(r.round1_style_points >= 0.0 && r.round1_style_points <= 60.0)) {
    throw InvariantError("round1_style_points outside [0, 60]");
  }
  if (r.previous_event_rank && *r.previous_event_rank < 1) {
    throw InvariantError("previous_event_rank must be at least 1");
  }
  if (r.qual_rank_nominal) {
    const int q = *r.qual_rank_nominal;
    if (q < 1) throw InvariantError("qual_rank_nominal must be at least 1");
    const int expected = r.regime == Regime::Before ? q + kPrequalifiedSlots : q;
    if (r.pre_event_rank != expected) {
      throw InvariantError("pre_event_rank " + std::to_string(r.pre_event_rank) +
                           " inconsistent with qual_rank_nominal " + std::to_string(q) + " under regime " +
                           std::string(to_string(r.regime)) + " (expected " + std::to_string(expected) + ")");
    }
  } else if (r.regime == Regime::After) {
    throw InvariantError("qual_rank_nominal is required under regime after");
  } else if (r.pre_event_rank > kPrequalifiedSlots) {
    throw InvariantError("prequalified athlete (no qual_rank_nominal) must have pre_event_rank <= 10");
  }
}

Dataset::Dataset(std::vector<JumpRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {}

Dataset Dataset::filter(const std::function<bool(const JumpRecord&)>& keep, std::string_view note) const {
  std::vector<JumpRecord> out;
  for (const JumpRecord& r : records_) {
    if (keep(r)) out.push_back(r);
  }
  return Dataset(std::move(out), provenance_ + " | " + std::string(note));
}

Dataset Dataset::with_regime(Regime r) const {
  return filter([r](const JumpRecord& rec) { return rec.regime == r; },
                "regime=" + std::string(to_string(r)));
}

bool Dataset::has_regime(Regime r) const {
  return std::any_of(records_.begin(), records_.end(), [r](const JumpRecord& rec) { return rec.regime == r; });
}

std::vector<std::string> check_event_structure(const Dataset& ds) {
  std::map<std::string, std::pair<int, int>> per_event;  // starters, advanced
  for (const JumpRecord& r : ds.records()) {
    auto& e = per_event[r.event_id];
    ++e.first;
    if (r.advanced) ++e.second;
  }
  std::vector<std::string> issues;
  for (const auto& [id, counts] : per_event) {
    if (counts.first != kMaxRank || counts.second != 30) {
      issues.push_back("event " + id + ": " + std::to_string(counts.first) + " starters, " +
                       std::to_string(counts.second) + " advanced");
    }
  }
  return issues;
}

Selector::Selector(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

Selector Selector::by_name(std::string_view name) {
  using R = const JumpRecord&;
  const std::string n(name);
  if (n == "advanced") return {n, [](R r) -> std::optional<double> { return r.advanced ? 1.0 : 0.0; }};
  if (n == "pre_event_rank") return {n, [](R r) -> std::optional<double> { return r.pre_event_rank; }};
  if (n == "qual_rank_nominal") {
    return {n, [](R r) -> std::optional<double> {
              if (!r.qual_rank_nominal) return std::nullopt;
              return *r.qual_rank_nominal;
            }};
  }
  if (n == "round1_total") return {n, [](R r) -> std::optional<double> { return r.round1_total; }};
  if (n == "round1_distance_points") {
    return {n, [](R r) -> std::optional<double> { return r.round1_distance_points; }};
  }
  if (n == "round1_style_points") {
    return {n, [](R r) -> std::optional<double> { return r.round1_style_points; }};
  }
  if (n == "wc_points_before") return {n, [](R r) -> std::optional<double> { return r.wc_points_before; }};
  if (n == "previous_event_rank") {
    return {n, [](R r) -> std::optional<double> {
              if (!r.previous_event_rank) return std::nullopt;
              return *r.previous_event_rank;
            }};
  }
  if (n == "home_event") return {n, [](R r) -> std::optional<double> { return r.home_event ? 1.0 : 0.0; }};
  throw InvalidParameters("unknown variable '" + n + "'");
}

std::vector<std::string> Selector::builtin_names() {
  return {"advanced",         "pre_event_rank",      "qual_rank_nominal", "round1_total",
          "round1_distance_points", "round1_style_points", "wc_points_before", "previous_event_rank",
          "home_event"};
}

std::vector<Selector> parse_selectors(std::string_view list) {
  std::vector<Selector> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(Selector::by_name(item));
    start = end + 1;
  }
  return out;
}

std::string_view to_string(ClusterBy c) noexcept {
  switch (c) {
    case ClusterBy::Athlete: return "athlete_id";
    case ClusterBy::Event: return "event_id";
    case ClusterBy::Observation: return "none";
  }
  return "none";
}

ClusterBy parse_cluster(std::string_view text) {
  const std::string t = lower(text);
  if (t == "athlete" || t == "athlete_id") return ClusterBy::Athlete;
  if (t == "event" || t == "event_id") return ClusterBy::Event;
  if (t == "none" || t == "observation") return ClusterBy::Observation;
  throw InvalidParameters("unknown cluster variable '" + std::string(text) + "'");
}

std::vector<int> cluster_ids(std::span<const JumpRecord> records, ClusterBy by) {
  std::vector<int> ids(records.size());
  if (by == ClusterBy::Observation) {
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;
  }
  std::unordered_map<std::string, int> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string& key = by == ClusterBy::Athlete ? records[i].athlete_id : records[i].event_id;
    auto [it, inserted] = seen.emplace(key, static_cast<int>(seen.size()));
    ids[i] = it->second;
  }
  return ids;
}

}  // namespace cutofflab
