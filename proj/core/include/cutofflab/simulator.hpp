#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutofflab/contest_model.hpp"
#include "cutofflab/data_model.hpp"
#include "json.hpp"

namespace cutofflab::sim {

enum class Mode { ReducedForm, Structural };

/// Additional Round-1 shift for ranks <= floor(cutoff), e.g. a second
/// discontinuity used as a positive control for placebo tests.
struct ExtraEffect {
  double cutoff = 40.5;
  double tau = 0.0;
  std::vector<Regime> regimes;  ///< empty: every regime
};

struct SimulationConfig {
  int n_seasons = 6;
  int first_season = 2015;
  /// One entry per season, or a single entry used for every season.
  std::vector<int> events_per_season = {18, 18, 17, 15, 15, 14};
  int n_entrants = 60;
  int n_qualify = 50;
  int n_advance = 30;
  /// One entry per season, or a single entry used for every season.
  std::vector<Regime> regime_schedule = {Regime::Before, Regime::Before, Regime::Before,
                                         Regime::After,  Regime::After,  Regime::After};
  double ability_sd = 1.0;
  double noise_sd = 1.0;
  /// Round-1 shift for pre-event ranks <= floor(effect_cutoff) in the
  /// regimes listed in effect_regimes (ReducedForm mode).
  double injected_effect_tau = 0.95;
  std::vector<Regime> effect_regimes = {Regime::After};
  double effect_cutoff = 30.5;
  std::vector<ExtraEffect> extra_effects;
  Mode mode = Mode::ReducedForm;
  /// Structural mode: contest parameters whose salience is set per regime
  /// (After = 1, Before = 0), and the rank distance over which the effort
  /// boost fades out.
  contest::ContestParams structural_params{1.0, 1.0, 0.0, 1};
  double structural_decay_width = 6.0;
  double home_prob = 0.11;
  /// Unrecorded warm-up seasons that seed the World Cup standings.
  int burn_in_seasons = 1;
  std::uint64_t seed = 20240601;

  /// Throws InvalidParameters on violated invariants.
  void validate() const;

  int events_in_season(int season_index) const;
  Regime regime_of_season(int season_index) const;
};

/// Effective pre-event rank. Before: prequalified athletes take their World
/// Cup standing position (1-10), qualifiers nominal + 10. After: nominal.
/// Throws InvalidParameters for prequalified athletes under After, or a
/// prequalified athlete without a standing position in 1..10, or a mapped
/// rank above 50.
int regime_rank_map(Regime regime, int nominal_rank, bool prequalified,
                    std::optional<int> wc_standing_position = std::nullopt);

/// Score boost (effort1 - effort2) of the contest equilibrium, + for ranks
/// <= floor(cutoff) and - above, faded by max(0, 1 - |rank - cutoff| /
/// decay_width).
double structural_effort_boost(const contest::ContestParams& params, int rank, double cutoff, double decay_width);

/// Synthetic multi-season dataset. Output is ordered by (season, event,
/// pre-event rank) and depends only on the config.
Dataset simulate_dataset(const SimulationConfig& config);

/// Keys match the SimulationConfig field names. Unknown keys are rejected
/// with SchemaError; type errors raise ParseError.
SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimulationConfig& config);

std::string_view to_string(Mode m) noexcept;

}  // namespace cutofflab::sim
