#include "cutofflab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "cutofflab/error.hpp"
#include "cutofflab/rng.hpp"

namespace cutofflab::sim {
namespace {

constexpr std::uint64_t kAbilityStream = 0xab1117ULL;
constexpr std::uint64_t kEventStream = 0xe7e47ULL;

// Per-athlete draws for one event. Every athlete draws every value whether
// or not it is used, so streams never shift with the qualification outcome.
struct Draws {
  double home = 0.0;
  double qual = 0.0;
  double round1 = 0.0;
  double round2 = 0.0;
  double style = 0.0;
};

bool regime_listed(const std::vector<Regime>& list, Regime r) {
  return std::find(list.begin(), list.end(), r) != list.end();
}

std::string athlete_name(int idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "A%03d", idx + 1);
  return buf;
}

std::string event_name(int season, int event) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d-%02d", season, event + 1);
  return buf;
}

}  // namespace

std::string_view to_string(Mode m) noexcept { return m == Mode::ReducedForm ? "reduced_form" : "structural"; }

void SimulationConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidParameters("simulation config: " + what); };
  if (n_seasons < 1) fail("n_seasons must be at least 1");
  if (events_per_season.empty()) fail("events_per_season is empty");
  if (events_per_season.size() != 1 && static_cast<int>(events_per_season.size()) != n_seasons) {
    fail("events_per_season needs 1 or n_seasons entries");
  }
  for (int e : events_per_season) {
    if (e < 1) fail("events_per_season entries must be positive");
  }
  if (regime_schedule.empty()) fail("regime_schedule is empty");
  if (regime_schedule.size() != 1 && static_cast<int>(regime_schedule.size()) != n_seasons) {
    fail("regime_schedule needs 1 or n_seasons entries");
  }
  if (n_qualify != kMaxRank) fail("n_qualify must be 50 (the pre-event rank range)");
  if (n_advance < 1 || n_advance >= n_qualify) fail("n_advance must lie in [1, n_qualify)");
  if (n_entrants < n_qualify + 5) fail("n_entrants must be at least n_qualify + 5");
  if (!(ability_sd >= 0.0) || !(noise_sd >= 0.0)) fail("standard deviations must be nonnegative");
  if (!(home_prob >= 0.0 && home_prob <= 1.0)) fail("home_prob must lie in [0, 1]");
  if (!std::isfinite(injected_effect_tau)) fail("injected_effect_tau must be finite");
  if (std::floor(effect_cutoff) == effect_cutoff) fail("effect_cutoff must be a non-integer boundary");
  for (const ExtraEffect& e : extra_effects) {
    if (std::floor(e.cutoff) == e.cutoff || !std::isfinite(e.tau)) fail("extra effect needs a half-integer cutoff");
  }
  if (burn_in_seasons < 0) fail("burn_in_seasons must be nonnegative");
  if (mode == Mode::Structural) {
    structural_params.validate();
    if (!(structural_decay_width > 0.0)) fail("structural_decay_width must be positive");
  }
}

int SimulationConfig::events_in_season(int season_index) const {
  return events_per_season.size() == 1 ? events_per_season.front()
                                       : events_per_season[static_cast<std::size_t>(season_index)];
}

Regime SimulationConfig::regime_of_season(int season_index) const {
  return regime_schedule.size() == 1 ? regime_schedule.front()
                                     : regime_schedule[static_cast<std::size_t>(season_index)];
}

int regime_rank_map(Regime regime, int nominal_rank, bool prequalified, std::optional<int> wc_standing_position) {
  if (prequalified) {
    if (regime == Regime::After) throw InvalidParameters("no prequalification under the After regime");
    if (!wc_standing_position || *wc_standing_position < 1 || *wc_standing_position > kPrequalifiedSlots) {
      throw InvalidParameters("prequalified athletes need a standing position in 1..10");
    }
    return *wc_standing_position;
  }
  if (nominal_rank < 1) throw InvalidParameters("nominal rank must be at least 1");
  const int rank = regime == Regime::Before ? nominal_rank + kPrequalifiedSlots : nominal_rank;
  if (rank > kMaxRank) throw InvalidParameters("mapped rank " + std::to_string(rank) + " exceeds " + std::to_string(kMaxRank));
  return rank;
}

double structural_effort_boost(const contest::ContestParams& params, int rank, double cutoff, double decay_width) {
  if (!(decay_width > 0.0)) throw InvalidParameters("structural_effort_boost: decay width must be positive");
  const contest::EquilibriumSolution sol = contest::solve_equilibrium(params);
  const double gap = sol.effort1_derived - sol.effort2_derived;
  const double fade = std::max(0.0, 1.0 - std::fabs(rank - cutoff) / decay_width);
  const double sign = rank <= static_cast<int>(std::floor(cutoff)) ? 1.0 : -1.0;
  return sign * gap * fade;
}

Dataset simulate_dataset(const SimulationConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_entrants;
  std::vector<double> ability(static_cast<std::size_t>(n));
  {
    Engine eng = substream(cfg.seed, {kAbilityStream});
    for (double& a : ability) a = cfg.ability_sd * standard_normal(eng);
  }

  std::vector<double> season_points(static_cast<std::size_t>(n), 0.0);
  std::vector<double> last_season_points(static_cast<std::size_t>(n), 0.0);
  std::vector<std::optional<int>> last_rank(static_cast<std::size_t>(n));
  std::vector<JumpRecord> records;

  const int total_seasons = cfg.burn_in_seasons + cfg.n_seasons;
  for (int si = 0; si < total_seasons; ++si) {
    const bool recorded = si >= cfg.burn_in_seasons;
    const int season_index = std::max(0, si - cfg.burn_in_seasons);
    const Regime regime = cfg.regime_of_season(season_index);
    const int season_label = cfg.first_season + si - cfg.burn_in_seasons;
    const int events = cfg.events_in_season(season_index);

    last_season_points = season_points;
    std::fill(season_points.begin(), season_points.end(), 0.0);
    std::fill(last_rank.begin(), last_rank.end(), std::nullopt);

    for (int ev = 0; ev < events; ++ev) {
      Engine eng = substream(cfg.seed, {kEventStream, static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(ev)});
      std::vector<Draws> draws(static_cast<std::size_t>(n));
      for (Draws& d : draws) {
        d.home = uniform01(eng);
        d.qual = standard_normal(eng);
        d.round1 = standard_normal(eng);
        d.round2 = standard_normal(eng);
        d.style = standard_normal(eng);
      }

      // Standing before this event; the opener uses last season's final table.
      const std::vector<double>& standing = ev == 0 ? last_season_points : season_points;
      std::vector<int> by_standing(static_cast<std::size_t>(n));
      std::iota(by_standing.begin(), by_standing.end(), 0);
      std::stable_sort(by_standing.begin(), by_standing.end(), [&](int a, int b) {
        if (standing[a] != standing[b]) return standing[a] > standing[b];
        return last_season_points[a] > last_season_points[b];
      });

      // Qualification.
      std::vector<int> eff_rank(static_cast<std::size_t>(n), 0);  // 0 = did not start
      std::vector<std::optional<int>> nominal(static_cast<std::size_t>(n));
      std::vector<int> qualifiers;
      std::vector<char> prequalified(static_cast<std::size_t>(n), 0);
      if (regime == Regime::Before) {
        for (int k = 0; k < kPrequalifiedSlots; ++k) {
          const int a = by_standing[static_cast<std::size_t>(k)];
          prequalified[a] = 1;
          eff_rank[a] = regime_rank_map(regime, 0, true, k + 1);
        }
      }
      for (int a = 0; a < n; ++a) {
        if (!prequalified[a]) qualifiers.push_back(a);
      }
      auto qual_score = [&](int a) { return ability[a] + cfg.noise_sd * draws[a].qual; };
      std::stable_sort(qualifiers.begin(), qualifiers.end(),
                       [&](int a, int b) { return qual_score(a) > qual_score(b); });
      const int slots = cfg.n_qualify - (regime == Regime::Before ? kPrequalifiedSlots : 0);
      for (int k = 0; k < slots; ++k) {
        const int a = qualifiers[static_cast<std::size_t>(k)];
        nominal[a] = k + 1;
        eff_rank[a] = regime_rank_map(regime, k + 1, false);
      }

      // Round 1.
      std::vector<int> starters;
      for (int a = 0; a < n; ++a) {
        if (eff_rank[a] > 0) starters.push_back(a);
      }
      std::sort(starters.begin(), starters.end(), [&](int a, int b) { return eff_rank[a] < eff_rank[b]; });
      std::vector<double> shift(static_cast<std::size_t>(n), 0.0);
      for (int a : starters) {
        const int r = eff_rank[a];
        double s = 0.0;
        if (cfg.mode == Mode::ReducedForm) {
          if (regime_listed(cfg.effect_regimes, regime) && r <= static_cast<int>(std::floor(cfg.effect_cutoff))) {
            s += cfg.injected_effect_tau;
          }
        } else {
          contest::ContestParams p = cfg.structural_params;
          p.salience = regime == Regime::After ? 1 : 0;
          s += structural_effort_boost(p, r, cfg.effect_cutoff, cfg.structural_decay_width);
        }
        for (const ExtraEffect& e : cfg.extra_effects) {
          if ((e.regimes.empty() || regime_listed(e.regimes, regime)) && r <= static_cast<int>(std::floor(e.cutoff))) {
            s += e.tau;
          }
        }
        shift[a] = s;
      }
      auto round1 = [&](int a) { return ability[a] + cfg.noise_sd * draws[a].round1 + shift[a]; };
      std::vector<int> r1_order = starters;
      std::stable_sort(r1_order.begin(), r1_order.end(), [&](int a, int b) { return round1(a) > round1(b); });
      std::vector<char> advanced(static_cast<std::size_t>(n), 0);
      for (int k = 0; k < cfg.n_advance; ++k) advanced[r1_order[static_cast<std::size_t>(k)]] = 1;

      // Final ranking: advancers by two-round total, the rest by Round 1.
      std::vector<int> finalists(r1_order.begin(), r1_order.begin() + cfg.n_advance);
      auto final_score = [&](int a) { return round1(a) + ability[a] + cfg.noise_sd * draws[a].round2; };
      std::stable_sort(finalists.begin(), finalists.end(),
                       [&](int a, int b) { return final_score(a) > final_score(b); });
      std::vector<int> final_rank(static_cast<std::size_t>(n), cfg.n_qualify + 1);
      for (std::size_t k = 0; k < finalists.size(); ++k) final_rank[finalists[k]] = static_cast<int>(k) + 1;
      for (std::size_t k = static_cast<std::size_t>(cfg.n_advance); k < r1_order.size(); ++k) {
        final_rank[r1_order[k]] = static_cast<int>(k) + 1;
      }

      if (recorded) {
        const std::string event_id = event_name(season_label, ev);
        for (int a : starters) {
          JumpRecord rec;
          rec.athlete_id = athlete_name(a);
          rec.event_id = event_id;
          rec.season = season_label;
          rec.regime = regime;
          rec.qual_rank_nominal = nominal[a];
          rec.pre_event_rank = eff_rank[a];
          // Points scale: ~110 for an average jump; style marks capped at 60.
          const double perf = round1(a);
          rec.round1_style_points = std::clamp(54.0 + 1.5 * perf + 0.8 * draws[a].style, 0.0, 60.0);
          rec.round1_distance_points = std::max(0.0, 110.0 + 12.0 * perf - rec.round1_style_points);
          rec.round1_total = rec.round1_distance_points + rec.round1_style_points;
          rec.advanced = advanced[a] != 0;
          rec.wc_points_before = standing[a];
          rec.previous_event_rank = last_rank[a];
          rec.home_event = draws[a].home < cfg.home_prob;
          records.push_back(std::move(rec));
        }
      }

      for (int a = 0; a < n; ++a) {
        season_points[a] += std::max(0, 31 - final_rank[a]);
        last_rank[a] = final_rank[a];
      }
    }
  }
  return Dataset(std::move(records), "simulated (seed " + std::to_string(cfg.seed) + ")");
}

namespace {

std::vector<Regime> regimes_from_json(const nlohmann::json& j, const char* key) {
  std::vector<Regime> out;
  if (j.is_string()) {
    out.push_back(parse_regime(j.get<std::string>()));
    return out;
  }
  if (!j.is_array()) throw ParseError(std::string("config key '") + key + "' must be a list of regimes");
  for (const auto& x : j) out.push_back(parse_regime(x.get<std::string>()));
  return out;
}

nlohmann::json regimes_to_json(const std::vector<Regime>& rs) {
  nlohmann::json out = nlohmann::json::array();
  for (Regime r : rs) out.push_back(std::string(to_string(r)));
  return out;
}

}  // namespace

SimulationConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("simulation config must be a JSON object");
  SimulationConfig c;
  static const std::set<std::string> known = {
      "n_seasons",         "first_season",     "events_per_season", "n_entrants",
      "n_qualify",         "n_advance",        "regime_schedule",   "ability_sd",
      "noise_sd",          "injected_effect_tau", "effect_regimes", "effect_cutoff",
      "extra_effects",     "mode",             "structural_params", "structural_decay_width",
      "home_prob",         "burn_in_seasons",  "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw SchemaError("unknown simulation config key '" + key + "'");
  }
  try {
    if (j.contains("n_seasons")) c.n_seasons = j.at("n_seasons").get<int>();
    if (j.contains("first_season")) c.first_season = j.at("first_season").get<int>();
    if (j.contains("events_per_season")) {
      const auto& e = j.at("events_per_season");
      c.events_per_season = e.is_array() ? e.get<std::vector<int>>() : std::vector<int>{e.get<int>()};
    }
    if (j.contains("n_entrants")) c.n_entrants = j.at("n_entrants").get<int>();
    if (j.contains("n_qualify")) c.n_qualify = j.at("n_qualify").get<int>();
    if (j.contains("n_advance")) c.n_advance = j.at("n_advance").get<int>();
    if (j.contains("regime_schedule")) c.regime_schedule = regimes_from_json(j.at("regime_schedule"), "regime_schedule");
    if (j.contains("ability_sd")) c.ability_sd = j.at("ability_sd").get<double>();
    if (j.contains("noise_sd")) c.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("injected_effect_tau")) c.injected_effect_tau = j.at("injected_effect_tau").get<double>();
    if (j.contains("effect_regimes")) c.effect_regimes = regimes_from_json(j.at("effect_regimes"), "effect_regimes");
    if (j.contains("effect_cutoff")) c.effect_cutoff = j.at("effect_cutoff").get<double>();
    if (j.contains("extra_effects")) {
      c.extra_effects.clear();
      for (const auto& e : j.at("extra_effects")) {
        ExtraEffect x;
        x.cutoff = e.at("cutoff").get<double>();
        x.tau = e.at("tau").get<double>();
        if (e.contains("regimes")) x.regimes = regimes_from_json(e.at("regimes"), "extra_effects.regimes");
        c.extra_effects.push_back(x);
      }
    }
    if (j.contains("mode")) {
      const std::string m = j.at("mode").get<std::string>();
      if (m == "reduced_form") {
        c.mode = Mode::ReducedForm;
      } else if (m == "structural") {
        c.mode = Mode::Structural;
      } else {
        throw ParseError("mode must be 'reduced_form' or 'structural'");
      }
    }
    if (j.contains("structural_params")) {
      const auto& p = j.at("structural_params");
      c.structural_params.prize = p.value("W", c.structural_params.prize);
      c.structural_params.loss_penalty = p.value("d", c.structural_params.loss_penalty);
      c.structural_params.win_bonus = p.value("u", c.structural_params.win_bonus);
      c.structural_params.salience = p.value("s", c.structural_params.salience);
    }
    if (j.contains("structural_decay_width")) c.structural_decay_width = j.at("structural_decay_width").get<double>();
    if (j.contains("home_prob")) c.home_prob = j.at("home_prob").get<double>();
    if (j.contains("burn_in_seasons")) c.burn_in_seasons = j.at("burn_in_seasons").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("simulation config: ") + e.what());
  }
  return c;
}

nlohmann::json config_to_json(const SimulationConfig& c) {
  nlohmann::json j;
  j["n_seasons"] = c.n_seasons;
  j["first_season"] = c.first_season;
  j["events_per_season"] = c.events_per_season;
  j["n_entrants"] = c.n_entrants;
  j["n_qualify"] = c.n_qualify;
  j["n_advance"] = c.n_advance;
  j["regime_schedule"] = regimes_to_json(c.regime_schedule);
  j["ability_sd"] = c.ability_sd;
  j["noise_sd"] = c.noise_sd;
  j["injected_effect_tau"] = c.injected_effect_tau;
  j["effect_regimes"] = regimes_to_json(c.effect_regimes);
  j["effect_cutoff"] = c.effect_cutoff;
  nlohmann::json extras = nlohmann::json::array();
  for (const ExtraEffect& e : c.extra_effects) {
    extras.push_back({{"cutoff", e.cutoff}, {"tau", e.tau}, {"regimes", regimes_to_json(e.regimes)}});
  }
  j["extra_effects"] = extras;
  j["mode"] = std::string(to_string(c.mode));
  j["structural_params"] = {{"W", c.structural_params.prize},
                            {"d", c.structural_params.loss_penalty},
                            {"u", c.structural_params.win_bonus},
                            {"s", c.structural_params.salience}};
  j["structural_decay_width"] = c.structural_decay_width;
  j["home_prob"] = c.home_prob;
  j["burn_in_seasons"] = c.burn_in_seasons;
  j["seed"] = c.seed;
  return j;
}

}  // namespace cutofflab::sim
