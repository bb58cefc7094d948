#include <gtest/gtest.h>

#include <map>
#include <set>

#include "cutofflab/error.hpp"
#include "cutofflab/simulator.hpp"

using namespace cutofflab;
using namespace cutofflab::sim;

namespace {

SimulationConfig small_config() {
  SimulationConfig c;
  c.n_seasons = 2;
  c.events_per_season = {4};
  c.regime_schedule = {Regime::Before, Regime::After};
  return c;
}

}  // namespace

TEST(RankMap, RegimeOffsets) {
  EXPECT_EQ(regime_rank_map(Regime::Before, 20, false), 30);
  EXPECT_EQ(regime_rank_map(Regime::Before, 1, false), 11);
  EXPECT_EQ(regime_rank_map(Regime::Before, 40, false), 50);
  EXPECT_EQ(regime_rank_map(Regime::After, 20, false), 20);
  for (int k = 1; k <= 10; ++k) EXPECT_EQ(regime_rank_map(Regime::Before, 0, true, k), k);
  EXPECT_THROW(regime_rank_map(Regime::After, 3, true, 3), InvalidParameters);
  EXPECT_THROW(regime_rank_map(Regime::Before, 0, true, 11), InvalidParameters);
  EXPECT_THROW(regime_rank_map(Regime::Before, 0, true), InvalidParameters);
  EXPECT_THROW(regime_rank_map(Regime::Before, 41, false), InvalidParameters);
}

TEST(StructuralBoost, EquilibriumEffortGapFaded) {
  const contest::ContestParams p{1.0, 1.0, 0.0, 1};
  EXPECT_NEAR(structural_effort_boost(p, 30, 30.5, 6.0), 0.25 * (1.0 - 0.5 / 6.0), 1e-12);
  EXPECT_NEAR(structural_effort_boost(p, 30, 30.5, 6.0), 0.229, 5e-4);
  EXPECT_NEAR(structural_effort_boost(p, 31, 30.5, 6.0), -0.229, 5e-4);
  EXPECT_DOUBLE_EQ(structural_effort_boost(p, 10, 30.5, 6.0), 0.0);
  EXPECT_DOUBLE_EQ(structural_effort_boost({1.0, 1.0, 0.0, 0}, 30, 30.5, 6.0), 0.0);
}

TEST(Simulate, EventStructure) {
  const auto ds = simulate_dataset(small_config());
  EXPECT_EQ(ds.size(), 8u * 50u);
  EXPECT_TRUE(check_event_structure(ds).empty());
  std::map<std::string, std::set<int>> ranks;
  std::map<std::string, int> advancers;
  for (const auto& r : ds.records()) {
    EXPECT_NO_THROW(validate_record(r));
    ranks[r.event_id].insert(r.pre_event_rank);
    advancers[r.event_id] += r.advanced;
  }
  for (const auto& [ev, rs] : ranks) {
    EXPECT_EQ(rs.size(), 50u) << ev;
    EXPECT_EQ(*rs.begin(), 1);
    EXPECT_EQ(*rs.rbegin(), 50);
    EXPECT_EQ(advancers[ev], 30) << ev;
  }
}

TEST(Simulate, BeforeRegimePrequalifiesTopTen) {
  const auto ds = simulate_dataset(small_config());
  for (const auto& r : ds.with_regime(Regime::Before).records()) {
    if (r.pre_event_rank <= 10) {
      EXPECT_FALSE(r.qual_rank_nominal.has_value());
    } else {
      EXPECT_EQ(*r.qual_rank_nominal + 10, r.pre_event_rank);
    }
  }
  for (const auto& r : ds.with_regime(Regime::After).records()) EXPECT_EQ(*r.qual_rank_nominal, r.pre_event_rank);
}

TEST(Simulate, DeterministicForSeed) {
  const auto a = simulate_dataset(small_config());
  const auto b = simulate_dataset(small_config());
  EXPECT_EQ(a, b);
  auto other = small_config();
  other.seed += 1;
  EXPECT_FALSE(a == simulate_dataset(other));
}

TEST(Simulate, StructuralModeRuns) {
  auto c = small_config();
  c.mode = Mode::Structural;
  const auto ds = simulate_dataset(c);
  EXPECT_TRUE(check_event_structure(ds).empty());
}

TEST(Simulate, ScoresWithinRange) {
  for (const auto& r : simulate_dataset(small_config()).records()) {
    EXPECT_GE(r.round1_style_points, 0.0);
    EXPECT_LE(r.round1_style_points, 60.0);
    EXPECT_GE(r.round1_distance_points, 0.0);
    EXPECT_NEAR(r.round1_total, r.round1_distance_points + r.round1_style_points, 1e-9);
  }
}

TEST(Config, RejectsInvalid) {
  auto c = small_config();
  c.n_advance = 60;
  EXPECT_THROW(c.validate(), InvalidParameters);
  c = small_config();
  c.events_per_season = {4, 5, 6};
  EXPECT_THROW(c.validate(), InvalidParameters);
}

TEST(Config, JsonRoundTrip) {
  auto c = small_config();
  c.extra_effects.push_back({40.5, 0.5, {Regime::After}});
  c.mode = Mode::Structural;
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(simulate_dataset(back), simulate_dataset(c));
}

TEST(Config, UnknownKeysAndTypeErrors) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"n_sesons", 3}}), SchemaError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"n_seasons", "three"}}), ParseError);
  EXPECT_EQ(config_from_json(nlohmann::json::object()).seed, SimulationConfig{}.seed);
}
