#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cutofflab/cli/commands.hpp"
#include "cutofflab/data_model.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace cutofflab;
using namespace cutofflab::cli;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cutofflab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("CUTOFFLAB_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("CUTOFFLAB_SEED");
  }

  int cli(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path small_config() {
    const fs::path p = dir_ / "small.json";
    std::ofstream(p) << R"({"n_seasons": 2, "events_per_season": [6], "regime_schedule": ["before", "after"], "seed": 11})";
    return p;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST(Digest, KnownVectorAndKeyOrder) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto a = nlohmann::json::parse(R"({"b": 1, "a": [1, 2], "c": {"y": 1, "x": 2}})");
  const auto b = nlohmann::json::parse(R"({"c": {"x": 2, "y": 1}, "a": [1, 2], "b": 1})");
  EXPECT_EQ(config_digest(a), config_digest(b));
}

TEST_F(CliTest, SimulateDefaultScale) {
  const fs::path csv = dir_ / "sim.csv";
  ASSERT_EQ(cli({"simulate", "--out", csv.string()}), kOk) << err_.str();
  const auto ds = load_csv(csv).dataset;
  EXPECT_EQ(ds.size(), (53u + 44u) * 50u);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "sim.manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["output_paths"].size(), 1u);
  EXPECT_EQ(manifest["output_paths"][0]["sha256"], sha256_file(csv));
  EXPECT_EQ(manifest["seed"], 20240601u);
}

TEST_F(CliTest, SimulateIsByteIdenticalAndSeedOverridable) {
  const auto cfg = small_config();
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir_ / "a.csv").string()}), kOk);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir_ / "b.csv").string()}), kOk);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  setenv("CUTOFFLAB_SEED", "12345", 1);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir_ / "c.csv").string()}), kOk);
  EXPECT_NE(slurp(dir_ / "a.csv"), slurp(dir_ / "c.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "c.manifest.json"))["seed"], 12345u);
  setenv("CUTOFFLAB_SEED", "abc", 1);
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir_ / "d.csv").string()}), kConfigError);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli({"simulate", "--config", (dir_ / "missing.json").string(), "--out", (dir_ / "x.csv").string()}),
            kConfigError);
  EXPECT_EQ(cmd_simulate({dir_ / "missing.json", dir_ / "x.csv"}, out_, err_), kConfigError);
  EXPECT_NE(err_.str().find("missing.json"), std::string::npos);
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"n_sesons": 3})";
  EXPECT_EQ(cli({"simulate", "--config", bad.string(), "--out", (dir_ / "x.csv").string()}), kConfigError);
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(cli({"simulate", "--config", bad.string(), "--out", (dir_ / "x.csv").string()}), kConfigError);
  EXPECT_EQ(cli({"estimate", "--bogus"}), kConfigError);
  EXPECT_EQ(cli({}), kConfigError);
}

TEST_F(CliTest, IoErrorExitsOne) {
  const fs::path blocker = dir_ / "file";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(cli({"simulate", "--out", (blocker / "sub" / "x.csv").string()}), kIoError);
  EXPECT_EQ(cli({"estimate", "--data", (dir_ / "nothing.csv").string()}), kIoError);
}

TEST_F(CliTest, EstimateMethodsAndOutputs) {
  const fs::path csv = dir_ / "sim.csv";
  ASSERT_EQ(cli({"simulate", "--config", small_config().string(), "--out", csv.string()}), kOk);

  ASSERT_EQ(cli({"estimate", "--data", csv.string(), "--regime", "after", "--window", "30:31", "--permutations",
                 "500", "--out", (dir_ / "local").string()}),
            kOk)
      << err_.str();
  EXPECT_NE(out_.str().find("Point estimate"), std::string::npos);
  EXPECT_NE(out_.str().find("[30, 31]"), std::string::npos);
  const auto local = nlohmann::json::parse(slurp(dir_ / "local.json"));
  EXPECT_EQ(local["results"][0]["n_treated"], 6u);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "local.manifest.json"));
  EXPECT_EQ(manifest["output_paths"].size(), 2u);
  EXPECT_EQ(manifest["input_paths"][0]["path"], csv.string());

  ASSERT_EQ(cli({"estimate", "--data", csv.string(), "--regime", "after", "--method", "continuity", "--covariates",
                 "wc_points_before,home_event", "--json"}),
            kOk)
      << err_.str();
  const auto cont = nlohmann::json::parse(out_.str());
  ASSERT_EQ(cont["results"].size(), 2u);
  EXPECT_EQ(cont["results"][1]["covariates_used"].size(), 2u);

  ASSERT_EQ(cli({"estimate", "--data", csv.string(), "--method", "diffdisc"}), kOk) << err_.str();
  EXPECT_NE(out_.str().find("conventional"), std::string::npos);
  EXPECT_EQ(cli({"estimate", "--data", csv.string(), "--method", "diffdisc", "--regime", "after"}), kConfigError);
  EXPECT_EQ(cli({"estimate", "--data", csv.string(), "--method", "rdd"}), kConfigError);
  EXPECT_EQ(cli({"estimate", "--data", csv.string(), "--window", "31:33"}), kConfigError);
}

TEST_F(CliTest, TextAndJsonCarrySameNumbers) {
  const fs::path csv = dir_ / "sim.csv";
  ASSERT_EQ(cli({"simulate", "--config", small_config().string(), "--out", csv.string()}), kOk);
  ASSERT_EQ(cli({"estimate", "--data", csv.string(), "--regime", "after", "--permutations", "200", "--out",
                 (dir_ / "r").string()}),
            kOk);
  const auto j = nlohmann::json::parse(slurp(dir_ / "r.json"));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", j["results"][0]["estimate"].get<double>());
  EXPECT_NE(slurp(dir_ / "r.txt").find(buf), std::string::npos);
}

TEST_F(CliTest, EstimationErrorExitsThree) {
  const fs::path csv = dir_ / "sim.csv";
  ASSERT_EQ(cli({"simulate", "--config", small_config().string(), "--out", csv.string()}), kOk);
  const auto ds = load_csv(csv).dataset.filter([](const JumpRecord& r) { return r.pre_event_rank <= 30; }, "treated");
  write_csv(ds, dir_ / "treated.csv");
  EXPECT_EQ(cli({"estimate", "--data", (dir_ / "treated.csv").string(), "--window", "30:31"}), kEstimationError);
  EXPECT_NE(err_.str().find("empty"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ValidateReport) {
  const fs::path csv = dir_ / "sim.csv";
  ASSERT_EQ(cli({"simulate", "--config", small_config().string(), "--out", csv.string()}), kOk);
  ASSERT_EQ(cli({"validate", "--data", csv.string(), "--regime", "after", "--window", "30:31", "--permutations", "300",
                 "--bandwidth", "8", "--out", (dir_ / "val").string()}),
            kOk)
      << err_.str();
  const auto rep = nlohmann::json::parse(slurp(dir_ / "val.json"));
  ASSERT_EQ(rep["reports"].size(), 1u);
  const auto& r = rep["reports"][0];
  ASSERT_EQ(r["placebo_rows"].size(), 2u);
  EXPECT_DOUBLE_EQ(r["placebo_rows"][0]["cutoff"].get<double>(), 20.5);
  EXPECT_DOUBLE_EQ(r["placebo_rows"][1]["cutoff"].get<double>(), 40.5);
  EXPECT_EQ(r["balance_rows"].size(), 3u);
  EXPECT_EQ(r["frequency_rows"].size(), 10u);
  EXPECT_DOUBLE_EQ(r["density_tests"][0]["p_value"].get<double>(), 1.0);
}

TEST_F(CliTest, EquilibriumAndFigure1) {
  ASSERT_EQ(cli({"equilibrium", "--json"}), kOk);
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_DOUBLE_EQ(j.at("solution").at("p1").get<double>(), 0.75);
  EXPECT_TRUE(j.at("verification").at("passed").get<bool>());
  ASSERT_EQ(cli({"equilibrium", "--figure1", "--out", (dir_ / "fig1.csv").string()}), kOk);
  const std::string csv = slurp(dir_ / "fig1.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,baseline,pos_expect,neg_expect");
  EXPECT_EQ(cli({"equilibrium", "--prize", "0"}), kConfigError);
}

TEST_F(CliTest, ReplicateArtifactsAndDigest) {
  const auto cfg = small_config();
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  ASSERT_EQ(cli({"replicate", "--config", cfg.string(), "--out", a.string(), "--permutations", "300", "--threads", "1"}),
            kOk)
      << err_.str();
  ASSERT_EQ(cli({"replicate", "--config", cfg.string(), "--out", b.string(), "--permutations", "300", "--threads", "3"}),
            kOk)
      << err_.str();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) files += e.is_regular_file();
  EXPECT_GE(files, 10u);
  EXPECT_EQ(replicate_summary_digest(a), replicate_summary_digest(b));
  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(summary["summary_digest"], replicate_summary_digest(a));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["output_paths"].size(), files - 1);  // every artifact but the manifest itself
}
