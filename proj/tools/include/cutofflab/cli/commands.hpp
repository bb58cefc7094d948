#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cutofflab::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,  ///< bad flags, config or input data
  kEstimationError = 3,
};

/// Hex SHA-256 of a byte string / file contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Digest of a JSON value serialized with sorted keys, so key order in the
/// source file does not matter.
std::string config_digest(const nlohmann::json& resolved);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<std::filesystem::path> input_paths;
  std::vector<std::filesystem::path> output_paths;
  std::string tool_version;
  /// ISO-8601 UTC; taken from SOURCE_DATE_EPOCH when set.
  std::string timestamp;

  /// Output paths carry their SHA-256 at the time of the call.
  nlohmann::json to_json() const;
};

RunManifest make_manifest(std::string command, nlohmann::json config, std::uint64_t seed);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

std::string tool_version();

/// Seed from CUTOFFLAB_SEED when set; throws InvalidParameters when it is
/// not an unsigned integer.
std::optional<std::uint64_t> seed_from_env();

struct SimulateArgs {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_csv;
};

struct EstimateArgs {
  std::filesystem::path data;
  std::string outcome = "advanced";
  std::string method = "local";  ///< local | continuity | diffdisc
  double cutoff = 30.5;
  std::vector<std::string> windows;  ///< "lo:hi"; empty selects [floor(c), ceil(c)]
  bool auto_window = false;
  std::string balance_covariates = "wc_points_before,home_event,previous_event_rank";
  double threshold = 0.15;
  std::optional<double> bandwidth;
  std::string covariates;
  std::string cluster = "athlete";
  std::size_t permutations = 10000;
  std::uint64_t seed = 20240601;
  std::optional<std::string> regime;
  std::optional<std::filesystem::path> out;  ///< prefix for .json/.txt/.manifest.json
  bool json_stdout = false;
};

struct ValidateArgs {
  std::filesystem::path data;
  double cutoff = 30.5;
  std::string covariates = "wc_points_before,home_event,previous_event_rank";
  std::string outcome = "advanced";
  std::vector<std::string> windows;
  double threshold = 0.15;
  std::vector<double> placebo_cutoffs = {20.5, 40.5};
  std::optional<double> bandwidth;
  std::string cluster = "athlete";
  std::size_t permutations = 10000;
  std::uint64_t seed = 20240601;
  std::optional<std::string> regime;
  std::optional<std::filesystem::path> out;
  bool json_stdout = false;
};

struct ReplicateArgs {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
  std::size_t permutations = 2000;
  std::optional<std::size_t> threads;
};

struct EquilibriumArgs {
  double prize = 1.0;
  double loss_penalty = 1.0;
  double win_bonus = 0.0;
  int salience = 1;
  std::size_t grid_points = 200;
  bool figure1 = false;
  double baseline_loss_slope = 2.0;
  double x_min = -2.0;
  double x_max = 2.0;
  std::size_t points = 201;
  std::optional<std::filesystem::path> out;
  bool json_stdout = false;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err);
int cmd_replicate(const ReplicateArgs& args, std::ostream& out, std::ostream& err);
int cmd_equilibrium(const EquilibriumArgs& args, std::ostream& out, std::ostream& err);

/// Summary digest written by cmd_replicate: SHA-256 over the sorted list of
/// (artifact name, artifact SHA-256) pairs, manifests excluded.
std::string replicate_summary_digest(const std::filesystem::path& out_dir);

/// Parses argv (argv[0] is the program name) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cutofflab::cli
