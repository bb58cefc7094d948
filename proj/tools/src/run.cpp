#include <ostream>

#include "CLI11.hpp"
#include "cutofflab/cli/commands.hpp"

namespace cutofflab::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cutofflab: reference-point contests and rank-cutoff RD toolkit", "cutofflab"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic multi-season dataset");
  s->add_option("--config", sim.config, "JSON config with SimulationConfig keys")->check(CLI::ExistingFile.description(""));
  s->add_option("--out", sim.out_csv, "Output CSV path")->required();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "RD estimates at the advancement cutoff");
  e->add_option("--data", est.data, "Input CSV")->required();
  e->add_option("--outcome", est.outcome, "Outcome column")->capture_default_str();
  e->add_option("--method", est.method, "local | continuity | diffdisc")
      ->check(CLI::IsMember({"local", "continuity", "diffdisc"}))
      ->capture_default_str();
  e->add_option("--cutoff", est.cutoff, "Half-integer cutoff")->capture_default_str();
  e->add_option("--window", est.windows, "Window lo:hi (repeatable or comma separated)")->delimiter(',');
  e->add_flag("--auto-window", est.auto_window, "Select the window by covariate balance");
  e->add_option("--balance-covariates", est.balance_covariates, "Covariates for --auto-window")->capture_default_str();
  e->add_option("--threshold", est.threshold, "Balance threshold for --auto-window")->capture_default_str();
  e->add_option("--bandwidth", est.bandwidth, "Fixed bandwidth h (default MSE-optimal)");
  e->add_option("--covariates", est.covariates, "Adjustment covariates (continuity, diffdisc)");
  e->add_option("--cluster", est.cluster, "athlete | event | observation")->capture_default_str();
  e->add_option("--permutations", est.permutations, "Fisher permutations")->capture_default_str();
  e->add_option("--seed", est.seed, "Permutation seed")->capture_default_str();
  e->add_option("--regime", est.regime, "Restrict to before | after");
  e->add_option("--out", est.out, "Output prefix for .json/.txt/.manifest.json");
  e->add_flag("--json", est.json_stdout, "Print JSON instead of the text table");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Balance, density, placebo and frequency checks");
  v->add_option("--data", val.data, "Input CSV")->required();
  v->add_option("--cutoff", val.cutoff, "Half-integer cutoff")->capture_default_str();
  v->add_option("--covariates", val.covariates, "Predetermined covariates")->capture_default_str();
  v->add_option("--outcome", val.outcome, "Outcome for placebo cutoffs")->capture_default_str();
  v->add_option("--window", val.windows, "Window lo:hi (default: smallest and selected)")->delimiter(',');
  v->add_option("--threshold", val.threshold, "Balance threshold for window selection")->capture_default_str();
  v->add_option("--placebo-cutoffs", val.placebo_cutoffs, "Placebo cutoffs")->delimiter(',')->capture_default_str();
  v->add_option("--bandwidth", val.bandwidth, "Fixed bandwidth h (default MSE-optimal)");
  v->add_option("--cluster", val.cluster, "athlete | event | observation")->capture_default_str();
  v->add_option("--permutations", val.permutations, "Fisher permutations")->capture_default_str();
  v->add_option("--seed", val.seed, "Permutation seed")->capture_default_str();
  v->add_option("--regime", val.regime, "Restrict to before | after");
  v->add_option("--out", val.out, "Output prefix for .json/.txt/.manifest.json");
  v->add_flag("--json", val.json_stdout, "Print JSON instead of text tables");

  ReplicateArgs rep;
  auto* r = app.add_subcommand("replicate", "End-to-end pipeline on simulated data");
  r->add_option("--config", rep.config, "JSON config with SimulationConfig keys")->check(CLI::ExistingFile.description(""));
  r->add_option("--out", rep.out_dir, "Output directory")->required();
  r->add_option("--permutations", rep.permutations, "Fisher permutations")->capture_default_str();
  r->add_option("--threads", rep.threads, "Worker threads (default CUTOFFLAB_THREADS or all cores)");

  EquilibriumArgs eq;
  auto* q = app.add_subcommand("equilibrium", "Contest equilibrium and value-function series");
  q->add_option("--prize", eq.prize, "W > 0")->capture_default_str();
  q->add_option("--loss-penalty", eq.loss_penalty, "d >= u")->capture_default_str();
  q->add_option("--win-bonus", eq.win_bonus, "u >= 0")->capture_default_str();
  q->add_option("--salience", eq.salience, "0 or 1")->capture_default_str();
  q->add_option("--grid", eq.grid_points, "Verification grid points")->capture_default_str();
  q->add_flag("--figure1", eq.figure1, "Emit value-function series as CSV");
  q->add_option("--loss-slope", eq.baseline_loss_slope, "Baseline loss slope (--figure1)")->capture_default_str();
  q->add_option("--x-min", eq.x_min, "Lower end of x (--figure1)")->capture_default_str();
  q->add_option("--x-max", eq.x_max, "Upper end of x (--figure1)")->capture_default_str();
  q->add_option("--points", eq.points, "Number of x values (--figure1)")->capture_default_str();
  q->add_option("--out", eq.out, "Output file");
  q->add_flag("--json", eq.json_stdout, "Print JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    // Missing --config files surface here through the ExistingFile check.
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (s->parsed()) return cmd_simulate(sim, out, err);
  if (e->parsed()) return cmd_estimate(est, out, err);
  if (v->parsed()) return cmd_validate(val, out, err);
  if (r->parsed()) return cmd_replicate(rep, out, err);
  return cmd_equilibrium(eq, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("cutofflab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cutofflab::cli
