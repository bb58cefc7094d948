#include "cutofflab/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cutofflab/contest_model.hpp"
#include "cutofflab/data_model.hpp"
#include "cutofflab/error.hpp"
#include "cutofflab/parallel.hpp"
#include "cutofflab/rd_continuity.hpp"
#include "cutofflab/rd_local.hpp"
#include "cutofflab/serialize.hpp"
#include "cutofflab/simulator.hpp"
#include "cutofflab/stats.hpp"
#include "cutofflab/validation.hpp"

namespace cutofflab::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return fs::path(prefix.string() + suffix);
}

sim::SimulationConfig load_config(const std::optional<fs::path>& path) {
  sim::SimulationConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw SchemaError("config file '" + path->string() + "' not found or unreadable");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError("config '" + path->string() + "': " + e.what());
    }
    cfg = sim::config_from_json(j);
  }
  if (auto s = seed_from_env()) cfg.seed = *s;
  cfg.validate();
  return cfg;
}

rd::RdWindow parse_window(const std::string& text, double cutoff) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidParameters("window '" + text + "' must look like lo:hi");
  rd::RdWindow w;
  try {
    w.lower = std::stoi(text.substr(0, colon));
    w.upper = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidParameters("window '" + text + "' must look like lo:hi");
  }
  w.cutoff = cutoff;
  w.validate();
  return w;
}

Dataset load_data(const fs::path& path, const std::optional<std::string>& regime) {
  Dataset ds = load_csv(path).dataset;
  if (regime) ds = ds.with_regime(parse_regime(*regime));
  if (ds.empty()) throw InvalidParameters("no observations in '" + path.string() + "' for the requested regime");
  return ds;
}

std::vector<Selector> selectors_or_empty(const std::string& list) {
  if (list.empty()) return {};
  return parse_selectors(list);
}

void add_unique(std::vector<rd::RdWindow>& ws, const rd::RdWindow& w) {
  if (std::find(ws.begin(), ws.end(), w) == ws.end()) ws.push_back(w);
}

std::string regime_label(Regime r) {
  std::string s(to_string(r));
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// Maps library errors onto the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const EstimationError& e) {
    err << "estimation error: " << e.what() << '\n';
    return kEstimationError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

struct Artifacts {
  fs::path dir;
  std::vector<fs::path> paths;

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    write_text(p, content);
    paths.push_back(p);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
};

json estimate_args_json(const EstimateArgs& a) {
  json j{{"data", a.data.string()},
         {"outcome", a.outcome},
         {"method", a.method},
         {"cutoff", a.cutoff},
         {"windows", a.windows},
         {"auto_window", a.auto_window},
         {"balance_covariates", a.balance_covariates},
         {"threshold", a.threshold},
         {"covariates", a.covariates},
         {"cluster", a.cluster},
         {"permutations", a.permutations},
         {"seed", a.seed}};
  j["bandwidth"] = a.bandwidth ? json(*a.bandwidth) : json(nullptr);
  j["regime"] = a.regime ? json(*a.regime) : json(nullptr);
  return j;
}

json validate_args_json(const ValidateArgs& a) {
  json j{{"data", a.data.string()},   {"cutoff", a.cutoff},         {"covariates", a.covariates},
         {"outcome", a.outcome},       {"windows", a.windows},       {"threshold", a.threshold},
         {"placebo_cutoffs", a.placebo_cutoffs}, {"cluster", a.cluster}, {"permutations", a.permutations},
         {"seed", a.seed}};
  j["bandwidth"] = a.bandwidth ? json(*a.bandwidth) : json(nullptr);
  j["regime"] = a.regime ? json(*a.regime) : json(nullptr);
  return j;
}

// Writes <prefix>.json, <prefix>.txt and <prefix>.manifest.json.
void persist(const fs::path& prefix, const std::string& command, const json& config, std::uint64_t seed,
             const std::vector<fs::path>& inputs, const json& result, const std::string& text) {
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const fs::path jp = with_suffix(prefix, ".json");
  const fs::path tp = with_suffix(prefix, ".txt");
  write_text(jp, result.dump(2) + "\n");
  write_text(tp, text);
  RunManifest m = make_manifest(command, config, seed);
  m.input_paths = inputs;
  m.output_paths = {jp, tp};
  write_manifest(m, with_suffix(prefix, ".manifest.json"));
}

struct ValidationRun {
  std::vector<validation::ValidationReport> reports;
  std::vector<rd::WindowSelection> selections;
};

ValidationRun run_validation(const Dataset& ds, const ValidateArgs& a) {
  const auto covs = parse_selectors(a.covariates);
  rd::FisherOptions fisher;
  fisher.n_permutations = a.permutations;
  fisher.seed = a.seed;
  rd::ContinuityOptions cont;
  cont.cluster = parse_cluster(a.cluster);
  cont.bandwidth = a.bandwidth;

  std::vector<Regime> regimes;
  for (Regime r : {Regime::Before, Regime::After}) {
    if (ds.has_regime(r)) regimes.push_back(r);
  }

  ValidationRun run;
  for (Regime regime : regimes) {
    const Dataset sub = ds.with_regime(regime);
    std::vector<rd::RdWindow> windows;
    if (!a.windows.empty()) {
      for (const auto& w : a.windows) add_unique(windows, parse_window(w, a.cutoff));
    } else {
      rd::WindowSearchOptions ws;
      ws.threshold = a.threshold;
      ws.fisher = fisher;
      const auto sel = rd::select_window(sub, covs, a.cutoff, ws);
      add_unique(windows, rd::RdWindow::symmetric(a.cutoff, 1));
      add_unique(windows, sel.window);
      run.selections.push_back(sel);
    }

    validation::ValidationReport rep;
    rep.regime = std::string(to_string(regime));
    rep.balance_rows = validation::balance_table(sub, covs, windows, cont, fisher);
    for (const auto& w : windows) rep.density_tests.push_back(validation::density_binomial(sub, w));

    validation::PlaceboOptions po;
    po.cutoffs = a.placebo_cutoffs;
    po.half_widths.clear();
    for (const auto& w : windows) po.half_widths.push_back(w.half_width());
    po.balance_covariates = covs;
    po.continuity = cont;
    po.fisher = fisher;
    po.true_cutoff = a.cutoff;
    rep.placebo_rows = validation::placebo_cutoffs(sub, Selector::by_name(a.outcome), po);
    rep.frequency_rows = validation::frequency_table(ds, a.cutoff, 5);
    run.reports.push_back(std::move(rep));
  }
  return run;
}

json validation_json(const ValidationRun& run) {
  json reports = json::array();
  for (const auto& r : run.reports) reports.push_back(io::to_json(r));
  json sels = json::array();
  for (const auto& s : run.selections) sels.push_back(io::to_json(s));
  return {{"reports", reports}, {"window_selection", sels}};
}

std::string validation_text(const ValidationRun& run) {
  std::string text;
  for (const auto& r : run.reports) text += io::render_validation(r) + "\n";
  return text;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const sim::SimulationConfig cfg = load_config(args.config);
    const Dataset ds = sim::simulate_dataset(cfg);
    if (args.out_csv.has_parent_path()) fs::create_directories(args.out_csv.parent_path());
    write_csv(ds, args.out_csv);
    fs::path manifest_path = args.out_csv;
    manifest_path.replace_extension(".manifest.json");
    RunManifest m = make_manifest("simulate", sim::config_to_json(cfg), cfg.seed);
    if (args.config) m.input_paths = {*args.config};
    m.output_paths = {args.out_csv};
    write_manifest(m, manifest_path);
    out << "wrote " << ds.size() << " rows to " << args.out_csv.string() << '\n';
    return kOk;
  });
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (a.method != "local" && a.method != "continuity" && a.method != "diffdisc") {
      throw InvalidParameters("unknown method '" + a.method + "' (local, continuity, diffdisc)");
    }
    if (a.method == "diffdisc" && a.regime) throw InvalidParameters("diffdisc needs both regimes; drop --regime");
    const Dataset ds = load_data(a.data, a.regime);
    const Selector outcome = Selector::by_name(a.outcome);
    const auto covs = selectors_or_empty(a.covariates);
    rd::FisherOptions fisher;
    fisher.n_permutations = a.permutations;
    fisher.seed = a.seed;
    rd::ContinuityOptions cont;
    cont.cluster = parse_cluster(a.cluster);
    cont.bandwidth = a.bandwidth;

    json result{{"method", a.method}, {"outcome", a.outcome}, {"cutoff", a.cutoff}};
    std::string text;
    const std::string title = a.outcome + (a.regime ? " (" + *a.regime + ")" : std::string());

    if (a.method == "local") {
      std::vector<rd::RdWindow> windows;
      for (const auto& w : a.windows) add_unique(windows, parse_window(w, a.cutoff));
      if (a.auto_window) {
        rd::WindowSearchOptions ws;
        ws.threshold = a.threshold;
        ws.fisher = fisher;
        const auto sel = rd::select_window(ds, parse_selectors(a.balance_covariates), a.cutoff, ws);
        result["window_selection"] = io::to_json(sel);
        add_unique(windows, rd::RdWindow::symmetric(a.cutoff, 1));
        add_unique(windows, sel.window);
      }
      if (windows.empty()) windows.push_back(rd::RdWindow::symmetric(a.cutoff, 1));
      std::vector<io::Column<rd::RdLocalResult>> cols;
      json arr = json::array();
      for (const auto& w : windows) {
        auto r = rd::rd_local_estimate(ds, outcome, w, fisher);
        arr.push_back(io::to_json(r));
        cols.push_back({io::window_label(w.lower, w.upper), r});
      }
      result["results"] = arr;
      text = io::render_local_table("Local randomization RD: " + title, cols);
    } else if (a.method == "continuity") {
      std::vector<io::Column<rd::RdContinuityResult>> cols;
      json arr = json::array();
      auto base = rd::rd_continuity_estimate(ds, outcome, a.cutoff, cont);
      arr.push_back(io::to_json(base));
      cols.push_back({"(1)", base});
      if (!covs.empty()) {
        rd::ContinuityOptions with = cont;
        with.covariates = covs;
        auto adj = rd::rd_continuity_estimate(ds, outcome, a.cutoff, with);
        arr.push_back(io::to_json(adj));
        cols.push_back({"(2)", adj});
      }
      result["results"] = arr;
      text = io::render_continuity_table("Continuity-based RD: " + title, cols);
    } else {
      std::vector<io::Column<rd::DiffInDiscResult>> cols;
      json arr = json::array();
      auto base = rd::diff_in_disc(ds, outcome, a.cutoff, cont);
      arr.push_back(io::to_json(base));
      cols.push_back({"(1)", base});
      if (!covs.empty()) {
        rd::ContinuityOptions with = cont;
        with.covariates = covs;
        auto adj = rd::diff_in_disc(ds, outcome, a.cutoff, with);
        arr.push_back(io::to_json(adj));
        cols.push_back({"(2)", adj});
      }
      result["results"] = arr;
      text = io::render_diffdisc_table("Difference in discontinuities: " + title, cols);
    }

    if (a.out) persist(*a.out, "estimate", estimate_args_json(a), a.seed, {a.data}, result, text);
    if (a.json_stdout) {
      out << result.dump(2) << '\n';
    } else {
      out << text;
    }
    return kOk;
  });
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Dataset ds = load_data(a.data, a.regime);
    const ValidationRun run = run_validation(ds, a);
    const json result = validation_json(run);
    const std::string text = validation_text(run);
    if (a.out) persist(*a.out, "validate", validate_args_json(a), a.seed, {a.data}, result, text);
    if (a.json_stdout) {
      out << result.dump(2) << '\n';
    } else {
      out << text;
    }
    return kOk;
  });
}

int cmd_equilibrium(const EquilibriumArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (a.figure1) {
      const auto series =
          contest::figure1_series(a.loss_penalty, a.win_bonus, a.baseline_loss_slope, a.x_min, a.x_max, a.points);
      const std::string csv = io::figure1_csv(series);
      if (a.out) {
        write_text(*a.out, csv);
        out << "wrote " << series.size() << " points to " << a.out->string() << '\n';
      } else {
        out << csv;
      }
      return kOk;
    }
    const contest::ContestParams params{a.prize, a.loss_penalty, a.win_bonus, a.salience};
    const auto sol = contest::solve_equilibrium(params);
    const auto rep = contest::verify_equilibrium(params, a.grid_points);
    const json j{{"solution", io::to_json(sol)}, {"verification", io::to_json(rep)}};
    if (a.out) write_text(*a.out, j.dump(2) + "\n");
    if (a.json_stdout) {
      out << j.dump(2) << '\n';
    } else {
      out << io::render_equilibrium(sol, rep);
    }
    return kOk;
  });
}

std::string replicate_summary_digest(const fs::path& out_dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "summary.json" || name == "manifest.json") continue;
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::string listing;
  for (const auto& n : names) listing += n + "  " + sha256_file(out_dir / n) + "\n";
  return sha256_hex(listing);
}

int cmd_replicate(const ReplicateArgs& a, std::ostream& out, std::ostream& err) {
  struct ThreadGuard {
    ~ThreadGuard() { set_thread_count(0); }
  } guard;
  return guarded(err, [&] {
    const sim::SimulationConfig cfg = load_config(a.config);
    if (a.threads) {
      if (*a.threads == 0) throw InvalidParameters("--threads must be positive");
      set_thread_count(*a.threads);
    }
    if (a.permutations < 1) throw InvalidParameters("--permutations must be positive");
    fs::create_directories(a.out_dir);
    Artifacts art{a.out_dir, {}};

    const Dataset ds = sim::simulate_dataset(cfg);
    art.write("data.csv", to_csv(ds));

    const auto desc = stats::descriptive_table(ds);
    art.write_json("descriptive.json", io::to_json(desc));
    art.write("descriptive.txt", io::render_descriptive(desc));

    std::vector<Regime> regimes;
    for (Regime r : {Regime::Before, Regime::After}) {
      if (ds.has_regime(r)) regimes.push_back(r);
    }
    const bool pooled = regimes.size() == 2;
    if (pooled) {
      const auto cmp = stats::group_compare(ds, Selector::by_name("round1_total"));
      art.write("group_compare_round1_total.csv", io::group_compare_csv(cmp));
      art.write("group_compare_round1_total.txt", io::render_group_compare(cmp));
    }

    rd::FisherOptions fisher;
    fisher.n_permutations = a.permutations;
    fisher.seed = cfg.seed;
    rd::ContinuityOptions cont;
    rd::ContinuityOptions cont_cov;
    cont_cov.covariates = parse_selectors("wc_points_before,home_event");

    json headline = json::object();
    const std::vector<std::string> outcomes = {"advanced", "round1_distance_points", "round1_style_points"};
    for (const auto& name : outcomes) {
      const Selector outcome = Selector::by_name(name);

      std::vector<io::Column<rd::RdLocalResult>> local_cols;
      json local_json = json::array();
      std::vector<io::Column<rd::RdContinuityResult>> cont_cols;
      json cont_json = json::array();
      for (Regime r : regimes) {
        const Dataset sub = ds.with_regime(r);
        for (int hw : {1, 2, 3}) {
          const auto w = rd::RdWindow::symmetric(30.5, hw);
          auto res = rd::rd_local_estimate(sub, outcome, w, fisher);
          json j = io::to_json(res);
          j["regime"] = to_string(r);
          local_json.push_back(j);
          local_cols.push_back({regime_label(r) + " " + io::window_label(w.lower, w.upper), res});
          if (hw == 1) {
            headline[name][std::string(to_string(r))] = {{"local_estimate", res.estimate}, {"local_p", res.p_value}};
          }
        }
        for (const auto* opts : {&cont, &cont_cov}) {
          auto res = rd::rd_continuity_estimate(sub, outcome, 30.5, *opts);
          json j = io::to_json(res);
          j["regime"] = to_string(r);
          cont_json.push_back(j);
          cont_cols.push_back({regime_label(r) + (opts->covariates.empty() ? " (1)" : " (2)"), res});
        }
      }
      art.write_json("local_" + name + ".json", local_json);
      art.write("local_" + name + ".txt", io::render_local_table("Local randomization RD: " + name, local_cols));
      art.write_json("continuity_" + name + ".json", cont_json);
      art.write("continuity_" + name + ".txt",
                io::render_continuity_table("Continuity-based RD: " + name, cont_cols));

      if (pooled) {
        std::vector<io::Column<rd::DiffInDiscResult>> dd_cols;
        json dd_json = json::array();
        for (const auto* opts : {&cont, &cont_cov}) {
          auto res = rd::diff_in_disc(ds, outcome, 30.5, *opts);
          dd_json.push_back(io::to_json(res));
          dd_cols.push_back({opts->covariates.empty() ? "(1)" : "(2)", res});
          if (opts->covariates.empty()) headline[name]["delta_tau"] = {{"estimate", res.delta_tau}, {"p", res.p_conventional}};
        }
        art.write_json("diffdisc_" + name + ".json", dd_json);
        art.write("diffdisc_" + name + ".txt",
                  io::render_diffdisc_table("Difference in discontinuities: " + name, dd_cols));
      }
    }

    ValidateArgs va;
    va.permutations = a.permutations;
    va.seed = cfg.seed;
    const ValidationRun vrun = run_validation(ds, va);
    art.write_json("validation.json", validation_json(vrun));
    art.write("validation.txt", validation_text(vrun));

    for (const std::string name : {"advanced", "round1_total"}) {
      for (Regime r : regimes) {
        const auto plot = rd::rd_plot_data(ds.with_regime(r), Selector::by_name(name), 30.5, 30, 31);
        art.write("plot_" + name + "_" + std::string(to_string(r)) + ".csv", io::plot_csv(plot));
      }
    }

    const contest::ContestParams params = cfg.structural_params;
    const json eq{{"solution", io::to_json(contest::solve_equilibrium(params))},
                  {"verification", io::to_json(contest::verify_equilibrium(params))}};
    art.write_json("equilibrium.json", eq);
    art.write("figure1.csv", io::figure1_csv(contest::figure1_series(params.loss_penalty, params.win_bonus, 2.0, -2.0, 2.0)));

    const std::string digest = replicate_summary_digest(a.out_dir);
    json listing = json::array();
    for (const auto& p : art.paths) listing.push_back({{"name", p.filename().string()}, {"sha256", sha256_file(p)}});
    const json cfg_json = sim::config_to_json(cfg);
    const json summary{{"seed", cfg.seed},
                       {"config_digest", config_digest(cfg_json)},
                       {"permutations", a.permutations},
                       {"artifacts", listing},
                       {"headline", headline},
                       {"summary_digest", digest}};
    write_text(a.out_dir / "summary.json", summary.dump(2) + "\n");

    RunManifest m = make_manifest("replicate", cfg_json, cfg.seed);
    if (a.config) m.input_paths = {*a.config};
    m.output_paths = art.paths;
    m.output_paths.push_back(a.out_dir / "summary.json");
    write_manifest(m, a.out_dir / "manifest.json");

    out << "wrote " << art.paths.size() + 2 << " files to " << a.out_dir.string() << '\n';
    out << "summary digest " << digest << '\n';
    return kOk;
  });
}

}  // namespace cutofflab::cli
