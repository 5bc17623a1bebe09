// Command-line experiment runner: `run` executes Monte-Carlo campaigns,
// `list` shows the built-in scenarios, `verify` runs a verification suite.

#include "fpf/fpf.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

void print_summary(const fpf::SummaryTable& table) {
  std::printf("scenario %s, %d run%s\n", table.scenario_id.c_str(), table.runs,
              table.runs == 1 ? "" : "s");
  std::printf("  %-12s  %14s  %12s\n", "filter", "avg_rmse", "%tracks_ok");
  for (const auto& row : table.rows) {
    std::printf("  %-12s  %14.6g  %12.1f\n", row.filter.c_str(), row.avg_rmse,
                row.pct_tracks_ok);
  }
}

int print_checks(const std::vector<fpf::CheckResult>& results) {
  bool all_pass = true;
  for (const auto& c : results) {
    std::printf("%s  %-22s  measured %.6g  tolerance %.6g  (%.2f s)  %s\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                c.tolerance, c.seconds, c.detail.c_str());
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feedback particle filter tracking experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a Monte-Carlo experiment");
  std::string config_path;
  std::string scenario, beta_filter, gain, out_dir, clutter_assumption;
  std::vector<std::string> filters;
  int particles = 0, runs = 0, jobs = 0;
  std::uint64_t seed = 0;
  bool ghost = false;
  double dt = 0.0, horizon = 0.0, q = -1.0;
  run->add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  run->add_option("--scenario", scenario, "built-in scenario name");
  run->add_option("--filter", filters,
                  "pda-fpf | jpda-fpf | sir-pf | kalman-pdaf (repeatable)");
  run->add_option("--beta-filter", beta_filter,
                  "association filter: continuous | discrete | heuristic");
  run->add_option("--gain", gain, "gain approximation: constant | galerkin");
  run->add_option("--particles", particles, "ensemble size (0 = scenario default)");
  run->add_option("--runs", runs, "number of Monte-Carlo runs");
  run->add_option("--seed", seed, "base seed; run k uses base_seed + k");
  run->add_option("--out", out_dir, "output directory for CSV/JSON artifacts");
  run->add_option("--jobs", jobs, "parallel worker threads");
  run->add_flag("--ghost-init", ghost, "initialize tracks at the ghost position");
  run->add_option("--clutter-assumption", clutter_assumption,
                  "clutter density the filter assumes: gaussian | uniform");
  run->add_option("--dt", dt, "override scenario time step");
  run->add_option("--horizon", horizon, "override scenario horizon");
  run->add_option("--q", q, "override association transition rate");

  auto* list = app.add_subcommand("list", "list built-in scenarios");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  double tolerance_scale = 1.0;
  std::uint64_t verify_seed = fpf::VerifyOptions{}.seed;
  verify->add_option("suite", suite, "linear | consistency | association")
      ->required();
  verify->add_option("--tolerance-scale", tolerance_scale,
                     "multiply every tolerance (0 = harness self-test)");
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& [name, description] : fpf::list_scenarios()) {
        std::printf("%-20s  %s\n", name.c_str(), description.c_str());
      }
      return 0;
    }
    if (verify->parsed()) {
      fpf::VerifyOptions opts;
      opts.tolerance_scale = tolerance_scale;
      opts.seed = verify_seed;
      return print_checks(fpf::verify_suite(suite, opts));
    }

    fpf::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = fpf::load_experiment_config(config_path);
    if (run->count("--scenario")) cfg.scenario = scenario;
    if (run->count("--filter")) {
      cfg.filters.clear();
      for (const auto& f : filters) cfg.filters.push_back(fpf::parse_filter(f));
    }
    if (run->count("--beta-filter")) cfg.beta_filter = beta_filter;
    if (run->count("--gain")) {
      if (gain == "constant") {
        cfg.gain = fpf::GainMethod::kConstant;
      } else if (gain == "galerkin") {
        cfg.gain = fpf::GainMethod::kGalerkin;
      } else {
        throw std::invalid_argument("--gain must be constant or galerkin");
      }
    }
    if (run->count("--particles")) cfg.particles = particles;
    if (run->count("--runs")) cfg.runs = runs;
    if (run->count("--seed")) cfg.base_seed = seed;
    if (run->count("--out")) cfg.output_dir = out_dir;
    if (run->count("--jobs")) cfg.jobs = jobs;
    if (run->count("--ghost-init")) cfg.ghost_init = true;
    if (run->count("--clutter-assumption")) {
      cfg.clutter_assumption = clutter_assumption;
    }
    if (run->count("--dt")) cfg.dt_override = dt;
    if (run->count("--horizon")) cfg.horizon_override = horizon;
    if (run->count("--q")) cfg.q_override = q;

    print_summary(fpf::run_experiment(cfg));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
