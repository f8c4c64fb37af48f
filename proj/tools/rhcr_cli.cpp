// rhcr: run lifelong simulations and parameter sweeps, check the fixture maps.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rhcr/cli.hpp"

#ifndef RHCR_MAPS_DIR
#define RHCR_MAPS_DIR "maps"
#endif

namespace {

using namespace rhcr::cli;

int report(const std::vector<RunRecord>& rows) {
  bool failed = false;
  for (const RunRecord& r : rows) {
    if (r.failed) {
      failed = true;
      std::cerr << "run failed: " << r.map << " seed " << r.seed << ": " << r.failure << '\n';
    }
  }
  return failed ? kRunFailed : kOk;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rolling-horizon lifelong multi-agent path finding"};
  app.require_subcommand(1);

  RunSpec spec;
  std::string solver = "pbs", horizon = "5", out_path, scenario;
  int jobs = 1;
  bool no_timing = false, json = false;
  auto* sim = app.add_subcommand("simulate", "Run one configuration (optionally repeated)");
  sim->add_option("--map", spec.map, "Map file")->required();
  sim->add_option("--solver", solver, "cbs, ecbs, castar or pbs")->capture_default_str();
  sim->add_option("--agents,-m", spec.m, "Number of agents")->capture_default_str();
  sim->add_option("--horizon,-w", horizon, "Planning window (integer or 'inf')")->capture_default_str();
  sim->add_option("--period", spec.h, "Replanning period")->capture_default_str();
  sim->add_option("--potential,-p", spec.p, "Potential threshold")->capture_default_str();
  sim->add_option("--subopt", spec.subopt, "ECBS suboptimality factor")->capture_default_str();
  sim->add_option("--timesteps,-T", spec.timesteps, "Simulated timesteps")->capture_default_str();
  sim->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  sim->add_option("--reps", spec.reps, "Repetitions (seed, seed+1, ...)")->capture_default_str();
  sim->add_option("--time-limit", spec.time_limit_s, "Seconds per Windowed MAPF call")->capture_default_str();
  sim->add_option("--scenario", scenario, "fulfillment or sorting (default: from map)");
  sim->add_option("--out,-o", out_path, "CSV output file (default: stdout)");
  sim->add_flag("--json", json, "Write JSON instead of CSV");
  sim->add_option("--jobs,-j", jobs, "Parallel runs")->capture_default_str();
  sim->add_flag("--no-timing", no_timing, "Zero runtime columns");

  std::string config, out_dir;
  auto* sweep = app.add_subcommand("sweep", "Run every combination in a sweep file");
  sweep->add_option("--config", config, "Sweep file")->required();
  sweep->add_option("--out", out_dir, "Output directory for results.csv and results.json")->required();
  sweep->add_option("--jobs,-j", jobs, "Parallel runs")->capture_default_str();
  sweep->add_flag("--no-timing", no_timing, "Zero runtime columns");

  std::string fixture_dir = RHCR_MAPS_DIR;
  auto* verify = app.add_subcommand("verify-fixtures", "Check the bundled maps");
  verify->add_option("--dir", fixture_dir, "Directory with the fixture maps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
    const SweepOptions opt{jobs, !no_timing};

    if (*sim) {
      if (const auto k = rhcr::parse_solver(solver)) {
        spec.solver = *k;
      } else {
        throw ConfigError("unknown solver '" + solver + "'");
      }
      spec.w = parse_horizon(horizon);
      if (scenario == "fulfillment") {
        spec.scenario = rhcr::Scenario::kFulfillment;
      } else if (scenario == "sorting") {
        spec.scenario = rhcr::Scenario::kSorting;
      } else if (!scenario.empty()) {
        throw ConfigError("unknown scenario '" + scenario + "'");
      }
      validate(spec);
      const auto rows = run_sweep(expand_reps({spec}), opt);
      auto write = [&](std::ostream& os) { json ? write_json(os, rows) : write_csv(os, rows); };
      if (out_path.empty()) {
        write(std::cout);
      } else {
        auto f = open_out(out_path);
        write(f);
      }
      return report(rows);
    }

    if (*sweep) {
      std::ifstream in(config);
      if (!in) throw ConfigError("cannot open sweep file " + config);
      std::vector<RunSpec> specs;
      try {
        specs = parse_sweep(in, std::filesystem::path(config).parent_path().string());
      } catch (const ConfigError& e) {
        throw ConfigError(config + ": " + e.what());
      }
      const auto rows = run_sweep(expand_reps(specs), opt);
      std::filesystem::create_directories(out_dir);
      auto csv = open_out(out_dir + "/results.csv");
      write_csv(csv, rows);
      auto js = open_out(out_dir + "/results.json");
      write_json(js, rows);
      std::cout << rows.size() << " runs written to " << out_dir << '\n';
      return report(rows);
    }

    if (*verify) {
      bool ok = true;
      for (const FixtureCheck& c : verify_fixtures(fixture_dir)) {
        std::cout << (c.ok ? "ok    " : "FAIL  ") << c.name << '\n';
        if (!c.ok) {
          std::cout << "      " << c.detail << '\n';
          ok = false;
        }
      }
      return ok ? kOk : kInvalidConfig;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunFailed;
  }
  return kOk;
}
