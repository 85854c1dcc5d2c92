#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "bmsim/dispatch.hpp"
#include "bmsim/error.hpp"
#include "bmsim/io.hpp"
#include "bmsim/log.hpp"
#include "bmsim/sweep.hpp"

namespace {

int cmd_run(const std::string& config_path, int parallel,
            const std::string& out_dir) {
  bmsim::SweepConfig config = bmsim::load_sweep_config(config_path);
  if (parallel > 0) config.parallelism = parallel;
  if (!out_dir.empty()) config.out_dir = out_dir;
  bmsim::validate_sweep_config(config);

  const bmsim::SweepResult result = bmsim::run_sweep(config);
  bmsim::emit_reports(result, config.out_dir);

  int failed = 0;
  for (const auto& row : result.rows)
    if (!row.error.empty()) ++failed;
  fmt::print("base cost {:.2f} GBP; {} rows ({} failed); reports in {}\n",
             result.base_cost_gbp, result.rows.size(), failed,
             config.out_dir.string());
  return failed == 0 ? 0 : 3;
}

int cmd_validate(const std::string& config_path) {
  const bmsim::SweepConfig config = bmsim::load_sweep_config(config_path);
  const bmsim::Scenario scenario =
      bmsim::load_scenario_dir(config.scenario_dir);
  fmt::print("ok: {} nodes, {} lines, {} units, {} periods\n",
             scenario.network.nodes.size(), scenario.network.lines.size(),
             scenario.units.size(), scenario.horizon);
  return 0;
}

int cmd_solve(const std::string& scenario_dir,
              const std::string& solution_path) {
  const bmsim::Scenario scenario = bmsim::load_scenario_dir(scenario_dir);
  const bmsim::DispatchSolution solution = bmsim::solve_dispatch(scenario);

  std::ofstream out(solution_path, std::ios::binary);
  if (!out)
    throw bmsim::Error(fmt::format("cannot write '{}'", solution_path));
  bmsim::write_solution_csv(scenario, solution, out);
  out.flush();
  if (!out)
    throw bmsim::Error(fmt::format("error writing '{}'", solution_path));

  fmt::print("cost {:.6f} GBP over {} periods; solution in {}\n",
             bmsim::bm_cost(scenario, solution), scenario.horizon,
             solution_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balancing-mechanism redispatch simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a storage sweep from a config");
  std::string run_config;
  int run_parallel = 0;
  std::string run_out;
  run->add_option("--config", run_config, "Sweep config JSON")->required();
  run->add_option("--parallel", run_parallel, "Worker count override")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "Output directory override");

  auto* validate =
      app.add_subcommand("validate", "Check a config and its scenario");
  std::string validate_config;
  validate->add_option("--config", validate_config, "Sweep config JSON")
      ->required();

  auto* solve = app.add_subcommand("solve", "Solve one scenario dispatch");
  std::string solve_scenario;
  std::string solve_solution;
  solve->add_option("--scenario", solve_scenario, "Scenario directory")
      ->required();
  solve->add_option("--solution", solve_solution, "Solution CSV to write")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_config, run_parallel, run_out);
    if (validate->parsed()) return cmd_validate(validate_config);
    return cmd_solve(solve_scenario, solve_solution);
  } catch (const bmsim::SolveError& e) {
    bmsim::log::error("{}", e.what());
    return 3;
  } catch (const bmsim::Error& e) {
    bmsim::log::error("{}", e.what());
    return 2;
  }
}
