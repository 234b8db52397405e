// Entry point of the orlicz-flow binary: subcommand wiring and the mapping
// from library exceptions to the process exit-code contract (see cli.hpp).

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "orlicz_flow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gauss-curvature-flow solver for prescribed dual Orlicz "
               "curvature data"};
  app.require_subcommand(1);

  std::string config_path, snapshot_path, region = "all";

  CLI::App* sc_run =
      app.add_subcommand("run-flow", "evolve the initial body; write trace.csv, "
                                     "snapshots, and final.json");
  sc_run->add_option("config", config_path, "JSON config file")->required();

  CLI::App* sc_cond =
      app.add_subcommand("check-condition", "print the solvability-scan report");
  sc_cond->add_option("config", config_path, "JSON config file")->required();

  CLI::App* sc_res = app.add_subcommand(
      "residual", "stationarity residual of a snapshot body");
  sc_res->add_option("config", config_path, "JSON config file")->required();
  sc_res->add_option("snapshot", snapshot_path, "snapshot JSON file")->required();

  CLI::App* sc_newton = app.add_subcommand(
      "solve-newton", "solve the stationary equation directly (n = 2)");
  sc_newton->add_option("config", config_path, "JSON config file")->required();

  CLI::App* sc_measure =
      app.add_subcommand("measure", "curvature measure of a region");
  sc_measure->add_option("config", config_path, "JSON config file")->required();
  sc_measure->add_option("snapshot", snapshot_path, "snapshot JSON file")
      ->required();
  sc_measure->add_option("--region", region, "all | arc:a,b (radians)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return orlicz_flow::kExitConfigError;
  }

  try {
    const orlicz_flow::RunConfig cfg = orlicz_flow::load_config(config_path);
    if (sc_run->parsed()) return orlicz_flow::command_run_flow(cfg);
    if (sc_cond->parsed()) return orlicz_flow::command_check_condition(cfg);
    if (sc_res->parsed()) return orlicz_flow::command_residual(cfg, snapshot_path);
    if (sc_newton->parsed()) return orlicz_flow::command_solve_newton(cfg);
    if (sc_measure->parsed())
      return orlicz_flow::command_measure(cfg, snapshot_path, region);
    std::cerr << "error: no subcommand\n";
    return orlicz_flow::kExitConfigError;
  } catch (const orlicz_flow::GuardFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return orlicz_flow::kExitGuardFailure;
  } catch (const orlicz_flow::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return orlicz_flow::kExitMaxSteps;
  } catch (const std::exception& e) {
    // ConfigError, ParseError, ModelError, DomainError, ConvexityError,
    // NotApplicableError and anything unforeseen: a problem with the inputs.
    std::cerr << "error: " << e.what() << "\n";
    return orlicz_flow::kExitConfigError;
  }
}
