#pragma once

// Command implementations behind the orlicz-flow binary.  Each command takes
// a loaded RunConfig; exit codes are the process contract:
//   0 converged / success, 1 max_steps or non-convergence, 2 condition
//   violated (strict mode or check-condition), 3 guard failure,
//   4 configuration problem.
// Every command installs <outputs.directory>/run.log as the logging sink, so
// errors land there as well as on stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "orlicz_flow/diagnostics.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/flow.hpp"
#include "orlicz_flow/logging.hpp"
#include "orlicz_flow/newton_oracle.hpp"
#include "orlicz_flow/run_config.hpp"

namespace orlicz_flow {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitMaxSteps = 1;
inline constexpr int kExitConditionViolated = 2;
inline constexpr int kExitGuardFailure = 3;
inline constexpr int kExitConfigError = 4;

namespace cli_detail {

inline std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

// Opens <dir>/run.log (append) and installs it as the logging sink for the
// lifetime of the command.
class LogSinkGuard {
public:
  explicit LogSinkGuard(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw ConfigError("cannot create output directory '" + dir +
                        "': " + ec.message());
    const std::string path = dir + "/run.log";
    f_ = std::fopen(path.c_str(), "a");
    if (f_ == nullptr) throw ConfigError("cannot open log file: " + path);
    logging::sink() = f_;
  }
  LogSinkGuard(const LogSinkGuard&) = delete;
  LogSinkGuard& operator=(const LogSinkGuard&) = delete;
  ~LogSinkGuard() {
    if (f_ != nullptr) {
      logging::sink() = nullptr;
      std::fclose(f_);
    }
  }

private:
  std::FILE* f_ = nullptr;
};

// Runs a command body with the log sink installed; failures are recorded in
// run.log (stderr reporting is the caller's job) and rethrown for exit-code
// mapping.
template <class Fn>
int with_log_sink(const RunConfig& cfg, Fn&& fn) {
  LogSinkGuard guard(cfg.outputs.directory);
  try {
    return fn();
  } catch (const std::exception& e) {
    if (logging::sink() != nullptr) {
      std::fprintf(logging::sink(), "[error] %s\n", e.what());
      std::fflush(logging::sink());
    }
    throw;
  }
}

inline std::vector<bool> parse_region(const SphericalGrid& grid,
                                      const std::string& spec) {
  if (spec == "all") return region_all(grid);
  if (spec.rfind("arc:", 0) == 0) {
    const std::string body = spec.substr(4);
    try {
      std::size_t pos = 0;
      const double a = std::stod(body, &pos);
      if (pos >= body.size() || body[pos] != ',')
        throw ConfigError("--region arc needs two comma-separated angles");
      const std::string rest = body.substr(pos + 1);
      std::size_t pos2 = 0;
      const double b = std::stod(rest, &pos2);
      if (pos2 != rest.size())
        throw ConfigError("--region arc has trailing characters");
      return region_arc(grid, a, b);
    } catch (const std::invalid_argument&) {
      throw ConfigError("--region arc angles must be numbers");
    } catch (const std::out_of_range&) {
      throw ConfigError("--region arc angles are out of range");
    }
  }
  throw ConfigError("--region must be 'all' or 'arc:a,b' (radians), got '" +
                    spec + "'");
}

}  // namespace cli_detail

inline int command_run_flow(const RunConfig& cfg) {
  return cli_detail::with_log_sink(cfg, [&]() -> int {
    logging::info("solvability condition: " +
                  std::string(to_string(cfg.condition.verdict)));
    if (cfg.strict_condition &&
        cfg.condition.verdict == ConditionVerdict::violated) {
      logging::error("solvability condition violated and strict_condition is set");
      return kExitConditionViolated;
    }

    const SphericalGrid grid = build_grid(cfg.n, cfg.N);
    const ScalarField h0 = initial_body_field(cfg, grid);
    const std::string& dir = cfg.outputs.directory;

    std::function<void(const FlowState&, const BodyGeometry&)> observer;
    if (cfg.outputs.snapshot_every > 0) {
      observer = [&](const FlowState& st, const BodyGeometry&) {
        if (st.step_index % cfg.outputs.snapshot_every == 0)
          write_snapshot(dir + "/snapshot_" + std::to_string(st.step_index) +
                             ".json",
                         Snapshot{grid.n, grid.N, st.time, st.h.values});
      };
    }

    const RunResult result = run(cfg.problem, h0, cfg.flow, observer);

    std::ofstream tf(dir + "/trace.csv", std::ios::binary);
    if (!tf) throw ConfigError("cannot write trace file in " + dir);
    write_trace_csv(tf, result.trace);
    write_snapshot(dir + "/final.json",
                   Snapshot{grid.n, grid.N, result.final_state.time,
                            result.final_state.h.values});

    std::cout << "status = " << to_string(result.status) << "\n"
              << "stop_reason = " << result.stop_reason << "\n"
              << "steps = " << result.final_state.step_index << "\n"
              << "time = " << cli_detail::fmt(result.final_state.time) << "\n"
              << "residual_sup_rel = " << cli_detail::fmt(result.residual_sup_rel)
              << "\n"
              << "residual_l2_rel = " << cli_detail::fmt(result.residual_l2_rel)
              << "\n";
    logging::info("run finished: status=" + std::string(to_string(result.status)) +
                  " stop_reason=" + result.stop_reason +
                  " steps=" + std::to_string(result.final_state.step_index));

    switch (result.status) {
      case RunStatus::converged: return kExitConverged;
      case RunStatus::max_steps: return kExitMaxSteps;
      case RunStatus::guard_failure: return kExitGuardFailure;
    }
    return kExitConfigError;
  });
}

inline int command_check_condition(const RunConfig& cfg) {
  return cli_detail::with_log_sink(cfg, [&]() -> int {
    const ConditionReport& r = cfg.condition;
    std::cout << "verdict = " << to_string(r.verdict) << "\n"
              << "upper_proxy = " << cli_detail::fmt(r.upper_proxy) << "\n"
              << "lower_proxy = " << cli_detail::fmt(r.lower_proxy) << "\n"
              << "min_f = " << cli_detail::fmt(r.min_f) << "\n"
              << "max_f = " << cli_detail::fmt(r.max_f) << "\n"
              << "margin_upper = " << cli_detail::fmt(r.margin_upper) << "\n"
              << "margin_lower = " << cli_detail::fmt(r.margin_lower) << "\n";
    if (!r.diagnostic.empty())
      std::cout << "diagnostic = " << r.diagnostic << "\n";
    switch (r.verdict) {
      case ConditionVerdict::satisfied: return kExitConverged;
      case ConditionVerdict::violated: return kExitConditionViolated;
      case ConditionVerdict::inconclusive: return kExitMaxSteps;
    }
    return kExitConfigError;
  });
}

inline int command_residual(const RunConfig& cfg, const std::string& snapshot_path) {
  return cli_detail::with_log_sink(cfg, [&]() -> int {
    const Snapshot s = read_snapshot(snapshot_path);
    if (s.n != cfg.n || s.N != cfg.N)
      throw ConfigError("snapshot grid (n=" + std::to_string(s.n) +
                        ", N=" + std::to_string(s.N) +
                        ") does not match the config grid");
    const SphericalGrid grid = build_grid(cfg.n, cfg.N);
    FlowState st;
    st.h = ScalarField(grid, s.h);
    st.time = s.time;
    const ResidualReport rep = residual(st, cfg.problem);
    std::cout << "residual_sup_rel = " << cli_detail::fmt(rep.sup_rel) << "\n"
              << "residual_l2_rel = " << cli_detail::fmt(rep.l2_rel) << "\n";
    return kExitConverged;
  });
}

inline int command_solve_newton(const RunConfig& cfg) {
  return cli_detail::with_log_sink(cfg, [&]() -> int {
    const SphericalGrid grid = build_grid(cfg.n, cfg.N);
    const ScalarField h0 = initial_body_field(cfg, grid);
    NewtonStats stats;
    const ScalarField h =
        solve_stationary_n2(cfg.problem, grid, h0, cfg.newton, &stats);
    write_snapshot(cfg.outputs.directory + "/newton.json",
                   Snapshot{grid.n, grid.N, 0.0, h.values});
    std::cout << "iterations = " << stats.iterations << "\n"
              << "residual_sup = " << cli_detail::fmt(stats.final_residual) << "\n";
    logging::info("newton converged in " + std::to_string(stats.iterations) +
                  " iterations, sup|R| = " +
                  cli_detail::fmt(stats.final_residual));
    return kExitConverged;
  });
}

inline int command_measure(const RunConfig& cfg, const std::string& snapshot_path,
                           const std::string& region_spec) {
  return cli_detail::with_log_sink(cfg, [&]() -> int {
    const Snapshot s = read_snapshot(snapshot_path);
    if (s.n != cfg.n || s.N != cfg.N)
      throw ConfigError("snapshot grid (n=" + std::to_string(s.n) +
                        ", N=" + std::to_string(s.N) +
                        ") does not match the config grid");
    const SphericalGrid grid = build_grid(cfg.n, cfg.N);
    const std::vector<bool> region = cli_detail::parse_region(grid, region_spec);
    const BodyGeometry body = body_geometry(ScalarField(grid, s.h));
    std::cout << cli_detail::fmt(curvature_measure(body, cfg.problem, region))
              << "\n";
    return kExitConverged;
  });
}

}  // namespace orlicz_flow
