#pragma once

// JSON run configuration and snapshot files.
//
// Config document (all sections except `problem` and `grid` optional):
//
//   {
//     "problem": {
//       "lp_dual": {"p": 2.0, "q": 0.0},          // or "phi" + "G_radial"
//       "phi": "s^(-1)", "G_radial": "r^(-2)",    //   (+ optional "G_angular")
//       "f": "1"                                  // in x1..xn, default "1"
//     },
//     "grid": {"n": 2, "N": 256},
//     "initial_body": "unit",                     // or an expression in t
//     "flow": {"dt0": 0, "dt_min": 1e-10, "safety": 0.8, "max_steps": 100000,
//              "stop_residual": 1e-8, "stop_energy_slope": 0},
//     "outputs": {"directory": "out", "snapshot_every": 0},
//     "strict_condition": false,
//     "newton": {"damping": 1.0, "max_iters": 50, "tol": 1e-10}
//   }
//
// Snapshots are {"n": .., "N": .., "time": .., "h": [..]}; node i carries the
// angle implied by the grid formula, so angles are never serialized.

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/expression.hpp"
#include "orlicz_flow/flow.hpp"
#include "orlicz_flow/newton_oracle.hpp"
#include "orlicz_flow/problem_data.hpp"
#include "orlicz_flow/sphere_grid.hpp"

namespace orlicz_flow {

struct OutputConfig {
  std::string directory = ".";
  long snapshot_every = 0;  // 0 = only final.json
};

struct RunConfig {
  ProblemData problem;
  int n = 2;
  int N = 256;
  std::string initial_body = "unit";
  FlowConfig flow;
  OutputConfig outputs;
  bool strict_condition = false;
  NewtonConfig newton;
  ConditionReport condition;  // embedded verdict from load time
};

namespace cfg_detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError(path + ": unknown key '" + item.key() + "'");
  }
}

inline const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + " is required");
  return j.at(key);
}

inline double get_num(const json& j, const std::string& path, const char* key,
                      double dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key + " must be a number");
  return v.get<double>();
}

inline long get_int(const json& j, const std::string& path, const char* key,
                    long dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(path + "." + key + " must be an integer");
  return v.get<long>();
}

inline std::string get_str(const json& j, const std::string& path, const char* key,
                           const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key + " must be a string");
  return v.get<std::string>();
}

inline ExpressionAst parse_field(const std::string& text,
                                 const std::vector<std::string>& vars,
                                 const std::string& field) {
  try {
    return parse_expression(text, vars);
  } catch (const ParseError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace cfg_detail

inline RunConfig load_config(const std::string& path) {
  using cfg_detail::json;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  cfg_detail::check_keys(j, "config",
                         {"problem", "grid", "initial_body", "flow", "outputs",
                          "strict_condition", "newton"});

  RunConfig cfg;

  // grid
  const json& jg = cfg_detail::require(j, "config", "grid");
  if (!jg.is_object()) throw ConfigError("grid must be an object");
  cfg_detail::check_keys(jg, "grid", {"n", "N"});
  cfg.n = static_cast<int>(cfg_detail::get_int(jg, "grid", "n", 0));
  cfg.N = static_cast<int>(cfg_detail::get_int(jg, "grid", "N", 0));
  if (!jg.contains("n") || !jg.contains("N"))
    throw ConfigError("grid.n and grid.N are required");
  try {
    (void)build_grid(cfg.n, cfg.N);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  // problem
  const json& jp = cfg_detail::require(j, "config", "problem");
  if (!jp.is_object()) throw ConfigError("problem must be an object");
  cfg_detail::check_keys(jp, "problem",
                         {"lp_dual", "phi", "G_radial", "G_angular", "f"});
  const bool has_lp = jp.contains("lp_dual");
  const bool has_orlicz = jp.contains("phi") || jp.contains("G_radial");
  if (has_lp && has_orlicz)
    throw ConfigError("problem: give either lp_dual or phi/G_radial, not both");
  if (!has_lp && !has_orlicz)
    throw ConfigError("problem: needs lp_dual or phi/G_radial");

  std::vector<std::string> xvars;
  for (int i = 1; i <= cfg.n; ++i) xvars.push_back("x" + std::to_string(i));
  const std::string f_text = cfg_detail::get_str(jp, "problem", "f", "1");

  ProblemData d;
  d.n = cfg.n;
  if (has_lp) {
    const json& jl = jp.at("lp_dual");
    if (!jl.is_object()) throw ConfigError("problem.lp_dual must be an object");
    cfg_detail::check_keys(jl, "problem.lp_dual", {"p", "q"});
    if (!jl.contains("p") || !jl.contains("q"))
      throw ConfigError("problem.lp_dual.p and .q are required");
    d.lp_dual = true;
    d.p = cfg_detail::get_num(jl, "problem.lp_dual", "p", 0.0);
    d.q = cfg_detail::get_num(jl, "problem.lp_dual", "q", 0.0);
  } else {
    if (!jp.contains("phi") || !jp.contains("G_radial"))
      throw ConfigError("problem.phi and problem.G_radial are both required");
    d.phi = cfg_detail::parse_field(
        cfg_detail::get_str(jp, "problem", "phi", ""), {"s"}, "problem.phi");
    d.G_radial = cfg_detail::parse_field(
        cfg_detail::get_str(jp, "problem", "G_radial", ""), {"r"},
        "problem.G_radial");
    if (jp.contains("G_angular")) {
      std::vector<std::string> uvars;
      for (int i = 1; i <= cfg.n; ++i) uvars.push_back("u" + std::to_string(i));
      d.G_angular = cfg_detail::parse_field(
          cfg_detail::get_str(jp, "problem", "G_angular", ""), uvars,
          "problem.G_angular");
    }
  }
  d.f = cfg_detail::parse_field(f_text, xvars, "problem.f");
  cfg.problem = std::move(d);

  // initial body
  cfg.initial_body = cfg_detail::get_str(j, "config", "initial_body", "unit");
  if (cfg.initial_body != "unit")
    (void)cfg_detail::parse_field(cfg.initial_body, {"t"}, "initial_body");

  // flow
  if (j.contains("flow")) {
    const json& jf = j.at("flow");
    if (!jf.is_object()) throw ConfigError("flow must be an object");
    cfg_detail::check_keys(jf, "flow",
                           {"dt0", "dt_min", "safety", "max_steps",
                            "stop_residual", "stop_energy_slope"});
    cfg.flow.dt0 = cfg_detail::get_num(jf, "flow", "dt0", cfg.flow.dt0);
    cfg.flow.dt_min = cfg_detail::get_num(jf, "flow", "dt_min", cfg.flow.dt_min);
    cfg.flow.safety = cfg_detail::get_num(jf, "flow", "safety", cfg.flow.safety);
    cfg.flow.max_steps = cfg_detail::get_int(jf, "flow", "max_steps",
                                             cfg.flow.max_steps);
    cfg.flow.stop_residual =
        cfg_detail::get_num(jf, "flow", "stop_residual", cfg.flow.stop_residual);
    cfg.flow.stop_energy_slope = cfg_detail::get_num(jf, "flow", "stop_energy_slope",
                                                     cfg.flow.stop_energy_slope);
    if (cfg.flow.dt0 < 0.0) throw ConfigError("flow.dt0 must be >= 0");
    if (!(cfg.flow.dt_min > 0.0)) throw ConfigError("flow.dt_min must be positive");
    if (!(cfg.flow.safety > 0.0 && cfg.flow.safety < 1.0))
      throw ConfigError("flow.safety must lie in (0,1)");
    if (cfg.flow.max_steps < 0) throw ConfigError("flow.max_steps must be >= 0");
    if (!(cfg.flow.stop_residual > 0.0))
      throw ConfigError("flow.stop_residual must be positive");
    if (!std::isfinite(cfg.flow.stop_energy_slope))
      throw ConfigError("flow.stop_energy_slope must be finite "
                        "(0 = auto, negative disables the stall stop)");
  }

  // outputs
  if (j.contains("outputs")) {
    const json& jo = j.at("outputs");
    if (!jo.is_object()) throw ConfigError("outputs must be an object");
    cfg_detail::check_keys(jo, "outputs", {"directory", "snapshot_every"});
    cfg.outputs.directory =
        cfg_detail::get_str(jo, "outputs", "directory", cfg.outputs.directory);
    cfg.outputs.snapshot_every =
        cfg_detail::get_int(jo, "outputs", "snapshot_every", 0);
    if (cfg.outputs.directory.empty())
      throw ConfigError("outputs.directory must not be empty");
    if (cfg.outputs.snapshot_every < 0)
      throw ConfigError("outputs.snapshot_every must be >= 0");
  }

  // strict condition gate
  if (j.contains("strict_condition")) {
    if (!j.at("strict_condition").is_boolean())
      throw ConfigError("strict_condition must be a boolean");
    cfg.strict_condition = j.at("strict_condition").get<bool>();
  }

  // newton
  if (j.contains("newton")) {
    const json& jn = j.at("newton");
    if (!jn.is_object()) throw ConfigError("newton must be an object");
    cfg_detail::check_keys(jn, "newton", {"damping", "max_iters", "tol"});
    cfg.newton.damping = cfg_detail::get_num(jn, "newton", "damping",
                                             cfg.newton.damping);
    cfg.newton.max_iters = static_cast<int>(
        cfg_detail::get_int(jn, "newton", "max_iters", cfg.newton.max_iters));
    cfg.newton.tol = cfg_detail::get_num(jn, "newton", "tol", cfg.newton.tol);
    if (!(cfg.newton.damping > 0.0 && cfg.newton.damping <= 1.0))
      throw ConfigError("newton.damping must lie in (0, 1]");
    if (cfg.newton.max_iters < 1)
      throw ConfigError("newton.max_iters must be >= 1");
    if (!(cfg.newton.tol > 0.0)) throw ConfigError("newton.tol must be positive");
  }

  // solvability verdict, embedded for the commands to consult
  const SphericalGrid grid = build_grid(cfg.n, cfg.N);
  cfg.condition = check_condition(cfg.problem, grid);
  return cfg;
}

// Initial support function named by the config: "unit" or an expression in t
// (the grid angle of node i).
inline ScalarField initial_body_field(const RunConfig& cfg,
                                      const SphericalGrid& grid) {
  std::vector<double> h(static_cast<std::size_t>(grid.N), 1.0);
  if (cfg.initial_body != "unit") {
    const ExpressionAst ast =
        cfg_detail::parse_field(cfg.initial_body, {"t"}, "initial_body");
    for (int i = 0; i < grid.N; ++i)
      h[static_cast<std::size_t>(i)] =
          ast.eval1(grid.theta[static_cast<std::size_t>(i)]);
  }
  return {grid, std::move(h)};
}

// --- snapshots ----------------------------------------------------------------

struct Snapshot {
  int n = 0;
  int N = 0;
  double time = 0.0;
  std::vector<double> h;
};

inline void write_snapshot(const std::string& path, const Snapshot& s) {
  nlohmann::json j;
  j["n"] = s.n;
  j["N"] = s.N;
  j["time"] = s.time;
  j["h"] = s.h;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write snapshot file: " + path);
  out << j.dump() << '\n';
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("snapshot is not valid JSON: " + std::string(e.what()));
  }
  Snapshot s;
  try {
    s.n = j.at("n").get<int>();
    s.N = j.at("N").get<int>();
    s.time = j.at("time").get<double>();
    s.h = j.at("h").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("snapshot is missing fields: " + std::string(e.what()));
  }
  if (static_cast<int>(s.h.size()) != s.N)
    throw ConfigError("snapshot h has " + std::to_string(s.h.size()) +
                      " values but N = " + std::to_string(s.N));
  return s;
}

}  // namespace orlicz_flow
