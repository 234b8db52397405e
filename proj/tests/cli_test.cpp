// End-to-end tests of the command-line driver: each case invokes the real
// binary (path injected at compile time) as a subprocess and checks the
// printed report, the produced files, and the exit code contract:
//   0 success/converged, 1 max_steps/non-convergence/inconclusive,
//   2 condition violated, 3 guard failure, 4 configuration problem.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(ORLICZ_FLOW_CLI_PATH) + " " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  CliResult r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string line_value(const std::string& out, const std::string& key) {
  std::istringstream iss(out);
  std::string line;
  const std::string prefix = key + " = ";
  while (std::getline(iss, line))
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  ASSERT_TRUE(f.is_open()) << p;
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  EXPECT_TRUE(f.is_open()) << p;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

// Base configuration: planar power-law problem on a small grid.
std::string lp_config(const fs::path& dir, const std::string& extra = "") {
  return std::string("{\n")
      + "  \"problem\": {\"lp_dual\": {\"p\": 2, \"q\": 0}},\n"
      + "  \"grid\": {\"n\": 2, \"N\": 64},\n"
      + "  \"outputs\": {\"directory\": \"" + dir.string() + "\"}"
      + (extra.empty() ? "\n" : ",\n" + extra + "\n") + "}\n";
}

std::string unit_ball_snapshot(int N) {
  std::string h = "[";
  for (int i = 0; i < N; ++i) h += (i ? ",1.0" : "1.0");
  h += "]";
  return "{\"n\": 2, \"N\": " + std::to_string(N) +
         ", \"time\": 0.0, \"h\": " + h + "}\n";
}

TEST(CheckCondition, SatisfiedPowerLaw) {
  const fs::path dir = scratch("cond_ok");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir));
  const CliResult r = run_cli("check-condition " + quoted(cfg));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(line_value(r.out, "verdict"), "satisfied");
  EXPECT_NEAR(std::stod(line_value(r.out, "upper_proxy")), 1e-10, 1e-22);
  EXPECT_NEAR(std::stod(line_value(r.out, "lower_proxy")), 1e10, 1e-2);
  EXPECT_EQ(line_value(r.out, "min_f"), "1");
}

TEST(CheckCondition, ViolatedPowerLaw) {
  const fs::path dir = scratch("cond_bad");
  const fs::path cfg = dir / "config.json";
  write_file(cfg,
             "{\"problem\": {\"lp_dual\": {\"p\": 0, \"q\": 2}},"
             " \"grid\": {\"n\": 2, \"N\": 64},"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  const CliResult r = run_cli("check-condition " + quoted(cfg));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_EQ(line_value(r.out, "verdict"), "violated");
}

TEST(CheckCondition, InconclusiveOscillation) {
  const fs::path dir = scratch("cond_inc");
  const fs::path cfg = dir / "config.json";
  write_file(cfg,
             "{\"problem\": {\"phi\": \"(2 + sin(3*log(s)))/s^2\","
             " \"G_radial\": \"1\"},"
             " \"grid\": {\"n\": 2, \"N\": 64},"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  const CliResult r = run_cli("check-condition " + quoted(cfg));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_EQ(line_value(r.out, "verdict"), "inconclusive");
  EXPECT_FALSE(line_value(r.out, "diagnostic").empty());
}

TEST(RunFlow, ConvergesAndWritesOutputs) {
  const fs::path dir = scratch("run_round");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir, "  \"initial_body\": \"1 + 0.3*cos(t)\""));
  const CliResult r = run_cli("run-flow " + quoted(cfg));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(line_value(r.out, "status"), "converged");
  EXPECT_EQ(line_value(r.out, "stop_reason"), "residual");
  EXPECT_LE(std::stod(line_value(r.out, "residual_sup_rel")), 1e-8);

  // final.json holds the converged body: the unit ball.
  nlohmann::json final_j = nlohmann::json::parse(read_file(dir / "final.json"));
  EXPECT_EQ(final_j.at("n").get<int>(), 2);
  EXPECT_EQ(final_j.at("N").get<int>(), 64);
  double err = 0.0;
  for (double v : final_j.at("h").get<std::vector<double>>())
    err = std::max(err, std::abs(v - 1.0));
  EXPECT_LE(err, 1e-6);

  // trace.csv: exact header, one data row per step.
  std::istringstream trace(read_file(dir / "trace.csv"));
  std::string header;
  std::getline(trace, header);
  EXPECT_EQ(header,
            "step,time,dt,J,residual_sup_rel,residual_l2_rel,min_h,max_h,"
            "max_grad_h,min_principal_radius,max_K");
  long rows = 0;
  std::string line;
  while (std::getline(trace, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, std::stol(line_value(r.out, "steps")));

  // run.log wrote the summary.
  const std::string log = read_file(dir / "run.log");
  EXPECT_NE(log.find("run finished"), std::string::npos);
}

TEST(RunFlow, StepBudgetExitsOne) {
  const fs::path dir = scratch("run_budget");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir, "  \"initial_body\": \"1 + 0.3*cos(t)\",\n"
                                 "  \"flow\": {\"max_steps\": 1}"));
  const CliResult r = run_cli("run-flow " + quoted(cfg));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_EQ(line_value(r.out, "status"), "max_steps");
  EXPECT_EQ(line_value(r.out, "steps"), "1");
  std::istringstream trace(read_file(dir / "trace.csv"));
  std::string line;
  long lines = 0;
  while (std::getline(trace, line))
    if (!line.empty()) ++lines;
  EXPECT_EQ(lines, 2);  // header + one row
}

TEST(RunFlow, StrictConditionRefusesViolatedData) {
  const fs::path dir = scratch("run_strict");
  const fs::path cfg = dir / "config.json";
  write_file(cfg,
             "{\"problem\": {\"lp_dual\": {\"p\": 0, \"q\": 2}},"
             " \"grid\": {\"n\": 2, \"N\": 64},"
             " \"strict_condition\": true,"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  const CliResult r = run_cli("run-flow " + quoted(cfg));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_FALSE(fs::exists(dir / "final.json"));
}

TEST(RunFlow, PeriodicSnapshots) {
  const fs::path dir = scratch("run_snaps");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir, "  \"initial_body\": \"1 + 0.3*cos(t)\",\n"
                                 "  \"flow\": {\"max_steps\": 250},\n"
                                 "  \"outputs\": {\"directory\": \"" +
                                     dir.string() +
                                     "\", \"snapshot_every\": 100}"));
  const CliResult r = run_cli("run-flow " + quoted(cfg));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_TRUE(fs::exists(dir / "snapshot_100.json"));
  EXPECT_TRUE(fs::exists(dir / "snapshot_200.json"));
  EXPECT_FALSE(fs::exists(dir / "snapshot_300.json"));
  nlohmann::json s = nlohmann::json::parse(read_file(dir / "snapshot_100.json"));
  EXPECT_EQ(s.at("N").get<int>(), 64);
  EXPECT_GT(s.at("time").get<double>(), 0.0);
}

TEST(Residual, ReproducesTheRunReport) {
  const fs::path dir = scratch("residual_roundtrip");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir, "  \"initial_body\": \"1 + 0.3*cos(t)\",\n"
                                 "  \"flow\": {\"max_steps\": 40}"));
  const CliResult flow = run_cli("run-flow " + quoted(cfg));
  EXPECT_EQ(flow.code, 1) << flow.out;
  const CliResult res =
      run_cli("residual " + quoted(cfg) + " " + quoted(dir / "final.json"));
  EXPECT_EQ(res.code, 0) << res.out;
  // Same state, same discrete operators: byte-identical report lines.
  EXPECT_EQ(line_value(res.out, "residual_sup_rel"),
            line_value(flow.out, "residual_sup_rel"));
  EXPECT_EQ(line_value(res.out, "residual_l2_rel"),
            line_value(flow.out, "residual_l2_rel"));
}

TEST(Residual, RejectsGridMismatchAndMissingFile) {
  const fs::path dir = scratch("residual_bad");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir));
  write_file(dir / "wrong.json",
             "{\"n\": 2, \"N\": 128, \"time\": 0.0, \"h\": [" + [] {
               std::string h = "1.0";
               for (int i = 1; i < 128; ++i) h += ",1.0";
               return h;
             }() + "]}");
  EXPECT_EQ(run_cli("residual " + quoted(cfg) + " " + quoted(dir / "wrong.json"))
                .code,
            4);
  EXPECT_EQ(run_cli("residual " + quoted(cfg) + " " + quoted(dir / "absent.json"))
                .code,
            4);
}

TEST(SolveNewton, WritesTheStationaryBody) {
  const fs::path dir = scratch("newton_round");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, lp_config(dir, "  \"initial_body\": \"1 + 0.1*cos(t)\""));
  const CliResult r = run_cli("solve-newton " + quoted(cfg));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_FALSE(line_value(r.out, "iterations").empty());
  EXPECT_LE(std::stod(line_value(r.out, "residual_sup")), 1e-10);
  nlohmann::json s = nlohmann::json::parse(read_file(dir / "newton.json"));
  double err = 0.0;
  for (double v : s.at("h").get<std::vector<double>>())
    err = std::max(err, std::abs(v - 1.0));
  EXPECT_LE(err, 1e-9);
}

TEST(Measure, UnitBallTotalAndArc) {
  const fs::path dir = scratch("measure_unit");
  const fs::path cfg = dir / "config.json";
  write_file(cfg,
             "{\"problem\": {\"phi\": \"1\", \"G_radial\": \"1\"},"
             " \"grid\": {\"n\": 2, \"N\": 64},"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  write_file(dir / "ball.json", unit_ball_snapshot(64));
  const CliResult all =
      run_cli("measure " + quoted(cfg) + " " + quoted(dir / "ball.json"));
  EXPECT_EQ(all.code, 0) << all.out;
  EXPECT_NEAR(std::stod(all.out), M_PI, 1e-12);
  const CliResult half =
      run_cli("measure " + quoted(cfg) + " " + quoted(dir / "ball.json") +
              " --region arc:0,3.141592653589793");
  EXPECT_EQ(half.code, 0) << half.out;
  EXPECT_NEAR(std::stod(half.out), M_PI / 2.0, 1e-12);
  const CliResult bad = run_cli("measure " + quoted(cfg) + " " +
                                quoted(dir / "ball.json") + " --region chunk");
  EXPECT_EQ(bad.code, 4);
}

TEST(Config, ParseErrorsExitFour) {
  const fs::path dir = scratch("config_bad");

  const fs::path bad_expr = dir / "bad_expr.json";
  write_file(bad_expr,
             "{\"problem\": {\"lp_dual\": {\"p\": 2, \"q\": 0}, \"f\": \"cos(t\"},"
             " \"grid\": {\"n\": 2, \"N\": 64},"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  const CliResult r1 = run_cli("check-condition " + quoted(bad_expr), true);
  EXPECT_EQ(r1.code, 4);
  EXPECT_NE(r1.out.find("problem.f"), std::string::npos) << r1.out;

  const fs::path small_grid = dir / "small_grid.json";
  write_file(small_grid,
             "{\"problem\": {\"lp_dual\": {\"p\": 2, \"q\": 0}},"
             " \"grid\": {\"n\": 2, \"N\": 8},"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  EXPECT_EQ(run_cli("check-condition " + quoted(small_grid)).code, 4);

  const fs::path unknown_key = dir / "unknown_key.json";
  write_file(unknown_key,
             "{\"problem\": {\"lp_dual\": {\"p\": 2, \"q\": 0}},"
             " \"grid\": {\"n\": 2, \"N\": 64}, \"grids\": 3,"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  const CliResult r3 = run_cli("check-condition " + quoted(unknown_key), true);
  EXPECT_EQ(r3.code, 4);
  EXPECT_NE(r3.out.find("unknown key"), std::string::npos) << r3.out;

  const fs::path both_models = dir / "both_models.json";
  write_file(both_models,
             "{\"problem\": {\"lp_dual\": {\"p\": 2, \"q\": 0},"
             " \"phi\": \"1\", \"G_radial\": \"1\"},"
             " \"grid\": {\"n\": 2, \"N\": 64},"
             " \"outputs\": {\"directory\": \"" + dir.string() + "\"}}");
  EXPECT_EQ(run_cli("check-condition " + quoted(both_models)).code, 4);

  const fs::path not_json = dir / "not_json.json";
  write_file(not_json, "{ nope");
  EXPECT_EQ(run_cli("check-condition " + quoted(not_json)).code, 4);

  EXPECT_EQ(run_cli("check-condition " + quoted(dir / "missing.json")).code, 4);
}

TEST(Usage, BadInvocationsExitFour) {
  EXPECT_EQ(run_cli("frobnicate config.json", true).code, 4);
  EXPECT_EQ(run_cli("", true).code, 4);  // a subcommand is required
  const CliResult help = run_cli("--help", true);
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("run-flow"), std::string::npos);
}

}  // namespace
