#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "platoonlab/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PLATOON_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "platoonlab_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  json j;
  in >> j;
  return j;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("simulate --help"), 0);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  EXPECT_EQ(run_cli("simulate --dt -3"), 1);
  EXPECT_EQ(run_cli(""), 1);  // a subcommand is required
}

TEST(Cli, SimulateWritesTraceAndSidecar) {
  const fs::path dir = fresh_dir("simulate");
  ASSERT_EQ(run_cli("simulate --n 5 --t-end 5 --out " + dir.string()), 0);
  ASSERT_TRUE(fs::exists(dir / "trace.csv"));
  ASSERT_TRUE(fs::exists(dir / "trace.meta.json"));
  ASSERT_TRUE(fs::exists(dir / "manifest.json"));

  const json meta = read_json(dir / "trace.meta.json");
  EXPECT_EQ(meta.at("N").get<int>(), 5);
  EXPECT_EQ(meta.at("topology").get<std::string>(), "path");
  EXPECT_FALSE(meta.at("diverged").get<bool>());

  const platoon::TraceData data = platoon::read_trace_csv((dir / "trace.csv").string());
  EXPECT_EQ(data.errors.cols(), 6);
  EXPECT_GE(data.times(data.times.size() - 1), 5.0);

  const json manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest.at("command").get<std::string>(), "simulate");
  EXPECT_TRUE(manifest.contains("wall_clock_s"));
  EXPECT_TRUE(manifest.contains("tool_version"));
}

TEST(Cli, BetaParameterizationMatchesRho) {
  const fs::path d1 = fresh_dir("beta_rho_a");
  const fs::path d2 = fresh_dir("beta_rho_b");
  ASSERT_EQ(run_cli("stability --rho-v 0.4 --out " + d1.string()), 0);
  ASSERT_EQ(run_cli("stability --beta-v 0.2 --out " + d2.string()), 0);
  const json a = read_json(d1 / "stability.json");
  const json b = read_json(d2 / "stability.json");
  EXPECT_EQ(a.at("rho_v").get<double>(), b.at("rho_v").get<double>());
  EXPECT_EQ(a.at("stable"), b.at("stable"));
}

TEST(Cli, StabilityReportFields) {
  const fs::path dir = fresh_dir("stability");
  ASSERT_EQ(run_cli("stability --a 2 --gx 6.2 --gv 10 --rho-x 0.5 --rho-v 0.4 --out " + dir.string()),
            0);
  const json j = read_json(dir / "stability.json");
  EXPECT_TRUE(j.at("stable").get<bool>());
  EXPECT_NEAR(j.at("beta_v_bound").get<double>(), 0.30858, 1e-4);
}

TEST(Cli, PredictRejectsInfeasibleParameters) {
  const fs::path dir = fresh_dir("predict_bad");
  EXPECT_EQ(run_cli("predict --n 50 --rho-x 0.4 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("predict --n 50 --out " + fresh_dir("predict_ok").string()), 0);
}

TEST(Cli, OptimizeMatchesReferenceValues) {
  const fs::path dir = fresh_dir("optimize");
  ASSERT_EQ(run_cli("optimize --a 2 --eps 0.1 --gmax 10 --out " + dir.string()), 0);
  const json j = read_json(dir / "optimize.json");
  EXPECT_NEAR(j.at("gv").get<double>(), 10.0, 1e-9);
  EXPECT_NEAR(j.at("rho_v").get<double>(), 0.396, 0.01);
  EXPECT_NEAR(j.at("gx").get<double>(), 6.2, 0.2);
  EXPECT_EQ(run_cli("optimize --a 2 --eps 0.5 --out " + dir.string()), 2);
}

TEST(Cli, VerifyTableShape) {
  const fs::path dir = fresh_dir("verify");
  ASSERT_EQ(run_cli("verify --n-list 30,60 --out " + dir.string()), 0);
  std::ifstream in(dir / "verify.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "N,chi,pred,meas,theta");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 8);
}

TEST(Cli, ScalingWritesTableAndClassification) {
  const fs::path dir = fresh_dir("scaling");
  ASSERT_EQ(run_cli("scaling --n-list 15,25,35,60 --out " + dir.string()), 0);
  ASSERT_TRUE(fs::exists(dir / "scaling.csv"));
  std::ifstream in(dir / "scaling.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "series,N,theta,diverged,tail_extrapolated");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 16);  // four series over four platoon sizes

  ASSERT_TRUE(fs::exists(dir / "classification.json"));
  const json c = read_json(dir / "classification.json");
  EXPECT_TRUE(c.contains("verdict"));
  EXPECT_EQ(c.at("n_grid").size(), 4u);
  EXPECT_EQ(c.at("max_errors").size(), 4u);
  EXPECT_TRUE(c.at("slopes").contains("exp_slope"));
}

TEST(Cli, SweepFrictionWritesTableAndCritical) {
  const fs::path dir = fresh_dir("sweep_friction");
  ASSERT_EQ(run_cli("sweep-friction --range 1.8:2.0:0.1 --n 40 --out " + dir.string()), 0);
  ASSERT_TRUE(fs::exists(dir / "friction_sweep.csv"));
  const json manifest = read_json(dir / "manifest.json");
  EXPECT_NEAR(manifest.at("a_star").get<double>(), 1.5144, 1e-3);
  EXPECT_EQ(manifest.at("topology").get<std::string>(), "circular");
}

TEST(Cli, SweepAsymWritesTableAndArgmin) {
  const fs::path dir = fresh_dir("sweep_asym");
  ASSERT_EQ(run_cli("sweep-asym --range 0.38:0.42:0.02 --n 40 --out " + dir.string()), 0);
  ASSERT_TRUE(fs::exists(dir / "asym_sweep.csv"));
  std::ifstream in(dir / "asym_sweep.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "rho_v,theta,margin,diverged,tail_extrapolated");
  const json manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest.at("topology").get<std::string>(), "path");
  const double argmin = manifest.at("argmin_rho_v").get<double>();
  EXPECT_GE(argmin, 0.38);
  EXPECT_LE(argmin, 0.42);
}

TEST(Cli, CompareStrategiesWritesTracesAndSummary) {
  const fs::path dir = fresh_dir("compare");
  ASSERT_EQ(run_cli("compare-strategies --n 25 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "trace_symmetric.csv"));
  EXPECT_TRUE(fs::exists(dir / "trace_identical.csv"));
  EXPECT_TRUE(fs::exists(dir / "trace_velocity_only.csv"));
  std::ifstream in(dir / "summary.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "case,rho_x,rho_v,max_abs_error,theta,settled,diverged");
}

TEST(Cli, DivergedSimulationExitsTwo) {
  const fs::path dir = fresh_dir("diverged");
  // unstable ring with a displaced agent: hits the overflow guard
  const int code = run_cli(
      "simulate --n 40 --a 3 --gx 2 --gv 3 --rho-x 0.33 --rho-v 0.33 --topology circular "
      "--displace-agent 20 --displacement 2 --t-end 4000 --stride 50 --out " +
      dir.string());
  EXPECT_EQ(code, 2);
  const json meta = read_json(dir / "trace.meta.json");
  EXPECT_TRUE(meta.at("diverged").get<bool>());
}
