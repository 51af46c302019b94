// Command-line experiment runner: simulations, spectra, stability reports,
// transient predictions and verification tables, gain optimization, and the
// scaling/robustness sweeps. Every run writes its outputs plus a manifest
// into --out.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "platoonlab/platoonlab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  platoon::PlatoonParams params;
  std::optional<double> beta_x, beta_v;
  std::string topology = "path";
  double dt = 0.01;
  double t_end = 0.0;  // 0 = five wave round trips
  int stride = 0;      // 0 = automatic
  int jobs = 0;        // 0 = automatic
  std::string out_dir = ".";

  platoon::PlatoonParams resolved() const {
    platoon::PlatoonParams p = params;
    if (beta_x) p.asym_x = platoon::rho_from_beta(*beta_x);
    if (beta_v) p.asym_v = platoon::rho_from_beta(*beta_v);
    p.validate();
    return p;
  }
};

void add_param_options(CLI::App* cmd, CommonOptions& o, bool with_n = true) {
  if (with_n) cmd->add_option("--n", o.params.n_followers, "number of followers N");
  cmd->add_option("--a", o.params.friction, "friction coefficient a");
  cmd->add_option("--gx", o.params.gain_x, "position gain g_x");
  cmd->add_option("--gv", o.params.gain_v, "velocity gain g_v");
  auto* rx = cmd->add_option("--rho-x", o.params.asym_x, "position asymmetry rho_x");
  auto* rv = cmd->add_option("--rho-v", o.params.asym_v, "velocity asymmetry rho_v");
  cmd->add_option_function<double>(
         "--beta-x", [&o](const double& b) { o.beta_x = b; },
         "position asymmetry as beta_x = 1 - 2 rho_x")
      ->excludes(rx);
  cmd->add_option_function<double>(
         "--beta-v", [&o](const double& b) { o.beta_v = b; },
         "velocity asymmetry as beta_v = 1 - 2 rho_v")
      ->excludes(rv);
  cmd->add_option("--out", o.out_dir, "output directory");
}

void add_sim_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--dt", o.dt, "integration step [s]")->check(CLI::PositiveNumber);
  cmd->add_option("--t-end", o.t_end, "horizon [s]; default is five wave round trips");
  cmd->add_option("--stride", o.stride, "store every k-th step; 0 picks automatically");
  cmd->add_option("--topology", o.topology, "path | circular")
      ->check(CLI::IsMember({"path", "circular"}));
}

struct Range {
  double lo = 0.0, hi = 0.0, step = 0.0;
};

Range parse_range(const std::string& s) {
  Range r;
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw CLI::ValidationError("--range", "expected LO:HI:STEP");
  r.lo = std::stod(s.substr(0, c1));
  r.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  r.step = std::stod(s.substr(c2 + 1));
  if (!(r.step > 0.0) || r.hi < r.lo) throw CLI::ValidationError("--range", "expected LO <= HI, STEP > 0");
  return r;
}

using platoon::params_json;

class Manifest {
 public:
  Manifest(const std::string& command, const fs::path& dir)
      : dir_(dir), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir);
    j_["command"] = command;
    j_["tool_version"] = platoon::kVersion;
  }
  json& data() { return j_; }
  void add_output(const fs::path& p) { j_["outputs"].push_back(p.filename().string()); }
  void write() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    j_["wall_clock_s"] = std::chrono::duration<double>(elapsed).count();
    platoon::write_json(j_, (dir_ / "manifest.json").string());
  }

 private:
  fs::path dir_;
  json j_;
  std::chrono::steady_clock::time_point start_;
};

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
}

std::string g17(double v) { return platoon::format_g17(v); }

// -------------------------------------------------------------------------

int cmd_simulate(const CommonOptions& o, int displace_agent, double displacement) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  const Topology topo = topology_from_string(o.topology);
  const int n = p.n_followers;

  const double horizon = o.t_end > 0.0 ? o.t_end : 5.0 * wave_period(p, n);
  SimulateOptions opt;
  opt.sample_stride = o.stride > 0 ? o.stride : 1;

  const StateVector init = displace_agent >= 0
                               ? displaced_agent_initial_state(n, displace_agent, displacement)
                               : leader_step_initial_state(n);

  Manifest manifest("simulate", o.out_dir);
  const SimulationTrace trace = simulate(PlatoonSystem(p, topo), init, o.dt, horizon, opt);

  const fs::path trace_path = fs::path(o.out_dir) / "trace.csv";
  write_trace_csv(trace, trace_path.string());
  write_json(trace_metadata(trace, horizon), (fs::path(o.out_dir) / "trace.meta.json").string());
  manifest.add_output(trace_path);
  manifest.add_output(fs::path(o.out_dir) / "trace.meta.json");
  manifest.data()["params"] = params_json(p);
  manifest.data()["topology"] = o.topology;
  manifest.data()["dt"] = o.dt;
  manifest.data()["t_end"] = horizon;
  manifest.data()["diverged"] = trace.diverged;
  manifest.write();

  std::cout << (trace.diverged ? "diverged at t=" + std::to_string(trace.diverged_at)
                               : "completed " + std::to_string(trace.n_samples()) + " samples")
            << ", trace written to " << trace_path << "\n";
  return trace.diverged ? 2 : 0;
}

int cmd_spectrum(const CommonOptions& o) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  Manifest manifest("spectrum", o.out_dir);
  const SpectralScan scan = spectral_scan(p, p.n_followers);
  const fs::path path = fs::path(o.out_dir) / "spectrum.csv";
  write_spectrum_csv(scan, path.string());
  manifest.add_output(path);
  manifest.data()["params"] = params_json(p);
  manifest.data()["max_real_part"] = scan.max_real_part;
  manifest.data()["stable"] = scan.stable;
  manifest.write();
  std::cout << "max real part " << scan.max_real_part << " (" << (scan.stable ? "stable" : "unstable")
            << "), spectrum written to " << path << "\n";
  return 0;
}

int cmd_stability(const CommonOptions& o) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  Manifest manifest("stability", o.out_dir);
  const StabilityReport r = check_circular_stability(p);
  const json j = stability_report_json(p, r);
  const fs::path path = fs::path(o.out_dir) / "stability.json";
  write_json(j, path.string());
  manifest.add_output(path);
  manifest.data()["params"] = params_json(p);
  manifest.write();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_predict(const CommonOptions& o) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  Manifest manifest("predict", o.out_dir);
  const TransientPrediction pr = predict_transient(p, p.n_followers);
  const WaveVelocities c = signal_velocities(p);
  json j{{"params", params_json(p)},
         {"c_plus", c.c_plus},
         {"c_minus", c.c_minus},
         {"A1", pr.a1},
         {"decay_ratio", pr.decay_ratio},
         {"half_period", pr.half_period}};
  const fs::path path = fs::path(o.out_dir) / "predict.json";
  write_json(j, path.string());
  manifest.add_output(path);
  manifest.write();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const CommonOptions& o, const std::vector<int>& n_list) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  Manifest manifest("verify", o.out_dir);
  const auto rows = run_verify(p, n_list, o.dt);
  std::vector<std::string> lines;
  for (const auto& r : rows)
    lines.push_back(std::to_string(r.n) + "," + r.chi + "," + g17(r.pred) + "," + g17(r.meas) +
                    "," + g17(r.theta));
  const fs::path path = fs::path(o.out_dir) / "verify.csv";
  write_csv(path, "N,chi,pred,meas,theta", lines);
  manifest.add_output(path);
  manifest.data()["params"] = params_json(p);
  manifest.data()["n_list"] = n_list;
  manifest.write();
  std::cout << "verification table (" << rows.size() << " rows) written to " << path << "\n";
  return 0;
}

int cmd_optimize(const CommonOptions& o, double eps, double gmax, double gmin) {
  using namespace platoon;
  Manifest manifest("optimize", o.out_dir);
  OptimizationProblem prob{o.params.friction, gmax, eps, gmin};
  const OptimizationResult res = optimize(prob);
  json j{{"a", prob.friction},
         {"eps", prob.epsilon},
         {"bounds", {{"lower", prob.gain_lower}, {"upper", prob.gain_upper}}},
         {"gx", res.gain_x},
         {"gv", res.gain_v},
         {"rho_v", res.asym_v},
         {"beta_v", res.beta_v},
         {"criterion", res.criterion},
         {"j_hat", res.j_hat},
         {"active_constraints", res.active_constraints},
         {"warnings", res.warnings},
         {"polish_seed", kPolishSeed}};
  manifest.data()["seeds"] = {{"polish", kPolishSeed}};
  const fs::path path = fs::path(o.out_dir) / "optimize.json";
  write_json(j, path.string());
  manifest.add_output(path);
  manifest.write();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_scaling(const CommonOptions& o, const std::vector<int>& n_list) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  Manifest manifest("scaling", o.out_dir);
  const auto rows = run_scaling(p, n_list, o.dt, o.jobs);
  std::vector<std::string> lines;
  for (const auto& r : rows)
    lines.push_back(r.series + "," + std::to_string(r.n) + "," + g17(r.theta) + "," +
                    (r.diverged ? "1" : "0") + "," + (r.tail_extrapolated ? "1" : "0"));
  const fs::path path = fs::path(o.out_dir) / "scaling.csv";
  write_csv(path, "series,N,theta,diverged,tail_extrapolated", lines);
  manifest.add_output(path);

  // flock classification of the identical-asymmetry architecture, when the
  // grid is wide enough to support the fit
  const auto [lo, hi] = std::minmax_element(n_list.begin(), n_list.end());
  if (n_list.size() >= 4 && *hi >= 4 * *lo) {
    PlatoonParams ident = p;
    ident.asym_x = p.asym_v;
    const FlockClassification c = classify_flock_stability(ident, n_list, o.dt);
    const fs::path cpath = fs::path(o.out_dir) / "classification.json";
    write_json(classification_json(ident, c), cpath.string());
    manifest.add_output(cpath);
    manifest.data()["classification"] = to_string(c.verdict);
  } else {
    manifest.data()["classification"] = "skipped (grid too narrow)";
  }

  manifest.data()["params"] = params_json(p);
  manifest.data()["n_list"] = n_list;
  manifest.write();
  std::cout << "scaling table written to " << path << "\n";
  return 0;
}

int cmd_sweep_friction(const CommonOptions& o, const std::string& range, int n) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  const Range r = parse_range(range);
  Manifest manifest("sweep-friction", o.out_dir);
  const FrictionSweep sweep = run_sweep_friction(p, r.lo, r.hi, r.step, n,
                                                 topology_from_string(o.topology), o.dt, o.jobs);
  std::vector<std::string> lines;
  int diverged = 0;
  for (const auto& pt : sweep.points) {
    lines.push_back(g17(pt.value) + "," + g17(pt.theta) + "," + g17(pt.margin) + "," +
                    (pt.diverged ? "1" : "0") + "," + (pt.tail_extrapolated ? "1" : "0"));
    diverged += pt.diverged;
  }
  const fs::path path = fs::path(o.out_dir) / "friction_sweep.csv";
  write_csv(path, "a,theta,margin,diverged,tail_extrapolated", lines);
  manifest.add_output(path);
  manifest.data()["params"] = params_json(p);
  manifest.data()["n"] = n;
  manifest.data()["topology"] = o.topology;
  manifest.data()["a_star"] = sweep.a_star;
  manifest.write();
  std::cout << "a* = " << sweep.a_star << ", sweep written to " << path << "\n";
  return diverged == static_cast<int>(sweep.points.size()) ? 2 : 0;
}

int cmd_sweep_asym(const CommonOptions& o, const std::string& range, int n) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  const Range r = parse_range(range);
  Manifest manifest("sweep-asym", o.out_dir);
  const AsymSweep sweep =
      run_sweep_asym(p, r.lo, r.hi, r.step, n, topology_from_string(o.topology), o.dt, o.jobs);
  std::vector<std::string> lines;
  int diverged = 0;
  for (const auto& pt : sweep.points) {
    lines.push_back(g17(pt.value) + "," + g17(pt.theta) + "," + g17(pt.margin) + "," +
                    (pt.diverged ? "1" : "0") + "," + (pt.tail_extrapolated ? "1" : "0"));
    diverged += pt.diverged;
  }
  const fs::path path = fs::path(o.out_dir) / "asym_sweep.csv";
  write_csv(path, "rho_v,theta,margin,diverged,tail_extrapolated", lines);
  manifest.add_output(path);
  manifest.data()["params"] = params_json(p);
  manifest.data()["n"] = n;
  manifest.data()["topology"] = o.topology;
  manifest.data()["argmin_rho_v"] = sweep.argmin_rho_v;
  manifest.write();
  std::cout << "argmin rho_v = " << sweep.argmin_rho_v << ", sweep written to " << path << "\n";
  return diverged == static_cast<int>(sweep.points.size()) ? 2 : 0;
}

int cmd_compare(const CommonOptions& o, int n) {
  using namespace platoon;
  const PlatoonParams p = o.resolved();
  Manifest manifest("compare-strategies", o.out_dir);
  const auto results = run_compare_strategies(p, n, o.dt);
  std::vector<std::string> lines;
  int diverged = 0;
  for (const auto& r : results) {
    const fs::path tpath = fs::path(o.out_dir) / ("trace_" + r.name + ".csv");
    write_trace_csv(r.trace, tpath.string());
    manifest.add_output(tpath);
    lines.push_back(r.name + "," + g17(r.rho_x) + "," + g17(r.rho_v) + "," + g17(r.max_abs_error) +
                    "," + g17(r.theta) + "," + (r.settled ? "1" : "0") + "," +
                    (r.diverged ? "1" : "0"));
    diverged += r.diverged;
  }
  const fs::path path = fs::path(o.out_dir) / "summary.csv";
  write_csv(path, "case,rho_x,rho_v,max_abs_error,theta,settled,diverged", lines);
  manifest.add_output(path);
  manifest.data()["gains"] = params_json(p);
  manifest.data()["n"] = n;
  manifest.write();
  std::cout << "strategy comparison written to " << path << "\n";
  return diverged == static_cast<int>(results.size()) ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"platoonlab: asymmetric vehicle platoon simulation and analysis"};
  app.set_version_flag("--version", platoon::kVersion);
  app.require_subcommand(1);

  CommonOptions o;
  int displace_agent = -1;
  double displacement = 0.0;
  std::vector<int> n_list;
  std::string range;
  std::string friction_topology = "circular";  // the ring surrogate shows the instability
  std::string asym_topology = "path";          // Theta(rho_v) follows the closed-form criterion
  double eps = 0.1, gmax = 10.0, gmin = 1e-3;
  int sweep_n = 300;
  int compare_n = 100;

  auto* sim = app.add_subcommand("simulate", "integrate one leader-step or displaced-agent run");
  add_param_options(sim, o);
  add_sim_options(sim, o);
  sim->add_option("--displace-agent", displace_agent, "displace this agent instead of stepping the leader");
  sim->add_option("--displacement", displacement, "initial displacement [m]");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "per-mode circular eigenvalues and phase velocities");
  add_param_options(spectrum_cmd, o);

  auto* stab = app.add_subcommand("stability", "circular stability report");
  add_param_options(stab, o);

  auto* pred = app.add_subcommand("predict", "transient prediction from the wave velocities");
  add_param_options(pred, o);

  auto* verify = app.add_subcommand("verify", "predicted vs measured transients over an N list");
  add_param_options(verify, o, false);
  verify->add_option("--n-list", n_list, "follower counts")->required()->delimiter(',');
  verify->add_option("--dt", o.dt, "integration step [s]")->check(CLI::PositiveNumber);

  auto* opt = app.add_subcommand("optimize", "constrained gain/asymmetry selection");
  opt->add_option("--a", o.params.friction, "friction coefficient a");
  opt->add_option("--eps", eps, "stability margin epsilon");
  opt->add_option("--gmax", gmax, "upper bound on both gains");
  opt->add_option("--gmin", gmin, "lower bound on both gains");
  opt->add_option("--out", o.out_dir, "output directory");

  auto* scal = app.add_subcommand("scaling", "Theta(N) for the three architectures");
  add_param_options(scal, o, false);
  scal->add_option("--n-list", n_list, "follower counts")->required()->delimiter(',');
  scal->add_option("--dt", o.dt, "integration step [s]")->check(CLI::PositiveNumber);
  scal->add_option("--jobs", o.jobs, "worker threads, 0 = auto");

  auto* swf = app.add_subcommand("sweep-friction", "Theta(a) and the critical friction");
  add_param_options(swf, o, false);
  swf->add_option("--range", range, "a range LO:HI:STEP")->required();
  swf->add_option("--n", sweep_n, "follower count for the sweep");
  swf->add_option("--dt", o.dt, "integration step [s]")->check(CLI::PositiveNumber);
  swf->add_option("--jobs", o.jobs, "worker threads, 0 = auto");
  swf->add_option("--topology", friction_topology, "path | circular (default circular)")
      ->check(CLI::IsMember({"path", "circular"}));

  auto* swa = app.add_subcommand("sweep-asym", "Theta(rho_v)");
  add_param_options(swa, o, false);
  swa->add_option("--range", range, "rho_v range LO:HI:STEP")->required();
  swa->add_option("--n", sweep_n, "follower count for the sweep");
  swa->add_option("--dt", o.dt, "integration step [s]")->check(CLI::PositiveNumber);
  swa->add_option("--jobs", o.jobs, "worker threads, 0 = auto");
  swa->add_option("--topology", asym_topology, "path | circular (default path)")
      ->check(CLI::IsMember({"path", "circular"}));

  auto* cmp = app.add_subcommand("compare-strategies", "the three asymmetry placements side by side");
  add_param_options(cmp, o, false);
  cmp->add_option("--n", compare_n, "follower count (default 100)");
  cmp->add_option("--dt", o.dt, "integration step [s]")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, displace_agent, displacement);
    if (spectrum_cmd->parsed()) return cmd_spectrum(o);
    if (stab->parsed()) return cmd_stability(o);
    if (pred->parsed()) return cmd_predict(o);
    if (verify->parsed()) return cmd_verify(o, n_list);
    if (opt->parsed()) return cmd_optimize(o, eps, gmax, gmin);
    if (scal->parsed()) return cmd_scaling(o, n_list);
    if (swf->parsed()) {
      o.topology = friction_topology;
      return cmd_sweep_friction(o, range, sweep_n);
    }
    if (swa->parsed()) {
      o.topology = asym_topology;
      return cmd_sweep_asym(o, range, sweep_n);
    }
    if (cmp->parsed()) return cmd_compare(o, compare_n);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
