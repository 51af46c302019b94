#ifndef PLATOONLAB_TRACE_IO_HPP
#define PLATOONLAB_TRACE_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "platoonlab/simulate.hpp"
#include "platoonlab/spectral.hpp"
#include "platoonlab/transient.hpp"

namespace platoon {

inline nlohmann::json params_json(const PlatoonParams& p) {
  return {{"N", p.n_followers}, {"a", p.friction},   {"gx", p.gain_x},
          {"gv", p.gain_v},     {"rho_x", p.asym_x}, {"rho_v", p.asym_v}};
}

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes "t,e_0,...,e_N" rows at full double precision.
inline void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  const int n = trace.n_vehicles();
  out << "t";
  for (int i = 0; i < n; ++i) out << ",e_" << i;
  out << "\n";
  for (int k = 0; k < trace.n_samples(); ++k) {
    out << format_g17(trace.times(k));
    for (int i = 0; i < n; ++i) out << ',' << format_g17(trace.errors(k, i));
    out << "\n";
  }
}

struct TraceData {
  Eigen::VectorXd times;
  Eigen::MatrixXd errors;
};

inline TraceData read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_trace_csv: empty file " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_trace_csv: no data rows in " + path);
  const int cols = static_cast<int>(rows.front().size()) - 1;
  TraceData data;
  data.times.resize(rows.size());
  data.errors.resize(rows.size(), cols);
  for (size_t k = 0; k < rows.size(); ++k) {
    if (static_cast<int>(rows[k].size()) != cols + 1)
      throw std::runtime_error("read_trace_csv: ragged row in " + path);
    data.times(k) = rows[k][0];
    for (int i = 0; i < cols; ++i) data.errors(k, i) = rows[k][i + 1];
  }
  return data;
}

inline nlohmann::json trace_metadata(const SimulationTrace& trace, double t_end) {
  return {{"N", trace.params.n_followers},
          {"a", trace.params.friction},
          {"gx", trace.params.gain_x},
          {"gv", trace.params.gain_v},
          {"rho_x", trace.params.asym_x},
          {"rho_v", trace.params.asym_v},
          {"topology", to_string(trace.topology)},
          {"dt", trace.dt},
          {"t_end", t_end},
          {"diverged", trace.diverged}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

/// "m,phi,re_nu1,im_nu1,...,c3,alpha3"; the trivial m = 0 mode carries no
/// wave, its velocity columns are written as 0.
inline void write_spectrum_csv(const SpectralScan& scan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
  out << "m,phi,re_nu1,im_nu1,re_nu2,im_nu2,re_nu3,im_nu3,c1,alpha1,c2,alpha2,c3,alpha3\n";
  for (const auto& mode : scan.modes) {
    out << mode.m << ',' << format_g17(mode.phi);
    for (const auto& r : mode.roots) out << ',' << format_g17(r.real()) << ',' << format_g17(r.imag());
    for (const auto& r : mode.roots) {
      const double c = mode.m == 0 ? 0.0 : -r.imag() / mode.phi;
      out << ',' << format_g17(c) << ',' << format_g17(r.real());
    }
    out << "\n";
  }
}

inline nlohmann::json classification_json(const PlatoonParams& p, const FlockClassification& c) {
  return {{"params", params_json(p)},
          {"n_grid", c.n_grid},
          {"max_errors", c.max_errors},
          {"slopes",
           {{"exp_slope", c.exp_slope},
            {"exp_sse", c.exp_sse},
            {"pow_slope", c.pow_slope},
            {"pow_sse", c.pow_sse}}},
          {"verdict", to_string(c.verdict)}};
}

inline nlohmann::json stability_report_json(const PlatoonParams& p, const StabilityReport& r) {
  nlohmann::json j{{"a", p.friction},
                   {"gx", p.gain_x},
                   {"gv", p.gain_v},
                   {"rho_x", p.asym_x},
                   {"rho_v", p.asym_v},
                   {"cond_I",
                    {{"friction_positive", r.cond_i.friction_positive},
                     {"gain_x_positive", r.cond_i.gain_x_positive},
                     {"gain_v_positive", r.cond_i.gain_v_positive},
                     {"friction_exceeds_gain_ratio", r.cond_i.friction_exceeds_gain_ratio},
                     {"ok", r.cond_i.ok()}}},
                   {"cond_II", r.cond_ii},
                   {"stable", r.stable}};
  j["cond_III"] = r.cond_iii ? nlohmann::json(*r.cond_iii) : nlohmann::json();
  j["beta_v_bound"] = r.beta_v_bound ? nlohmann::json(*r.beta_v_bound) : nlohmann::json();
  j["margin"] = r.margin ? nlohmann::json(*r.margin) : nlohmann::json();
  return j;
}

}  // namespace platoon

#endif
