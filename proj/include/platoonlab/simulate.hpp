#ifndef PLATOONLAB_SIMULATE_HPP
#define PLATOONLAB_SIMULATE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "platoonlab/system.hpp"

namespace platoon {

struct SimulateOptions {
  double overflow_guard = 1e12;  // |z_i| beyond this marks the run diverged
  int sample_stride = 1;         // store every k-th integration step
};

/// Time-sampled spacing errors e_i(t) = z_0(t) - z_i(t) of one experiment.
/// Column 0 is identically zero. `dt` is the sample spacing of the stored
/// rows; when the run diverges the trace is truncated at the last stored
/// sample and `diverged_at` holds the offending step time.
struct SimulationTrace {
  PlatoonParams params;
  Topology topology = Topology::Path;
  double dt = 0.0;
  Eigen::VectorXd times;
  Eigen::MatrixXd errors;  // rows = samples, cols = vehicles 0..N
  bool diverged = false;
  double diverged_at = 0.0;

  int n_vehicles() const { return static_cast<int>(errors.cols()); }
  int n_samples() const { return static_cast<int>(errors.rows()); }
};

/// Integrates d/dt (z, z_dot, z_ddot) = A (z, z_dot, z_ddot) with the
/// classical fixed-step 4th-order scheme, sampling t = 0, dt, 2dt, ...
/// until the sample grid covers t_end.
inline SimulationTrace simulate(const PlatoonSystem& system, const StateVector& initial, double dt,
                                double t_end, const SimulateOptions& opt = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (!(t_end > dt)) throw std::invalid_argument("simulate: t_end must exceed dt");
  if (opt.sample_stride < 1) throw std::invalid_argument("simulate: sample_stride must be >= 1");
  if (initial.size() != system.n_vehicles())
    throw std::invalid_argument("simulate: initial state size does not match system");

  const int n = system.n_vehicles();
  const int stride = opt.sample_stride;
  const double sample_dt = dt * stride;
  const long n_samples = static_cast<long>(std::ceil(t_end / sample_dt - 1e-12)) + 1;
  const long n_steps = (n_samples - 1) * stride;

  SimulationTrace trace;
  trace.params = system.params();
  trace.topology = system.topology();
  trace.dt = sample_dt;
  trace.times.resize(n_samples);
  trace.errors.resize(n_samples, n);

  Eigen::VectorXd y = initial.flat();
  Eigen::VectorXd k1(3 * n), k2(3 * n), k3(3 * n), k4(3 * n), tmp(3 * n);

  auto record = [&](long row, double t) {
    trace.times(row) = t;
    const double z0 = y(0);
    for (int i = 0; i < n; ++i) trace.errors(row, i) = z0 - y(i);
  };
  record(0, 0.0);

  long row = 1;
  for (long step = 1; step <= n_steps; ++step) {
    system.derivative(y, k1);
    tmp = y + (0.5 * dt) * k1;
    system.derivative(tmp, k2);
    tmp = y + (0.5 * dt) * k2;
    system.derivative(tmp, k3);
    tmp = y + dt * k3;
    system.derivative(tmp, k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double zmax = y.head(n).cwiseAbs().maxCoeff();
    if (!(zmax <= opt.overflow_guard) || !y.allFinite()) {
      trace.diverged = true;
      trace.diverged_at = step * dt;
      trace.times.conservativeResize(row);
      trace.errors.conservativeResize(row, n);
      return trace;
    }
    if (step % stride == 0) {
      record(row, step * dt);
      ++row;
    }
  }
  return trace;
}

}  // namespace platoon

#endif
