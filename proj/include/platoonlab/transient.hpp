#ifndef PLATOONLAB_TRANSIENT_HPP
#define PLATOONLAB_TRANSIENT_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/simulate.hpp"
#include "platoonlab/spectral.hpp"

namespace platoon {

/// Leader-step transient of the last vehicle as predicted from the wave
/// velocities: first amplitude A1 = N/|c+|, geometric amplitude decay
/// |c-|/|c+| and half-period T = N (1/|c+| + 1/|c-|).
struct TransientPrediction {
  double a1 = 0.0;
  double decay_ratio = 0.0;
  double half_period = 0.0;
};

/// Wave clock of one boundary-to-boundary round trip; defined for any
/// a > 0, g_x > 0 regardless of stability.
inline double wave_period(const PlatoonParams& p, int n_followers) {
  const WaveVelocities c = signal_velocities(p);
  return n_followers * (1.0 / std::abs(c.c_plus) + 1.0 / std::abs(c.c_minus));
}

inline TransientPrediction predict_transient(const PlatoonParams& p, int n_followers) {
  if (n_followers < 1) throw std::invalid_argument("predict_transient: n_followers must be >= 1");
  if (!check_circular_stability(p).stable)
    throw std::domain_error("predict_transient: parameters fail the circular stability conditions");
  const WaveVelocities c = signal_velocities(p);
  return {n_followers / std::abs(c.c_plus), std::abs(c.c_minus) / std::abs(c.c_plus),
          wave_period(p, n_followers)};
}

/// Half-period and per-window peak magnitudes measured from a trace.
struct TransientMeasurement {
  double half_period = 0.0;
  std::vector<double> amplitudes;
  int n_oscillations = 0;

  /// Robust decay-ratio estimate: median of successive amplitude ratios.
  double decay_ratio() const {
    if (amplitudes.size() < 2)
      throw std::runtime_error("decay_ratio: needs at least two amplitudes");
    std::vector<double> r(amplitudes.size() - 1);
    for (size_t i = 0; i + 1 < amplitudes.size(); ++i) r[i] = amplitudes[i + 1] / amplitudes[i];
    std::sort(r.begin(), r.end());
    const size_t k = r.size() / 2;
    return r.size() % 2 ? r[k] : 0.5 * (r[k - 1] + r[k]);
  }
};

/// Measures the orbit of e_N(t): the half-period T is the first return to
/// zero after e_N departs (departure threshold 1e-6 of the peak, crossing
/// located by linear interpolation), and A_i = max |e_N| over
/// [(i-1)T, iT] for as many full windows as the trace covers.
inline TransientMeasurement measure_transient(const SimulationTrace& trace) {
  if (trace.diverged) throw std::invalid_argument("measure_transient: trace diverged");
  const int n_samples = trace.n_samples();
  const int last = trace.n_vehicles() - 1;
  if (n_samples < 3) throw std::runtime_error("measure_transient: trace too short");

  const auto e = trace.errors.col(last);
  const double peak = e.cwiseAbs().maxCoeff();
  if (peak == 0.0) throw std::runtime_error("measure_transient: no crossing found");
  const double threshold = 1e-6 * peak;

  int departed = -1;
  for (int k = 0; k < n_samples; ++k) {
    if (std::abs(e(k)) > threshold) {
      departed = k;
      break;
    }
  }
  if (departed < 0) throw std::runtime_error("measure_transient: no crossing found");

  double t_cross = -1.0;
  for (int k = departed + 1; k < n_samples; ++k) {
    const double prev = e(k - 1), cur = e(k);
    if (prev * cur <= 0.0 && (prev != 0.0 || cur != 0.0)) {
      t_cross = trace.times(k - 1) + (trace.times(k) - trace.times(k - 1)) * prev / (prev - cur);
      break;
    }
  }
  if (t_cross <= 0.0) throw std::runtime_error("measure_transient: no crossing found");

  TransientMeasurement m;
  m.half_period = t_cross;
  const double t_last = trace.times(n_samples - 1);
  const int windows = static_cast<int>(std::floor(t_last / t_cross + 1e-9));
  if (windows < 2 || t_cross < 2.0 * trace.dt)
    throw std::runtime_error("measure_transient: trace too short");

  const double h = trace.dt;
  for (int w = 1; w <= windows; ++w) {
    const int k_lo = std::max(0, static_cast<int>(std::ceil((w - 1) * t_cross / h - 1e-9)));
    const int k_hi = std::min(n_samples - 1, static_cast<int>(std::floor(w * t_cross / h + 1e-9)));
    double amp = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) amp = std::max(amp, std::abs(e(k)));
    m.amplitudes.push_back(amp);
  }
  m.n_oscillations = windows;
  return m;
}

/// log10 |predicted/measured - 1|, floored at 1e-300 (reported as -300 for
/// an exact match).
inline double relative_error(double predicted, double measured) {
  if (measured == 0.0) throw std::invalid_argument("relative_error: measured value is zero");
  const double arg = std::max(std::abs(predicted / measured - 1.0), 1e-300);
  return std::log10(arg);
}

/// Total absolute spacing error Theta = sum_i integral |e_i| dt and its
/// per-vehicle breakdown.
struct ErrorSummary {
  double theta = 0.0;
  Eigen::VectorXd per_vehicle;
};

/// Trapezoidal quadrature of |e_i| over the stored trace only.
inline ErrorSummary integrate_absolute_error(const SimulationTrace& trace) {
  if (trace.diverged) throw std::invalid_argument("integrate_absolute_error: trace diverged");
  const int n = trace.n_vehicles();
  const int samples = trace.n_samples();
  ErrorSummary s;
  s.per_vehicle = Eigen::VectorXd::Zero(n);
  for (int k = 1; k < samples; ++k) {
    const double h = trace.times(k) - trace.times(k - 1);
    for (int i = 0; i < n; ++i)
      s.per_vehicle(i) += 0.5 * h * (std::abs(trace.errors(k - 1, i)) + std::abs(trace.errors(k, i)));
  }
  s.theta = s.per_vehicle.sum();
  return s;
}

/// Theta with the tail beyond the trace horizon extrapolated geometrically:
/// the last full measured window of each vehicle repeats with the measured
/// decay ratio r, contributing (last window integral) * r / (1 - r).
inline ErrorSummary total_absolute_error(const SimulationTrace& trace) {
  ErrorSummary s = integrate_absolute_error(trace);
  const TransientMeasurement m = measure_transient(trace);
  const double r = m.decay_ratio();
  if (r >= 1.0) throw std::runtime_error("total_absolute_error: non-convergent tail");

  const int n = trace.n_vehicles();
  const int samples = trace.n_samples();
  const double t_tail = trace.times(samples - 1) - m.half_period;
  Eigen::VectorXd tail = Eigen::VectorXd::Zero(n);
  for (int k = 1; k < samples; ++k) {
    if (trace.times(k) <= t_tail) continue;
    const double lo = std::max(trace.times(k - 1), t_tail);
    const double h = trace.times(k) - lo;
    const double w = (trace.times(k) - trace.times(k - 1));
    // linear interpolation of |e| onto the clipped interval
    for (int i = 0; i < n; ++i) {
      const double e0 = std::abs(trace.errors(k - 1, i));
      const double e1 = std::abs(trace.errors(k, i));
      const double elo = e0 + (e1 - e0) * (lo - trace.times(k - 1)) / w;
      tail(i) += 0.5 * h * (elo + e1);
    }
  }
  s.per_vehicle += tail * (r / (1.0 - r));
  s.theta = s.per_vehicle.sum();
  return s;
}

/// N-independent factor of the total-error estimate:
/// J = 2a sqrt(1/g_x^2 + 2a/(g_v^2 beta_v^2 g_x)).
inline double j_hat(const PlatoonParams& p) {
  const double bv = p.beta_v();
  if (bv == 0.0) throw std::invalid_argument("j_hat: beta_v = 0 is singular");
  if (!(p.gain_x > 0.0) || !(p.gain_v > 0.0))
    throw std::invalid_argument("j_hat: gains must be positive");
  const double inner = 1.0 / (p.gain_x * p.gain_x) +
                       2.0 * p.friction / (p.gain_v * p.gain_v * bv * bv * p.gain_x);
  return 2.0 * p.friction * std::sqrt(inner);
}

/// Closed-form cubic scaling of the total absolute error:
/// Theta(N) ~ (J/12) N (N+1) (4N-1).
inline double predict_total_error(const PlatoonParams& p, int n_followers) {
  if (n_followers < 1) throw std::invalid_argument("predict_total_error: n_followers must be >= 1");
  if (p.beta_v() == 0.0)
    throw std::domain_error("predict_total_error: beta_v = 0 gives no decay");
  if (!check_circular_stability(p).stable)
    throw std::domain_error("predict_total_error: parameters fail the circular stability conditions");
  const double n = n_followers;
  return j_hat(p) / 12.0 * n * (n + 1.0) * (4.0 * n - 1.0);
}

enum class FlockVerdict { FlockStable, FlockUnstable, AsymptoticallyUnstable };

inline const char* to_string(FlockVerdict v) {
  switch (v) {
    case FlockVerdict::FlockStable: return "flock-stable";
    case FlockVerdict::FlockUnstable: return "flock-unstable";
    default: return "asymptotically-unstable";
  }
}

struct FlockClassification {
  FlockVerdict verdict = FlockVerdict::FlockStable;
  std::vector<int> n_grid;
  std::vector<double> max_errors;  // max_t |e_N(t)| per grid point
  double exp_slope = 0.0;          // log(max) against N
  double exp_sse = 0.0;
  double pow_slope = 0.0;          // log(max) against log N
  double pow_sse = 0.0;
};

namespace detail {

// least squares y ~ b0 + b1 x; returns {b1, sse}
inline std::pair<double, double> fit_line(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  const double b1 = (n * sxy - sx * sy) / denom;
  const double b0 = (sy - b1 * sx) / n;
  double sse = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - b0 - b1 * x[i];
    sse += r * r;
  }
  return {b1, sse};
}

}  // namespace detail

/// Empirical flock-stability classification from leader-step path runs.
///
/// A divergent run is asymptotic instability. Otherwise log max_t |e_N| is
/// fitted against both N and log N; growth is called exponential (flock
/// unstable) when the linear-in-N model fits better and its slope exceeds
/// log(1.05) per vehicle.
inline FlockClassification classify_flock_stability(const PlatoonParams& params,
                                                    const std::vector<int>& n_grid,
                                                    double dt = 0.01) {
  if (n_grid.size() < 4) throw std::invalid_argument("classify_flock_stability: need >= 4 grid points");
  const auto [lo, hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  if (*hi < 4 * *lo)
    throw std::invalid_argument("classify_flock_stability: grid must span at least a factor 4");

  FlockClassification c;
  c.n_grid = n_grid;
  for (int n : n_grid) {
    PlatoonParams p = params.with_n(n);
    const double horizon = 5.0 * wave_period(p, n);
    const int stride = std::max(1, static_cast<int>(std::ceil(horizon / dt / 20000.0)));
    const SimulationTrace trace = simulate(PlatoonSystem(p, Topology::Path),
                                           leader_step_initial_state(n), dt, horizon,
                                           {1e12, stride});
    if (trace.diverged) {
      c.verdict = FlockVerdict::AsymptoticallyUnstable;
      return c;
    }
    c.max_errors.push_back(trace.errors.col(n).cwiseAbs().maxCoeff());
  }

  std::vector<double> xs_n, xs_log, ys;
  for (size_t i = 0; i < n_grid.size(); ++i) {
    xs_n.push_back(static_cast<double>(n_grid[i]));
    xs_log.push_back(std::log(static_cast<double>(n_grid[i])));
    ys.push_back(std::log(c.max_errors[i]));
  }
  std::tie(c.exp_slope, c.exp_sse) = detail::fit_line(xs_n, ys);
  std::tie(c.pow_slope, c.pow_sse) = detail::fit_line(xs_log, ys);

  const bool exponential = c.exp_sse < c.pow_sse && c.exp_slope > std::log(1.05);
  c.verdict = exponential ? FlockVerdict::FlockUnstable : FlockVerdict::FlockStable;
  return c;
}

}  // namespace platoon

#endif
