#ifndef PLATOONLAB_SPECTRAL_HPP
#define PLATOONLAB_SPECTRAL_HPP

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "platoonlab/cubic.hpp"
#include "platoonlab/params.hpp"

namespace platoon {

/// Eigenvalue of gain * L for the circulant Laplacian at wavenumber phi:
/// gain * [(1 - cos phi) + i (1 - 2 asym) sin phi].
inline Complex circulant_eigenvalue(double gain, double asym, double phi) {
  return gain * Complex(1.0 - std::cos(phi), (1.0 - 2.0 * asym) * std::sin(phi));
}

/// The three closed-loop roots of nu^3 + a nu^2 + lambda_v nu + lambda_x,
/// sorted by (Re, Im).
inline std::array<Complex, 3> solve_mode_cubic(double friction, Complex lambda_v, Complex lambda_x) {
  return solve_cubic(Complex(friction, 0.0), lambda_v, lambda_x);
}

/// Per-wavenumber slice of the circular spectrum.
struct ModeSpectrum {
  int m = 0;
  double phi = 0.0;
  Complex lambda_x;
  Complex lambda_v;
  std::array<Complex, 3> roots;
};

struct NecessaryConditions {
  bool friction_positive = false;
  bool gain_x_positive = false;
  bool gain_v_positive = false;
  bool friction_exceeds_gain_ratio = false;  // a > g_x / g_v
  bool position_symmetric = false;           // rho_x = 1/2 (abs tol 1e-12)

  bool all() const {
    return friction_positive && gain_x_positive && gain_v_positive &&
           friction_exceeds_gain_ratio && position_symmetric;
  }
};

inline NecessaryConditions check_necessary(const PlatoonParams& p) {
  NecessaryConditions c;
  c.friction_positive = p.friction > 0.0;
  c.gain_x_positive = p.gain_x > 0.0;
  c.gain_v_positive = p.gain_v > 0.0;
  c.friction_exceeds_gain_ratio = c.gain_v_positive && p.friction > p.gain_x / p.gain_v;
  c.position_symmetric = std::abs(p.asym_x - 0.5) <= 1e-12;
  return c;
}

/// Full circular stability verdict.
///
/// cond_i:   a > 0, g_x > 0, g_v > 0 and a > g_x/g_v
/// cond_ii:  rho_x = 1/2
/// cond_iii: |beta_v| < (a g_v - g_x) / sqrt(2 g_v^3)
///
/// The bound, margin and cond_iii are only evaluated when cond_i holds;
/// otherwise they stay empty and the system is already unstable via cond_i.
struct StabilityReport {
  struct CondI {
    bool friction_positive = false;
    bool gain_x_positive = false;
    bool gain_v_positive = false;
    bool friction_exceeds_gain_ratio = false;
    bool ok() const {
      return friction_positive && gain_x_positive && gain_v_positive && friction_exceeds_gain_ratio;
    }
  };

  CondI cond_i;
  bool cond_ii = false;
  std::optional<bool> cond_iii;
  std::optional<double> beta_v_bound;  // (a g_v - g_x) / sqrt(2 g_v^3)
  std::optional<double> margin;        // bound - |beta_v|
  bool stable = false;
};

inline double stability_bound(double friction, double gain_x, double gain_v) {
  return (friction * gain_v - gain_x) / std::sqrt(2.0 * gain_v * gain_v * gain_v);
}

inline StabilityReport check_circular_stability(const PlatoonParams& p) {
  StabilityReport r;
  const NecessaryConditions nc = check_necessary(p);
  r.cond_i.friction_positive = nc.friction_positive;
  r.cond_i.gain_x_positive = nc.gain_x_positive;
  r.cond_i.gain_v_positive = nc.gain_v_positive;
  r.cond_i.friction_exceeds_gain_ratio = nc.friction_exceeds_gain_ratio;
  r.cond_ii = nc.position_symmetric;
  if (r.cond_i.ok()) {
    const double bound = stability_bound(p.friction, p.gain_x, p.gain_v);
    r.beta_v_bound = bound;
    r.margin = bound - std::abs(p.beta_v());
    r.cond_iii = *r.margin > 0.0;
  }
  r.stable = r.cond_i.ok() && r.cond_ii && r.cond_iii.value_or(false);
  return r;
}

/// Brute-force spectrum of the circular system at a concrete N.
///
/// The verdict is the largest real part over all per-mode roots, excluding
/// the two zero roots of the trivial m = 0 mode (its third root -a is kept).
struct SpectralScan {
  std::vector<ModeSpectrum> modes;
  double max_real_part = -std::numeric_limits<double>::infinity();
  int argmax_mode = 0;
  bool stable = false;
};

inline SpectralScan spectral_scan(const PlatoonParams& p, int n_followers) {
  if (n_followers < 1) throw std::invalid_argument("spectral_scan: n_followers must be >= 1");
  SpectralScan scan;
  scan.modes.reserve(n_followers + 1);
  const int count = n_followers + 1;
  for (int m = 0; m < count; ++m) {
    ModeSpectrum ms;
    ms.m = m;
    ms.phi = 2.0 * M_PI * m / count;
    if (m == 0) {
      // nu^2 (nu + a) = 0; the double zero is the trivial pair
      ms.lambda_x = ms.lambda_v = Complex(0.0, 0.0);
      ms.roots = {Complex(-p.friction, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
      if (-p.friction > scan.max_real_part) {
        scan.max_real_part = -p.friction;
        scan.argmax_mode = 0;
      }
    } else {
      ms.lambda_x = circulant_eigenvalue(p.gain_x, p.asym_x, ms.phi);
      ms.lambda_v = circulant_eigenvalue(p.gain_v, p.asym_v, ms.phi);
      ms.roots = solve_mode_cubic(p.friction, ms.lambda_v, ms.lambda_x);
      for (const auto& r : ms.roots) {
        if (r.real() > scan.max_real_part) {
          scan.max_real_part = r.real();
          scan.argmax_mode = m;
        }
      }
    }
    scan.modes.push_back(ms);
  }
  scan.stable = scan.max_real_part < 0.0;
  return scan;
}

/// Signal velocities c_+ > 0 and c_- < 0 in vehicles/second:
/// c = (g_v beta_v +- sqrt(g_v^2 beta_v^2 + 2 a g_x)) / (2 a).
struct WaveVelocities {
  double c_plus = 0.0;
  double c_minus = 0.0;

  double abs_sum() const { return std::abs(c_plus) + std::abs(c_minus); }
  double abs_diff() const { return std::abs(c_plus) - std::abs(c_minus); }
  double abs_product() const { return std::abs(c_plus) * std::abs(c_minus); }
};

inline WaveVelocities signal_velocities(const PlatoonParams& p) {
  if (!(p.friction > 0.0) || !(p.gain_x > 0.0))
    throw std::invalid_argument("signal_velocities: requires a > 0 and g_x > 0");
  const double gb = p.gain_v * p.beta_v();
  const double disc = std::sqrt(gb * gb + 2.0 * p.friction * p.gain_x);
  return {(gb + disc) / (2.0 * p.friction), (gb - disc) / (2.0 * p.friction)};
}

/// One (velocity, damping) sample of a root branch: c = -Im(nu)/phi,
/// alpha = Re(nu).
struct PhaseVelocityPoint {
  Complex nu;
  double velocity = 0.0;
  double damping = 0.0;
};

/// The three root branches over a phi grid, ordered consistently across the
/// grid by continuity.
struct PhaseVelocityCurves {
  std::vector<double> phi;
  std::array<std::vector<PhaseVelocityPoint>, 3> branches;
};

inline PhaseVelocityCurves phase_velocity_curves(const PlatoonParams& p,
                                                 const std::vector<double>& phi_grid) {
  PhaseVelocityCurves out;
  out.phi = phi_grid;
  for (auto& b : out.branches) b.reserve(phi_grid.size());

  std::array<Complex, 3> prev{};
  bool have_prev = false;
  for (double phi : phi_grid) {
    if (!(phi > 0.0) || !(phi < 2.0 * M_PI))
      throw std::invalid_argument("phase_velocity_curves: phi must lie in (0, 2*pi)");
    const Complex lx = circulant_eigenvalue(p.gain_x, p.asym_x, phi);
    const Complex lv = circulant_eigenvalue(p.gain_v, p.asym_v, phi);
    std::array<Complex, 3> roots = solve_mode_cubic(p.friction, lv, lx);

    if (have_prev) {
      // keep branches continuous: minimal total distance over the 3! pairings
      static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      double best = std::numeric_limits<double>::infinity();
      int best_p = 0;
      for (int pi = 0; pi < 6; ++pi) {
        double cost = 0.0;
        for (int b = 0; b < 3; ++b) cost += std::abs(roots[perms[pi][b]] - prev[b]);
        if (cost < best) {
          best = cost;
          best_p = pi;
        }
      }
      std::array<Complex, 3> matched;
      for (int b = 0; b < 3; ++b) matched[b] = roots[perms[best_p][b]];
      roots = matched;
    }
    prev = roots;
    have_prev = true;

    for (int b = 0; b < 3; ++b)
      out.branches[b].push_back({roots[b], -roots[b].imag() / phi, roots[b].real()});
  }
  return out;
}

/// Uniform grid of `count` interior points on (0, 2*pi).
inline std::vector<double> default_phi_grid(int count = 2000) {
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = 2.0 * M_PI * (i + 1) / (count + 1);
  return grid;
}

}  // namespace platoon

#endif
