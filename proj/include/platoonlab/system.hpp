#ifndef PLATOONLAB_SYSTEM_HPP
#define PLATOONLAB_SYSTEM_HPP

#include <Eigen/Dense>
#include <stdexcept>

#include "platoonlab/laplacian.hpp"
#include "platoonlab/params.hpp"

namespace platoon {

/// Error-coordinate state (z, z_dot, z_ddot), one entry per vehicle.
struct StateVector {
  Eigen::VectorXd z;       // [m]
  Eigen::VectorXd z_dot;   // [m/s]
  Eigen::VectorXd z_ddot;  // [m/s^2]

  int size() const { return static_cast<int>(z.size()); }

  static StateVector zero(int n_vehicles) {
    return {Eigen::VectorXd::Zero(n_vehicles), Eigen::VectorXd::Zero(n_vehicles),
            Eigen::VectorXd::Zero(n_vehicles)};
  }

  Eigen::VectorXd flat() const {
    const int n = size();
    Eigen::VectorXd y(3 * n);
    y.segment(0, n) = z;
    y.segment(n, n) = z_dot;
    y.segment(2 * n, n) = z_ddot;
    return y;
  }

  StateVector scaled(double alpha) const { return {alpha * z, alpha * z_dot, alpha * z_ddot}; }
};

/// State at t = 0+ when the platoon rests at its desired spacing and the
/// leader switches to unit velocity: all z are zero, follower velocity
/// errors are -1 and accelerations vanish.
inline StateVector leader_step_initial_state(int n_followers) {
  if (n_followers < 1) throw std::invalid_argument("leader_step_initial_state: n_followers must be >= 1");
  StateVector s = StateVector::zero(n_followers + 1);
  s.z_dot.tail(n_followers).setConstant(-1.0);
  return s;
}

/// State with a single vehicle displaced from its desired position, at rest.
inline StateVector displaced_agent_initial_state(int n_followers, int agent, double displacement) {
  if (n_followers < 1) throw std::invalid_argument("displaced_agent_initial_state: n_followers must be >= 1");
  if (agent < 0 || agent > n_followers)
    throw std::out_of_range("displaced_agent_initial_state: agent index outside 0..N");
  StateVector s = StateVector::zero(n_followers + 1);
  s.z(agent) = displacement;
  return s;
}

/// Dense block state matrix of order 3(N+1):
///
///   [ 0        I        0    ]
///   [ 0        0        I    ]
///   [ -g_x L_x -g_v L_v -a I ]
inline Eigen::MatrixXd assemble_system(const PlatoonParams& p, Topology topology) {
  p.validate();
  const int n = p.n_followers + 1;
  const LaplacianPair lap = make_laplacian_pair(p, topology);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  a.block(0, n, n, n).setIdentity();
  a.block(n, 2 * n, n, n).setIdentity();
  a.block(2 * n, 0, n, n) = -p.gain_x * lap.l_x;
  a.block(2 * n, n, n, n) = -p.gain_v * lap.l_v;
  a.block(2 * n, 2 * n, n, n) = -p.friction * Eigen::MatrixXd::Identity(n, n);
  return a;
}

/// The closed-loop operator held in structured form. derivative() runs one
/// pass over the three-band Laplacian stencils, O(N) per call; the dense
/// matrix exists only for cross-checks and eigen-oracles.
class PlatoonSystem {
 public:
  PlatoonSystem(const PlatoonParams& params, Topology topology)
      : params_(params), topology_(topology) {
    params_.validate();
  }

  const PlatoonParams& params() const { return params_; }
  Topology topology() const { return topology_; }
  int n_vehicles() const { return params_.n_followers + 1; }
  int state_dim() const { return 3 * n_vehicles(); }

  /// dy = A y without forming A.
  void derivative(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    const int n = n_vehicles();
    if (y.size() != 3 * n || dy.size() != 3 * n)
      throw std::invalid_argument("PlatoonSystem::derivative: size mismatch");

    const double* z = y.data();
    const double* zd = y.data() + n;
    const double* zdd = y.data() + 2 * n;
    double* out = dy.data();

    for (int i = 0; i < n; ++i) out[i] = zd[i];
    for (int i = 0; i < n; ++i) out[n + i] = zdd[i];

    double* acc = out + 2 * n;
    const double a = params_.friction;
    const double gx = params_.gain_x;
    const double gv = params_.gain_v;
    const double rx = params_.asym_x;
    const double rv = params_.asym_v;

    if (topology_ == Topology::Circular) {
      for (int i = 0; i < n; ++i) {
        const int up = (i + 1) % n;
        const int dn = (i + n - 1) % n;
        const double lx = z[i] - rx * z[up] - (1.0 - rx) * z[dn];
        const double lv = zd[i] - rv * zd[up] - (1.0 - rv) * zd[dn];
        acc[i] = -gx * lx - gv * lv - a * zdd[i];
      }
    } else {
      acc[0] = -a * zdd[0];  // leader rows of both Laplacians are zero
      for (int i = 1; i < n - 1; ++i) {
        const double lx = z[i] - rx * z[i + 1] - (1.0 - rx) * z[i - 1];
        const double lv = zd[i] - rv * zd[i + 1] - (1.0 - rv) * zd[i - 1];
        acc[i] = -gx * lx - gv * lv - a * zdd[i];
      }
      const int l = n - 1;
      acc[l] = -gx * (z[l] - z[l - 1]) - gv * (zd[l] - zd[l - 1]) - a * zdd[l];
    }
  }

  Eigen::MatrixXd dense() const { return assemble_system(params_, topology_); }

 private:
  PlatoonParams params_;
  Topology topology_;
};

}  // namespace platoon

#endif
