#ifndef PLATOONLAB_LAPLACIAN_HPP
#define PLATOONLAB_LAPLACIAN_HPP

#include <Eigen/Dense>
#include <stdexcept>

#include "platoonlab/params.hpp"

namespace platoon {

/// Weighted graph Laplacian of the nearest-neighbor interaction,
/// order n_followers + 1 (vehicle 0 is the leader).
///
/// Path: row 0 is zero (the leader is driven independently), interior
/// rows carry [-(1-rho), 1, -rho] on the sub/diag/super band and the last
/// vehicle, having no follower, uses only its front neighbor: [-1, 1].
/// Circular: every row is a cyclic shift of [1, -rho, 0, ..., -(1-rho)].
///
/// Rows 1..N (path) and all rows (circular) sum to zero.
inline Eigen::MatrixXd build_laplacian(int n_followers, double asym, Topology topology) {
  if (n_followers < 1) throw std::invalid_argument("build_laplacian: n_followers must be >= 1");
  if (!(asym >= 0.0 && asym <= 1.0)) throw std::invalid_argument("build_laplacian: asym outside [0,1]");

  const int n = n_followers + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  if (topology == Topology::Circular) {
    // += so that the n = 2 ring (front and rear neighbor coincide) stays correct
    for (int i = 0; i < n; ++i) {
      m(i, i) += 1.0;
      m(i, (i + 1) % n) += -asym;
      m(i, (i + n - 1) % n) += -(1.0 - asym);
    }
  } else {
    for (int i = 1; i < n_followers; ++i) {
      m(i, i - 1) = -(1.0 - asym);
      m(i, i) = 1.0;
      m(i, i + 1) = -asym;
    }
    m(n_followers, n_followers - 1) = -1.0;
    m(n_followers, n_followers) = 1.0;
  }
  return m;
}

/// Position/velocity Laplacians of one topology, possibly with different
/// asymmetries.
struct LaplacianPair {
  Eigen::MatrixXd l_x;
  Eigen::MatrixXd l_v;
  Topology topology;
};

inline LaplacianPair make_laplacian_pair(const PlatoonParams& p, Topology topology) {
  p.validate();
  return {build_laplacian(p.n_followers, p.asym_x, topology),
          build_laplacian(p.n_followers, p.asym_v, topology), topology};
}

}  // namespace platoon

#endif
