#ifndef PLATOONLAB_PARAMS_HPP
#define PLATOONLAB_PARAMS_HPP

#include <stdexcept>
#include <string>

namespace platoon {

enum class Topology { Path, Circular };

inline const char* to_string(Topology t) {
  return t == Topology::Path ? "path" : "circular";
}

inline Topology topology_from_string(const std::string& s) {
  if (s == "path") return Topology::Path;
  if (s == "circular") return Topology::Circular;
  throw std::invalid_argument("unknown topology: " + s);
}

/// Scalar parameters of the closed loop: N followers behind a leader,
/// viscous friction a, the position/velocity gains g_x, g_v and the
/// neighbor-weight asymmetries rho_x, rho_v.
///
/// rho = 0.5 is a symmetric split between front and rear neighbor;
/// beta = 1 - 2 rho is the signed asymmetry used throughout the analysis.
struct PlatoonParams {
  int n_followers = 1;    // N >= 1
  double friction = 2.0;  // a   [1/s]
  double gain_x = 6.2;    // g_x [1/s^3]
  double gain_v = 10.0;   // g_v [1/s^2]
  double asym_x = 0.5;    // rho_x in [0,1]
  double asym_v = 0.4;    // rho_v in [0,1]

  double beta_x() const { return 1.0 - 2.0 * asym_x; }
  double beta_v() const { return 1.0 - 2.0 * asym_v; }

  void validate() const {
    if (n_followers < 1) throw std::invalid_argument("n_followers must be >= 1");
    if (!(asym_x >= 0.0 && asym_x <= 1.0)) throw std::invalid_argument("asym_x outside [0,1]");
    if (!(asym_v >= 0.0 && asym_v <= 1.0)) throw std::invalid_argument("asym_v outside [0,1]");
  }

  PlatoonParams with_n(int n) const {
    PlatoonParams p = *this;
    p.n_followers = n;
    return p;
  }
};

/// rho <-> beta reparameterization, beta = 1 - 2 rho.
inline double rho_from_beta(double beta) { return 0.5 * (1.0 - beta); }

}  // namespace platoon

#endif
