#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <complex>
#include <random>
#include <vector>

#include "platoonlab/spectral.hpp"
#include "platoonlab/system.hpp"

using namespace platoon;

TEST(AssembleSystem, BlockLayoutN1) {
  PlatoonParams p;
  p.n_followers = 1;
  p.friction = 2.0;
  p.gain_x = 1.0;
  p.gain_v = 1.0;
  p.asym_x = 0.5;
  p.asym_v = 0.5;
  const Eigen::MatrixXd a = assemble_system(p, Topology::Path);
  ASSERT_EQ(a.rows(), 6);

  Eigen::MatrixXd expected(6, 6);
  // [0 I 0; 0 0 I; -gx Lx, -gv Lv, -a I] with L = [[0,0],[-1,1]]
  expected << 0, 0, 1, 0, 0, 0,  //
      0, 0, 0, 1, 0, 0,          //
      0, 0, 0, 0, 1, 0,          //
      0, 0, 0, 0, 0, 1,          //
      0, 0, 0, 0, -2, 0,         //
      1, -1, 1, -1, 0, -2;
  EXPECT_LT((a - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AssembleSystem, LeaderRowsAreDecoupled) {
  PlatoonParams p;
  p.n_followers = 5;
  const Eigen::MatrixXd a = assemble_system(p, Topology::Path);
  const int n = 6;
  // the third block row of the leader only holds the -a z_ddot term
  for (int j = 0; j < 3 * n; ++j) {
    if (j == 2 * n) continue;
    EXPECT_EQ(a(2 * n, j), 0.0);
  }
  EXPECT_DOUBLE_EQ(a(2 * n, 2 * n), -p.friction);
}

TEST(AssembleSystem, DenseEigenvaluesMatchModeCubics) {
  // oracle: dense eigensolve of the 15x15 circular matrix against the union
  // of the five per-mode cubic root sets
  PlatoonParams p;
  p.n_followers = 4;
  p.friction = 2.0;
  p.gain_x = 6.2;
  p.gain_v = 10.0;
  p.asym_x = 0.5;
  p.asym_v = 0.4;

  const Eigen::MatrixXd a = assemble_system(p, Topology::Circular);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
  ASSERT_EQ(solver.info(), Eigen::Success);
  std::vector<Complex> dense(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());

  std::vector<Complex> factored;
  for (const auto& mode : spectral_scan(p, p.n_followers).modes)
    for (const auto& r : mode.roots) factored.push_back(r);
  ASSERT_EQ(dense.size(), factored.size());

  std::vector<bool> used(factored.size(), false);
  for (const Complex& ev : dense) {
    double best = 1e300;
    int best_i = -1;
    for (size_t i = 0; i < factored.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(ev - factored[i]);
      if (d < best) {
        best = d;
        best_i = static_cast<int>(i);
      }
    }
    ASSERT_GE(best_i, 0);
    used[best_i] = true;
    // the trivial mode carries a defective double zero (a Jordan pair), which
    // a dense solver resolves only to sqrt(machine precision); everything
    // else must match to 1e-8
    if (std::abs(factored[best_i]) == 0.0)
      EXPECT_LT(best, 1e-6);
    else
      EXPECT_LT(best, 1e-8);
  }
}

TEST(InitialState, LeaderStep) {
  const StateVector s = leader_step_initial_state(2);
  EXPECT_EQ(s.size(), 3);
  EXPECT_EQ(s.z.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(s.z_dot(0), 0.0);
  EXPECT_DOUBLE_EQ(s.z_dot(1), -1.0);
  EXPECT_DOUBLE_EQ(s.z_dot(2), -1.0);
  EXPECT_EQ(s.z_ddot.cwiseAbs().maxCoeff(), 0.0);

  const StateVector s1 = leader_step_initial_state(1);
  EXPECT_EQ(s1.size(), 2);
  EXPECT_DOUBLE_EQ(s1.z_dot(1), -1.0);
}

TEST(InitialState, DisplacedAgent) {
  const StateVector s = displaced_agent_initial_state(70, 35, 2.0);
  EXPECT_EQ(s.size(), 71);
  EXPECT_DOUBLE_EQ(s.z(35), 2.0);
  EXPECT_DOUBLE_EQ(s.z.cwiseAbs().sum(), 2.0);
  EXPECT_EQ(s.z_dot.cwiseAbs().maxCoeff(), 0.0);

  const StateVector zero = displaced_agent_initial_state(5, 0, 0.0);
  EXPECT_EQ(zero.z.cwiseAbs().maxCoeff(), 0.0);

  EXPECT_THROW(displaced_agent_initial_state(5, 6, 1.0), std::out_of_range);
  EXPECT_THROW(displaced_agent_initial_state(5, -1, 1.0), std::out_of_range);
}

TEST(PlatoonSystem, StructuredDerivativeMatchesDense) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {1, 2, 3, 6}) {
    for (Topology topo : {Topology::Path, Topology::Circular}) {
      PlatoonParams p;
      p.n_followers = n;
      p.friction = 1.7;
      p.gain_x = 3.1;
      p.gain_v = 5.4;
      p.asym_x = 0.35;
      p.asym_v = 0.62;
      const PlatoonSystem sys(p, topo);
      const Eigen::MatrixXd dense = sys.dense();
      for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd y(3 * (n + 1));
        for (int i = 0; i < y.size(); ++i) y(i) = u(rng);
        Eigen::VectorXd dy(y.size());
        sys.derivative(y, dy);
        EXPECT_LT((dy - dense * y).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}
