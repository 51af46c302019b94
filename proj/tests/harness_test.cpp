#include <gtest/gtest.h>

#include <map>

#include "platoonlab/harness.hpp"

using namespace platoon;

namespace {

PlatoonParams reference_params() {
  PlatoonParams p;
  p.friction = 2.0;
  p.gain_x = 6.2;
  p.gain_v = 10.0;
  p.asym_x = 0.5;
  p.asym_v = 0.4;
  return p;
}

}  // namespace

TEST(ParallelFor, DeterministicAndComplete) {
  std::vector<int> out(1000, 0);
  parallel_for(1000, 4, [&](int i) { out[i] = i * i; });
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(out[i], i * i);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](int i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(RunVerify, ErrorsShrinkWithN) {
  const auto rows = run_verify(reference_params(), {30, 60});
  // 4 rows per N: A1, ratio21, ratio32, T
  ASSERT_EQ(rows.size(), 8u);
  double a1_err_30 = 0, a1_err_60 = 0, t_err_30 = 0, t_err_60 = 0;
  for (const auto& r : rows) {
    if (r.chi == "A1" && r.n == 30) a1_err_30 = r.theta;
    if (r.chi == "A1" && r.n == 60) a1_err_60 = r.theta;
    if (r.chi == "T" && r.n == 30) t_err_30 = r.theta;
    if (r.chi == "T" && r.n == 60) t_err_60 = r.theta;
  }
  EXPECT_LT(a1_err_60, a1_err_30);
  EXPECT_LT(t_err_60, t_err_30);
}

TEST(RunVerify, EmptyListRejected) {
  EXPECT_THROW(run_verify(reference_params(), {}), std::invalid_argument);
}

TEST(RunVerify, AllFourSeriesShrinkOverTheReferenceGrid) {
  // each of A1, A2/A1, A3/A2 and T improves with N, allowing one
  // non-monotone step for measurement noise
  const auto rows = run_verify(reference_params(), {40, 80, 160});
  for (const std::string chi : {"A1", "ratio21", "ratio32", "T"}) {
    std::vector<double> errs;
    for (const auto& r : rows)
      if (r.chi == chi) errs.push_back(r.theta);
    ASSERT_EQ(errs.size(), 3u) << chi;
    int increases = 0;
    for (size_t i = 1; i < errs.size(); ++i) increases += errs[i] >= errs[i - 1];
    EXPECT_LE(increases, 1) << chi;
    EXPECT_LT(errs.back(), errs.front()) << chi;
  }
}

TEST(RunVerify, SingleRowTable) {
  const auto rows = run_verify(reference_params(), {40});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].chi, "A1");
  EXPECT_EQ(rows[3].chi, "T");
}

TEST(CompareStrategies, QualitativeOrdering) {
  const auto results = run_compare_strategies(reference_params(), 60);
  ASSERT_EQ(results.size(), 3u);
  const auto& symmetric = results[0];
  const auto& identical = results[1];
  const auto& velocity_only = results[2];
  ASSERT_FALSE(symmetric.diverged);
  ASSERT_FALSE(identical.diverged);
  ASSERT_FALSE(velocity_only.diverged);

  // identical asymmetry overshoots the most; velocity-only keeps both the
  // overshoot and the accumulated error smallest
  EXPECT_GT(identical.max_abs_error, symmetric.max_abs_error);
  EXPECT_GT(identical.max_abs_error, velocity_only.max_abs_error);
  EXPECT_LT(velocity_only.theta, symmetric.theta);
  EXPECT_LT(velocity_only.theta, identical.theta);
  EXPECT_LT(velocity_only.max_abs_error, symmetric.max_abs_error);
}

TEST(CriticalFriction, ReferenceValue) {
  EXPECT_NEAR(critical_friction(6.2, 10.0, 0.4), 1.5144271909999159, 1e-6);
}

TEST(CriticalFriction, MarginSignFlipsAtRoot) {
  const double a_star = critical_friction(6.2, 10.0, 0.4);
  EXPECT_LT(stability_bound(a_star - 0.01, 6.2, 10.0) - 0.2, 0.0);
  EXPECT_GT(stability_bound(a_star + 0.01, 6.2, 10.0) - 0.2, 0.0);
}

TEST(SweepFriction, CircularSurrogateShowsSharpGrowth) {
  // desk-scale ring sweep across the critical friction
  const FrictionSweep sweep =
      run_sweep_friction(reference_params(), 1.45, 1.75, 0.15, 120, Topology::Circular, 0.01, 0);
  ASSERT_EQ(sweep.points.size(), 3u);
  EXPECT_NEAR(sweep.a_star, 1.5144271909999159, 1e-6);
  EXPECT_LT(sweep.points[0].margin, 0.0);
  EXPECT_GT(sweep.points[2].margin, 0.0);
  const double theta_unstable = sweep.points[0].diverged
                                    ? std::numeric_limits<double>::infinity()
                                    : sweep.points[0].theta;
  EXPECT_GT(theta_unstable, 10.0 * sweep.points[2].theta);
}

TEST(SweepAsym, MinimumNearTheBoundary) {
  PlatoonParams p = reference_params();
  p.gain_x = 8.3;
  const AsymSweep sweep = run_sweep_asym(p, 0.35, 0.44, 0.01, 120, Topology::Path, 0.01, 0);
  EXPECT_NEAR(sweep.argmin_rho_v, 0.37, 0.021);
  // points past the flock boundary carry a negative margin flag
  EXPECT_LT(sweep.points.front().margin, 0.0);
  // away from the boundary the accumulated error grows with rho_v
  const auto& p38 = sweep.points.at(3);
  const auto& p44 = sweep.points.back();
  EXPECT_NEAR(p38.value, 0.38, 1e-9);
  EXPECT_GT(p44.theta, p38.theta);
}

TEST(SweepAsym, RangeValidation) {
  EXPECT_THROW(run_sweep_asym(reference_params(), 0.2, 0.6, 0.1, 50), std::invalid_argument);
}

TEST(SweepFriction, NearLinearGrowthAwayFromTheBoundary) {
  const FrictionSweep sweep =
      run_sweep_friction(reference_params(), 1.8, 2.8, 0.25, 150, Topology::Circular, 0.01, 0);
  ASSERT_EQ(sweep.points.size(), 5u);
  std::vector<double> theta;
  for (const auto& pt : sweep.points) {
    ASSERT_FALSE(pt.diverged);
    theta.push_back(pt.theta);
  }
  for (size_t i = 1; i < theta.size(); ++i) EXPECT_GT(theta[i], theta[i - 1]);
  // interior points stay close to the secant through the endpoints
  for (size_t i = 1; i + 1 < theta.size(); ++i) {
    const double t = static_cast<double>(i) / (theta.size() - 1);
    const double on_line = theta.front() + t * (theta.back() - theta.front());
    EXPECT_NEAR(theta[i], on_line, 0.25 * on_line);
  }
}

TEST(SweepAsym, NearSymmetricCouplingAccumulatesLargeError) {
  // slow geometric decay as rho_v approaches 1/2
  PlatoonParams p = reference_params();
  const ThetaPoint mid = theta_of_leader_step(p.with_n(80), Topology::Path, 0.01);
  p.asym_v = 0.49;
  const ThetaPoint near_sym = theta_of_leader_step(p.with_n(80), Topology::Path, 0.01);
  EXPECT_GT(near_sym.theta, 3.0 * mid.theta);
}

TEST(RunScaling, SeriesShapes) {
  const auto rows = run_scaling(reference_params(), {25, 50, 100}, 0.01, 0);
  ASSERT_EQ(rows.size(), 4u * 3u);
  std::map<std::pair<std::string, int>, double> theta;
  for (const auto& r : rows) {
    EXPECT_FALSE(r.diverged);
    theta[{r.series, r.n}] = r.theta;
  }
  // the closed form tracks the velocity-only platoon within 20% from N=100 up
  const double vel_100 = theta[{"velocity_only", 100}];
  const double pred_100 = theta[{"predicted", 100}];
  EXPECT_NEAR(vel_100, pred_100, 0.2 * pred_100);
  // the symmetric architecture is worse at every N
  for (int n : {25, 50, 100}) {
    const double sym = theta[{"symmetric", n}];
    const double vel = theta[{"velocity_only", n}];
    EXPECT_GT(sym, vel) << "N = " << n;
  }
}
