#include "c3bf/reduced_models.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "c3bf/errors.hpp"

using namespace c3bf;

TEST(UnicycleDynamics, KnownValues) {
  EXPECT_TRUE(unicycle_dynamics(UnicycleState{0, 0, 0.3, 0, 0}, UnicycleInput{0, 0}).isZero(0.0));

  const auto ds = unicycle_dynamics(UnicycleState{0, 0, 0, 2, 0}, UnicycleInput{1, 0});
  EXPECT_DOUBLE_EQ(ds[0], 2.0);
  EXPECT_DOUBLE_EQ(ds[1], 0.0);
  EXPECT_DOUBLE_EQ(ds[2], 0.0);
  EXPECT_DOUBLE_EQ(ds[3], 1.0);
  EXPECT_DOUBLE_EQ(ds[4], 0.0);

  const auto ds2 = unicycle_dynamics(UnicycleState{0, 0, M_PI / 2, 1, 0.5}, UnicycleInput{0, 0});
  EXPECT_NEAR(ds2[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(ds2[1], 1.0);
  EXPECT_DOUBLE_EQ(ds2[2], 0.5);
  EXPECT_DOUBLE_EQ(ds2[3], 0.0);
  EXPECT_DOUBLE_EQ(ds2[4], 0.0);
}

TEST(PlanarDynamics, KnownValues) {
  EXPECT_TRUE(planar_dynamics(PlanarState{3, 1, 0, 0}, PlanarInput{0, 0}).isZero(0.0));

  const auto ds = planar_dynamics(PlanarState{2, 1, 1, -0.2}, PlanarInput{0.5, 0.3});
  EXPECT_DOUBLE_EQ(ds[0], 1.0);
  EXPECT_DOUBLE_EQ(ds[1], -0.2);
  EXPECT_DOUBLE_EQ(ds[2], 0.5);
  EXPECT_DOUBLE_EQ(ds[3], 0.3);

  const auto drop = planar_dynamics(PlanarState{0, 0, 0, 0}, PlanarInput{0, -1});
  EXPECT_DOUBLE_EQ(drop[0], 0.0);
  EXPECT_DOUBLE_EQ(drop[1], 0.0);
  EXPECT_DOUBLE_EQ(drop[2], 0.0);
  EXPECT_DOUBLE_EQ(drop[3], -1.0);
}

TEST(Step, EquilibriumIsFixedPoint) {
  const UnicycleState s{1.5, -2.0, 0.7, 0.0, 0.0};
  const auto next = step(s, UnicycleInput{0, 0}, 0.1);
  EXPECT_EQ(next.x_p, s.x_p);
  EXPECT_EQ(next.y_p, s.y_p);
  EXPECT_EQ(next.theta, s.theta);
  EXPECT_EQ(next.v, s.v);
  EXPECT_EQ(next.omega, s.omega);

  const PlanarState p{3, 1, 0, 0};
  const auto pn = step(p, PlanarInput{0, 0}, 0.1);
  EXPECT_EQ(pn.x_p, p.x_p);
  EXPECT_EQ(pn.z_p, p.z_p);
  EXPECT_EQ(pn.vx, p.vx);
  EXPECT_EQ(pn.vz, p.vz);
}

// Constant acceleration from rest: the quadratic is inside RK4's order, so the
// step is exact up to roundoff.
TEST(Step, PlanarConstantAccelerationExact) {
  const auto next = step(PlanarState{}, PlanarInput{1, 0}, 0.1, IntegrationMethod::kRk4);
  EXPECT_DOUBLE_EQ(next.vx, 0.1);
  EXPECT_DOUBLE_EQ(next.x_p, 0.005);
  EXPECT_DOUBLE_EQ(next.z_p, 0.0);
  EXPECT_DOUBLE_EQ(next.vz, 0.0);
}

TEST(Step, PlanarSuperposition) {
  const PlanarState a{1, 2, 0.3, -0.1};
  const PlanarState b{-0.5, 1, 0.2, 0.4};
  const PlanarInput ua{0.7, -0.2};
  const PlanarInput ub{-0.3, 0.9};
  const auto sum = PlanarState::from_vector(a.vector() + b.vector());
  const PlanarInput usum{ua.accel_x + ub.accel_x, ua.accel_z + ub.accel_z};
  const auto lhs = step(sum, usum, 0.05).vector();
  const auto rhs = (step(a, ua, 0.05).vector() + step(b, ub, 0.05).vector()).eval();
  EXPECT_TRUE(lhs.isApprox(rhs, 1e-14)) << (lhs - rhs).norm();
}

TEST(Step, EulerMatchesRk4OnGentleTrajectory) {
  UnicycleState se{0, 0, 0, 1.0, 0.01};
  UnicycleState sr = se;
  const double dt = 1e-4;
  for (int k = 0; k < 10000; ++k) {
    se = step(se, UnicycleInput{0, 0}, dt, IntegrationMethod::kEuler);
    sr = step(sr, UnicycleInput{0, 0}, dt, IntegrationMethod::kRk4);
  }
  EXPECT_LT((se.vector() - sr.vector()).norm(), 1e-6);
}

// Halving dt should cut the RK4 global error by about 16x. Reference is a
// dt=1e-6 integration of the same trajectory; theta stays below pi over the
// horizon so wrapping never kicks in.
TEST(Step, Rk4FourthOrderConvergence) {
  const UnicycleState s0{0, 0, 0, 1.0, 2.0};
  const UnicycleInput u{0.5, -0.3};
  const double T = 1.0;

  auto integrate = [&](double dt) {
    UnicycleState s = s0;
    const long n = std::lround(T / dt);
    for (long k = 0; k < n; ++k) s = step(s, u, dt);
    return s;
  };

  const auto ref = integrate(1e-6).vector();
  const double dts[] = {0.1, 0.05, 0.025, 0.0125};
  double errs[4];
  for (int i = 0; i < 4; ++i) errs[i] = (integrate(dts[i]).vector() - ref).norm();

  for (int i = 0; i + 1 < 4; ++i) {
    ASSERT_GT(errs[i + 1], 1e-12);  // above roundoff, so the slope is meaningful
    const double slope = std::log2(errs[i] / errs[i + 1]);
    EXPECT_GT(slope, 3.7) << "between dt=" << dts[i] << " and dt=" << dts[i + 1];
    EXPECT_LT(slope, 4.3) << "between dt=" << dts[i] << " and dt=" << dts[i + 1];
  }
}

// Rotating the initial pose rotates the resulting trajectory; speed and yaw
// rate do not see the rotation at all.
TEST(Step, UnicycleRotationalEquivariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const UnicycleState s{dist(rng), dist(rng), dist(rng), 1 + std::abs(dist(rng)), dist(rng)};
    const UnicycleInput u{dist(rng), dist(rng)};
    const double ang = dist(rng);
    const Eigen::Rotation2Dd R(ang);

    UnicycleState s_rot = s;
    const Eigen::Vector2d pos = R * Eigen::Vector2d(s.x_p, s.y_p);
    s_rot.x_p = pos.x();
    s_rot.y_p = pos.y();
    s_rot.theta = s.theta + ang;

    const auto a = step(s, u, 0.05);
    const auto b = step(s_rot, u, 0.05);
    const Eigen::Vector2d pa = R * Eigen::Vector2d(a.x_p, a.y_p);
    EXPECT_NEAR(pa.x(), b.x_p, 1e-12);
    EXPECT_NEAR(pa.y(), b.y_p, 1e-12);
    EXPECT_NEAR(std::remainder(a.theta + ang - b.theta, 2 * M_PI), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(a.v, b.v);
    EXPECT_DOUBLE_EQ(a.omega, b.omega);
  }
}

TEST(Step, WrapsHeadingIntoPrincipalRange) {
  const UnicycleState s{0, 0, M_PI - 0.01, 0, 1.0};
  const auto next = step(s, UnicycleInput{0, 0}, 0.1);
  EXPECT_LE(next.theta, M_PI);
  EXPECT_GT(next.theta, -M_PI);
  EXPECT_NEAR(next.theta, M_PI - 0.01 + 0.1 - 2 * M_PI, 1e-12);
}

TEST(Step, RejectsNonPositiveDt) {
  EXPECT_THROW(step(UnicycleState{}, UnicycleInput{0, 0}, 0.0), GeometryError);
  EXPECT_THROW(step(UnicycleState{}, UnicycleInput{0, 0}, -0.1), GeometryError);
  EXPECT_THROW(step(PlanarState{}, PlanarInput{0, 0}, -1.0), GeometryError);
}
