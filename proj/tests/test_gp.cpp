#include <gtest/gtest.h>

#include <random>

#include "dfplan/gp.hpp"
#include "oracles.hpp"

using namespace dfplan;

namespace {

VecX v1(double x) { return VecX::Constant(1, x); }

Trajectory random_trajectory(int dof, int n, double dt, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Trajectory t;
  t.dt = dt;
  t.t0 = 0.3;
  for (int i = 0; i < n; ++i) {
    SupportState s{VecX(dof), VecX(dof)};
    for (int k = 0; k < dof; ++k) {
      s.position[k] = g(rng);
      s.velocity[k] = g(rng);
    }
    t.states.push_back(s);
  }
  return t;
}

}  // namespace

TEST(StraightLine, EqualEndpointsGiveZeroVelocity) {
  const VecX x = VecX::LinSpaced(3, 0.1, 0.3);
  const Trajectory t = init_straight_line(x, x, 0.2, 6);
  for (const auto& s : t.states) {
    EXPECT_EQ(s.position, x);
    EXPECT_TRUE(s.velocity.isZero());
  }
}

TEST(StraightLine, ThreeStateArithmetic) {
  const Trajectory t = init_straight_line(v1(0), v1(1), 0.5, 3);
  ASSERT_EQ(t.size(), 3);
  EXPECT_DOUBLE_EQ(t.states[1].position[0], 0.5);
  for (const auto& s : t.states) EXPECT_DOUBLE_EQ(s.velocity[0], 1.0);
}

TEST(StraightLine, EndpointsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    VecX a(5), b(5);
    for (int k = 0; k < 5; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
    }
    const Trajectory t = init_straight_line(a, b, 0.17, 2 + trial % 20);
    EXPECT_EQ(t.states.front().position, a);
    EXPECT_EQ(t.states.back().position, b);
  }
  EXPECT_THROW(init_straight_line(v1(0), v1(1), 0.1, 1), std::invalid_argument);
}

TEST(GpPrior, ConsistentPropagationHasZeroResidual) {
  const SupportState a{Eigen::Vector2d(0.1, -0.4), Eigen::Vector2d(0.5, 2.0)};
  const SupportState b{a.position + 0.25 * a.velocity, a.velocity};
  const GpPriorResidual r = gp_prior_residual(a, b, 0.25, isotropic_qc(2, 1.0));
  EXPECT_LT(r.residual.norm(), 1e-15);
}

TEST(GpPrior, CovarianceUnitCase) {
  const MatX q = gp_covariance(isotropic_qc(1, 1.0), 1.0);
  EXPECT_NEAR(q(0, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(q(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(q(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(q(1, 1), 1.0, 1e-15);
}

TEST(GpPrior, RejectsNonPositiveDefiniteQc) {
  MatX qc = MatX::Identity(2, 2);
  qc(1, 1) = -1;
  EXPECT_THROW(gp_covariance(qc, 0.1), std::invalid_argument);
}

TEST(GpPrior, MahalanobisMatchesDenseOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 4;
    MatX a = MatX::NullaryExpr(d, d, [&] { return g(rng); });
    const MatX qc = a * a.transpose() + 0.5 * MatX::Identity(d, d);
    const SupportState x0{VecX::NullaryExpr(d, [&] { return g(rng); }), VecX::NullaryExpr(d, [&] { return g(rng); })};
    const SupportState x1{VecX::NullaryExpr(d, [&] { return g(rng); }), VecX::NullaryExpr(d, [&] { return g(rng); })};
    const double dt = 0.05 + 0.1 * (trial % 5);
    const GpPriorResidual r = gp_prior_residual(x0, x1, dt, qc);
    // Oracle: assemble Φ and Q from scalar blocks, solve with a full-pivot LU.
    MatX phi = MatX::Identity(2 * d, 2 * d), q(2 * d, 2 * d);
    phi.topRightCorner(d, d) = dt * MatX::Identity(d, d);
    q << dt * dt * dt / 3 * qc, dt * dt / 2 * qc, dt * dt / 2 * qc, dt * qc;
    const VecX res = phi * x0.stacked() - x1.stacked();
    const double expect = res.dot(q.fullPivLu().solve(res));
    EXPECT_NEAR(gp_prior_mahalanobis(r), expect, 1e-10 * std::max(1.0, expect));
  }
}

TEST(GpInterpolation, ScalarAndMatrixWeightsAgree) {
  for (double tau : {0.0, 0.03, 0.1, 0.17, 0.2}) {
    const ScalarInterpolationWeights s = scalar_interpolation_weights(0.2, tau);
    const GpInterpolationWeights m = gp_interpolation_weights(isotropic_qc(3, 2.5), 0.2, tau);
    const MatX i3 = MatX::Identity(3, 3);
    MatX lam(6, 6), psi(6, 6);
    lam << s.lambda(0, 0) * i3, s.lambda(0, 1) * i3, s.lambda(1, 0) * i3, s.lambda(1, 1) * i3;
    psi << s.psi(0, 0) * i3, s.psi(0, 1) * i3, s.psi(1, 0) * i3, s.psi(1, 1) * i3;
    EXPECT_LT((lam - m.lambda).cwiseAbs().maxCoeff(), 1e-10) << tau;
    EXPECT_LT((psi - m.psi).cwiseAbs().maxCoeff(), 1e-10) << tau;
  }
}

TEST(GpInterpolation, EndpointIdentityExact) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory t = random_trajectory(1 + trial % 8, 2 + trial % 9, 0.05 + 0.01 * trial, rng);
    const MatX qc = isotropic_qc(t.dof(), 0.3 + trial);
    for (int i = 0; i < t.size(); ++i) {
      const SupportState s = gp_interpolate(t, t.time_of(i), qc);
      ASSERT_EQ(s.position, t.states[i].position);
      ASSERT_EQ(s.velocity, t.states[i].velocity);
    }
  }
}

TEST(GpInterpolation, ConstantVelocityIsExactLinearMotion) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  VecX a(4), b(4);
  for (int k = 0; k < 4; ++k) {
    a[k] = u(rng);
    b[k] = u(rng);
  }
  const Trajectory t = init_straight_line(a, b, 0.3, 9, 1.0);
  const VecX v = (b - a) / t.duration();
  std::uniform_real_distribution<double> when(t.t0, t.end_time());
  for (int s = 0; s < 100; ++s) {
    const double tau = when(rng);
    const SupportState x = gp_interpolate(t, tau, isotropic_qc(4, 1.7));
    EXPECT_LT((x.position - (a + (tau - t.t0) * v)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((x.velocity - v).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(GpInterpolation, OutOfRangeThrows) {
  const Trajectory t = init_straight_line(v1(0), v1(1), 0.5, 3);
  EXPECT_THROW(gp_interpolate(t, -0.01, isotropic_qc(1, 1)), std::out_of_range);
  EXPECT_THROW(gp_interpolate(t, 1.01, isotropic_qc(1, 1)), std::out_of_range);
}

TEST(Trajectory, ValidateRejectsInconsistentStates) {
  Trajectory t = init_straight_line(v1(0), v1(1), 0.5, 3);
  EXPECT_NO_THROW(t.validate());
  t.states[1].velocity = VecX::Zero(2);
  EXPECT_THROW(t.validate(), std::invalid_argument);
}
