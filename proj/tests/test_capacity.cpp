#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "convcap/bounds.hpp"
#include "convcap/capacity.hpp"
#include "convcap/radius_tree.hpp"

using namespace convcap;

namespace {

// Newtonian capacity of an ellipsoid: 8 pi / int_0^inf ds / sqrt((a^2+s)(b^2+s)(c^2+s)).
double ellipsoid_capacity_p2(double a, double b, double c) {
  boost::math::quadrature::exp_sinh<double> q;
  const double I = q.integrate([&](double s) { return 1.0 / std::sqrt((a * a + s) * (b * b + s) * (c * c + s)); }, 0.0,
                               std::numeric_limits<double>::infinity());
  return 8.0 * pi / I;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(BallFormula, ClosedForms) {
  EXPECT_NEAR(ball_capacity(3, 2.0, 1.0), 4.0 * pi, 1e-12);
  EXPECT_NEAR(ball_capacity(3, 2.0, 2.0), 8.0 * pi, 1e-12);
  EXPECT_NEAR(ball_capacity(2, 1.5, 1.0), 2.0 * pi, 1e-12);
  EXPECT_LT(ball_capacity(3, 2.5, 1e-8), 1e-3);
  for (double p : {1.2, 1.5, 2.0, 2.7}) EXPECT_NEAR(capacity_radius_of(3, p, ball_capacity(3, p, 0.37)), 0.37, 1e-12);
  EXPECT_THROW(ball_capacity(3, 3.0, 1.0), ParameterError);
}

TEST(Solver, DiskMatchesBallFormula) {
  for (double r : {1.0, 2.0}) {
    const auto c = capacity(SupportBody2::disk(r), 1.5);
    EXPECT_LT(rel(c.value(), ball_capacity(2, 1.5, r)), 1e-3) << "r=" << r;
  }
}

TEST(Solver, PotentialOfDiskIsRadial) {
  // n=2, p=1.5: u = 1/|x|
  const auto f = solve_equilibrium(SupportBody2::disk(1.0), 1.5, CapacityOptions::defaults(2));
  double worst = 0.0;
  for (int i = 0; i < f.mesh->node_count(); ++i) worst = std::max(worst, std::abs(f.values[i] - 1.0 / f.mesh->nodes()[i].norm()));
  EXPECT_LT(worst, 5e-3);
  for (int s = 0; s < f.mesh->surface_size(); ++s) EXPECT_DOUBLE_EQ(f.values[s], 1.0);
  EXPECT_GE(f.min_value(), 0.0);
  EXPECT_LE(f.max_value(), 1.0 + 1e-12);
}

TEST(Solver, PotentialOfBallIsRadial) {
  // n=3, p=2: u = 1/|x|
  const auto f = solve_equilibrium(ParamBody3::ball(1.0), 2.0, CapacityOptions::fast(3));
  double worst = 0.0;
  for (int i = 0; i < f.mesh->node_count(); ++i) worst = std::max(worst, std::abs(f.values[i] - 1.0 / f.mesh->nodes()[i].norm()));
  EXPECT_LT(worst, 2e-2);
  EXPECT_GE(f.min_value(), 0.0);
  EXPECT_LE(f.max_value(), 1.0 + 1e-12);
}

TEST(Solver, BoundaryGradientOfDisk) {
  const double r = 1.5, p = 1.5;
  const auto f = solve_equilibrium(SupportBody2::disk(r), p, CapacityOptions::defaults(2));
  const double exact = (2 - p) / ((p - 1) * r);
  for (double g : boundary_gradient(f)) EXPECT_NEAR(g / exact, 1.0, 5e-3);
}

TEST(Solver, FluxRouteIsWeightedGradientSum) {
  const auto f = solve_equilibrium(SupportBody2::ellipse(1.5, 1.0), 1.5, CapacityOptions::fast(2));
  const auto g = boundary_gradient(f);
  const auto& w = f.mesh->boundary_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * std::pow(g[i], 0.5);
  EXPECT_NEAR(flux_capacity(f), s, 1e-12 * s);
}

TEST(Solver, RoutesAgreeWithinEstimate) {
  for (const Body& b : {Body(SupportBody2::ellipse(1.5, 1.0)), Body(random_support_body(3))}) {
    const auto c = capacity(b, 1.5);
    EXPECT_LE(rel(c.flux_extrapolated, c.extrapolated), c.estimate);
  }
  const auto c = capacity(ParamBody3::ellipsoid(2.0, 1.5, 1.0), 2.0, CapacityOptions::fast(3));
  EXPECT_LE(rel(c.flux_extrapolated, c.extrapolated), c.estimate);
}

TEST(Solver, EllipsoidNewtonianCapacity) {
  const double exact = ellipsoid_capacity_p2(2.0, 1.5, 1.0);
  EXPECT_NEAR(exact, 18.708729345, 1e-8);  // frozen from the integral above
  const auto c = capacity(ParamBody3::ellipsoid(2.0, 1.5, 1.0), 2.0);
  EXPECT_LT(rel(c.value(), exact), 1e-3);
}

TEST(Solver, ScalingLaw) {
  const auto b = random_support_body(8);
  const double c1 = capacity(b, 1.5).value();
  for (double lam : {0.5, 2.0}) {
    EXPECT_LT(rel(capacity(b.scaled(lam), 1.5).value(), std::pow(lam, 0.5) * c1), 1e-2) << "lambda=" << lam;
  }
}

TEST(Solver, TranslationInvariance) {
  const auto b = random_support_body(9);
  const auto opt = CapacityOptions::fast(2);
  EXPECT_LT(rel(capacity(b.translated(Vec2(3.0, -1.0)), 1.5, opt).value(), capacity(b, 1.5, opt).value()), 1e-6);
}

TEST(Solver, MonotoneUnderInclusion) {
  const auto opt = CapacityOptions::fast(2);
  const double c1 = capacity(SupportBody2::disk(1.0), 1.5, opt).value();
  const double c2 = capacity(SupportBody2::ellipse(1.5, 1.0), 1.5, opt).value();
  const double c3 = capacity(SupportBody2::disk(1.5), 1.5, opt).value();
  EXPECT_LT(c1, c2);
  EXPECT_LT(c2, c3);
  const auto o3 = CapacityOptions::fast(3);
  const double d1 = capacity(ParamBody3::ball(1.0), 2.0, o3).value();
  const double d2 = capacity(ParamBody3::ellipsoid(2.0, 1.5, 1.0), 2.0, o3).value();
  const double d3 = capacity(ParamBody3::ball(2.0), 2.0, o3).value();
  EXPECT_LT(d1, d2);
  EXPECT_LT(d2, d3);
}

TEST(Solver, RotationMeanIncreasesCapacity) {
  // p = n - 1: capacity of a Minkowski mean of rotated copies is at least capacity(A)
  const auto A = ParamBody3::ellipsoid(2.0, 1.0, 0.5);
  const auto o3 = CapacityOptions::fast(3);
  const double base = capacity(A, 2.0, o3).value();
  const Mat3 r1 = Eigen::AngleAxisd(pi / 2, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 r2 = Eigen::AngleAxisd(0.9, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  const SupportBody3 m{{{0.3, A}, {0.3, A.rotated(r1)}, {0.4, A.rotated(r2)}}};
  EXPECT_GE(capacity(m, 2.0, o3).value(), base * (1.0 - 1e-3));
}

TEST(Solver, RegularizationInsensitive) {
  auto opt = CapacityOptions::fast(2);
  const auto e = SupportBody2::ellipse(1.5, 1.0);
  const double c1 = capacity(e, 1.5, opt).value();
  opt.solver.epsilon = 1e-6;
  EXPECT_LT(rel(capacity(e, 1.5, opt).value(), c1), 1e-8);
}

TEST(Solver, Errors) {
  EXPECT_THROW(capacity(SupportBody2::disk(1.0), 2.0), ParameterError);
  EXPECT_THROW(capacity(ParamBody3::ball(1.0), 1.0), ParameterError);
  std::vector<double> h(360, 1.0);
  h[3] = 1.3;
  EXPECT_THROW(capacity(SupportBody2(h), 1.5), InputError);
}

TEST(Gehring, BallIsExact) {
  for (double p : {1.5, 2.0, 2.5}) {
    EXPECT_NEAR(gehring_upper_bound(ParamBody3::ball(1.3), p) / ball_capacity(3, p, 1.3), 1.0, 1e-6) << p;
  }
  EXPECT_NEAR(gehring_upper_bound(SupportBody2::disk(0.7), 1.5) / ball_capacity(2, 1.5, 0.7), 1.0, 1e-8);
}

TEST(Gehring, DominatesCapacity) {
  const auto e = ParamBody3::ellipsoid(2.0, 1.5, 1.0);
  const double g = gehring_upper_bound(e, 2.0);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_GE(g, ellipsoid_capacity_p2(2.0, 1.5, 1.0));
  const auto b = random_support_body(2);
  EXPECT_GE(gehring_upper_bound(b, 1.5), capacity(b, 1.5, CapacityOptions::fast(2)).value());
  EXPECT_THROW(gehring_upper_bound(ParamBody3::box(1, 1, 1), 2.0), UnsupportedSmoothness);
}

TEST(Barrier, Profile) {
  EXPECT_DOUBLE_EQ(barrier_phi(3, 2.0, 0.5, 0.0), 1.0);
  EXPECT_LT(barrier_phi(3, 2.0, 0.5, 1e8), 1e-7);
  EXPECT_THROW(barrier_phi(3, 2.0, 0.5, -1.0), DomainError);
  const double alpha = 0.8;
  const auto ball = ParamBody3::ball(1.0 / alpha);
  for (double r : {1.25, 2.0, 7.0}) {
    Eigen::VectorXd x = Eigen::Vector3d(0.0, 0.6, 0.8) * r;
    EXPECT_NEAR(barrier_profile(ball, 2.5, alpha, BarrierSide::LowerAlpha, x), std::pow(1.25 / r, (3 - 2.5) / 1.5), 1e-12);
  }
  EXPECT_THROW(barrier_profile(ball, 2.0, alpha, BarrierSide::LowerAlpha, Eigen::VectorXd(Eigen::Vector3d::Zero())), DomainError);
}

TEST(Barrier, DominatesPotential) {
  const auto e = SupportBody2::ellipse(1.5, 1.0);
  const auto f = solve_equilibrium(e, 1.5, CapacityOptions::defaults(2));
  const double alpha = 1.0 / 2.25, beta = 1.5;
  for (int i = f.mesh->surface_size(); i < f.mesh->node_count(); ++i) {
    const Eigen::VectorXd x = f.mesh->nodes()[i];
    ASSERT_GE(barrier_profile(e, 1.5, alpha, BarrierSide::LowerAlpha, x), f.values[i] - 1e-3);
    ASSERT_LE(barrier_profile(e, 1.5, beta, BarrierSide::UpperBeta, x), f.values[i] + 1e-3);
  }
}
