#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "convcap/geometry.hpp"
#include "convcap/quadrature.hpp"
#include "convcap/radius_tree.hpp"

using namespace convcap;

namespace {

Eigen::VectorXd v2(double x, double y) { return Eigen::Vector2d(x, y); }
Eigen::VectorXd v3(double x, double y, double z) { return Eigen::Vector3d(x, y, z); }

// Area of the offset surface x + t nu over (theta, phi), by dense midpoint sums
// of |X_theta x X_phi|; the parametrization is the standard ellipsoid chart.
double offset_ellipsoid_area(double a, double b, double c, double t, int n) {
  auto point = [&](double th, double ph) {
    const Vec3 x(a * std::sin(th) * std::cos(ph), b * std::sin(th) * std::sin(ph), c * std::cos(th));
    const Vec3 g(x.x() / (a * a), x.y() / (b * b), x.z() / (c * c));
    return Vec3(x + t * g.normalized());
  };
  const double dth = pi / n, dph = 2.0 * pi / (2 * n), e = 1e-6;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = (i + 0.5) * dth;
    for (int j = 0; j < 2 * n; ++j) {
      const double ph = (j + 0.5) * dph;
      const Vec3 xt = (point(th + e, ph) - point(th - e, ph)) / (2 * e);
      const Vec3 xp = (point(th, ph + e) - point(th, ph - e)) / (2 * e);
      s += xt.cross(xp).norm() * dth * dph;
    }
  }
  return s;
}

std::vector<Body> smooth_3d_family() {
  return {ParamBody3::ball(1.0), ParamBody3::ball(0.7, Vec3(0.3, -0.2, 1.0)), ParamBody3::ellipsoid(2.0, 1.5, 1.0),
          ParamBody3::ellipsoid(1.2, 1.0, 0.4), ParamBody3::ellipsoid(3.0, 1.0, 1.0)};
}

}  // namespace

TEST(Support, Examples) {
  EXPECT_NEAR(support(ParamBody3::ball(1.0), v3(0.6, 0.0, 0.8)), 1.0, 1e-12);
  EXPECT_NEAR(support(ParamBody3::box(1.0, 1.0, 1.0), v3(1, 0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(support(SupportBody2::ellipse(2.0, 1.0), v2(1, 0)), 2.0, 1e-12);
}

TEST(Support, RejectsNonUnitDirection) {
  EXPECT_THROW(support(ParamBody3::ball(1.0), v3(2, 0, 0)), InputError);
  EXPECT_THROW(support(SupportBody2::disk(1.0), v2(0.5, 0)), InputError);
}

TEST(Support, InterpolatesBetweenGridNodes) {
  const auto e = SupportBody2::ellipse(2.0, 1.0, Vec2::Zero(), 0.0, 720);
  for (double t : {0.0013, 0.7771, 2.5}) {
    const double exact = std::sqrt(4.0 * std::cos(t) * std::cos(t) + std::sin(t) * std::sin(t));
    EXPECT_NEAR(e.support_at(t), exact, 1e-8);
  }
}

TEST(Minkowski, BallDoubling) {
  const auto d = minkowski_sum(SupportBody2::disk(1.0), SupportBody2::disk(1.0), 1.0);
  for (double v : d.support_values()) EXPECT_NEAR(v, 2.0, 1e-14);
  const auto b = minkowski_sum(ParamBody3::ball(1.0), ParamBody3::ball(0.5), 3.0);
  EXPECT_EQ(b.kind, ParamBody3::Kind::Ball);
  EXPECT_NEAR(b.radius(), 2.5, 1e-14);
}

TEST(Minkowski, SupportValuesAdd) {
  const auto a = random_support_body(3), b = random_support_body(4, 0.5);
  const auto s = minkowski_sum(a, b, 0.7);
  for (int k = 0; k < a.grid_size(); ++k) EXPECT_NEAR(s.value(k), a.value(k) + 0.7 * b.value(k), 1e-14);
}

TEST(Minkowski, IncompatibleGrids) {
  EXPECT_THROW(minkowski_sum(SupportBody2::disk(1.0, Vec2::Zero(), 360), SupportBody2::disk(1.0), 1.0), InputError);
}

TEST(MeanWidth, Examples) {
  EXPECT_NEAR(mean_width(SupportBody2::disk(1.5)), 3.0, 1e-12);
  EXPECT_NEAR(mean_width(ParamBody3::ball(1.5)), 3.0, 1e-10);
  EXPECT_NEAR(mean_width(SupportBody2::segment(2.0)), 4.0 / pi, 1e-4);
  EXPECT_NEAR(mean_width(ParamBody3::box(0.5, 0.5, 0.5)), 1.5, 1e-4);
}

TEST(MeanWidth, MinkowskiLinear) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = random_support_body(10 + s), b = random_support_body(20 + s, 0.3);
    EXPECT_NEAR(mean_width(minkowski_sum(a, b, 2.0)), mean_width(a) + 2.0 * mean_width(b), 1e-10);
  }
  const auto e = ParamBody3::ellipsoid(2.0, 1.5, 1.0);
  const SupportBody3 sum = minkowski_sum(SupportBody3{{{1.0, e}}}, SupportBody3{{{1.0, ParamBody3::box(0.5, 0.2, 0.1)}}}, 1.5);
  EXPECT_NEAR(sum.mean_width(), mean_width(e) + 1.5 * mean_width(ParamBody3::box(0.5, 0.2, 0.1)), 1e-3);
}

TEST(Diameter, Examples) {
  EXPECT_NEAR(diameter(SupportBody2::disk(0.8)), 1.6, 1e-9);
  EXPECT_NEAR(diameter(ParamBody3::ball(0.8)), 1.6, 1e-9);
  EXPECT_NEAR(diameter(ParamBody3::box(0.5, 0.5, 0.5)), std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(diameter(SupportBody2::ellipse(2.0, 1.0)), 4.0, 1e-6);
}

TEST(VolumeArea, Examples) {
  EXPECT_NEAR(volume(ParamBody3::ball(1.0)), 4.0 * pi / 3.0, 1e-10);
  EXPECT_NEAR(surface_area(ParamBody3::ball(1.0)), 4.0 * pi, 1e-10);
  EXPECT_NEAR(volume(ParamBody3::box(0.5, 0.5, 0.5)), 1.0, 1e-12);
  EXPECT_NEAR(surface_area(ParamBody3::box(0.5, 0.5, 0.5)), 6.0, 1e-12);
  EXPECT_NEAR(volume(SupportBody2::ellipse(2.0, 1.0)), 2.0 * pi, 1e-9);
}

TEST(VolumeArea, EllipsoidAgainstDenseSums) {
  const auto e = ParamBody3::ellipsoid(2.0, 1.5, 1.0);
  EXPECT_NEAR(volume(e), 4.0 * pi, 1e-9);
  EXPECT_NEAR(surface_area(e) / offset_ellipsoid_area(2.0, 1.5, 1.0, 0.0, 400), 1.0, 1e-4);
}

TEST(Curvature, Examples) {
  const auto q = curvature_quadrature(ParamBody3::ball(2.0));
  for (const auto& k : q.principal_curvatures) {
    EXPECT_NEAR(k[0], 0.5, 1e-12);
    EXPECT_NEAR(k[1], 0.5, 1e-12);
  }
  const auto e = SupportBody2::ellipse(2.0, 1.0);
  EXPECT_NEAR(1.0 / e.curvature_radius(0), 2.0, 1e-8);
}

TEST(Curvature, GaussBonnet2D) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    EXPECT_NEAR(integral_mean_curvature(random_support_body(s), 1) / (2.0 * pi), 1.0, 1e-6);
  }
  EXPECT_NEAR(integral_mean_curvature(SupportBody2::ellipse(3.0, 0.5), 1) / (2.0 * pi), 1.0, 1e-6);
}

TEST(Curvature, BoxRejected) {
  EXPECT_THROW(curvature_quadrature(ParamBody3::box(1, 1, 1)), UnsupportedSmoothness);
  EXPECT_THROW(curvature_quadrature(SupportBody2::segment(1.0)), UnsupportedSmoothness);
}

TEST(Curvature, QuadratureInvariants) {
  for (const auto& b : smooth_3d_family()) {
    const auto q = curvature_quadrature(b);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      EXPECT_GT(q.weights[i], 0.0);
      EXPECT_NEAR(q.normals[i].norm(), 1.0, 1e-12);
      s += q.weights[i];
    }
    EXPECT_NEAR(s / surface_area(b), 1.0, 1e-8);
  }
}

TEST(IntegralMeanCurvature, Examples) {
  const auto e = ParamBody3::ellipsoid(2.0, 1.5, 1.0);
  EXPECT_DOUBLE_EQ(integral_mean_curvature(e, 0), surface_area(e));
  EXPECT_NEAR(integral_mean_curvature(ParamBody3::ball(1.3), 1), 4.0 * pi * 1.3, 1e-9);
  // M_{n-2} = sigma_{n-1} b / 2
  EXPECT_NEAR(integral_mean_curvature(e, 1) / (2.0 * pi * mean_width(e)), 1.0, 1e-6);
  const auto r = random_support_body(7);
  EXPECT_NEAR(integral_mean_curvature(r, 0) / (pi * mean_width(r)), 1.0, 1e-10);
  // Gauss-Bonnet in 3D: M_2 = 4 pi
  EXPECT_NEAR(integral_mean_curvature(e, 2) / (4.0 * pi), 1.0, 1e-6);
}

TEST(Steiner, BallPolynomial) {
  for (double t : {0.0, 0.25, 1.0}) EXPECT_NEAR(steiner_area(ParamBody3::ball(1.5), t), 4.0 * pi * std::pow(1.5 + t, 2), 1e-8);
  EXPECT_DOUBLE_EQ(steiner_area(ParamBody3::ball(1.5), 0.0), surface_area(ParamBody3::ball(1.5)));
}

TEST(Steiner, MatchesOffsetBody) {
  for (double t : {0.3, 1.0}) {
    const double oracle = offset_ellipsoid_area(2.0, 1.5, 1.0, t, 300);
    EXPECT_NEAR(steiner_area(ParamBody3::ellipsoid(2.0, 1.5, 1.0), t) / oracle, 1.0, 1e-3) << "t=" << t;
  }
}

TEST(SignedDistance, Examples) {
  EXPECT_NEAR(signed_distance(ParamBody3::ball(1.0), v3(0, 0, 0)), -1.0, 1e-12);
  EXPECT_NEAR(signed_distance(ParamBody3::box(0.5, 0.5, 0.5), v3(0, 0, 0)), -0.5, 1e-12);
  EXPECT_NEAR(signed_distance(ParamBody3::ball(1.0), v3(0, 1.2, 1.6)), 1.0, 1e-12);
  EXPECT_NEAR(signed_distance(SupportBody2::disk(1.0), v2(0, 0)), -1.0, 1e-9);
  EXPECT_NEAR(signed_distance(SupportBody2::disk(1.0), v2(1.2, 1.6)), 1.0, 1e-9);
}

TEST(SignedDistance, LaplacianIsMeanCurvature) {
  // Delta d = sum kappa_i / (1 + d kappa_i) just outside the boundary
  const auto e = ParamBody3::ellipsoid(2.0, 1.5, 1.0);
  const auto q = curvature_quadrature(e);
  const double d = 1e-3, h = 1e-3;
  for (std::size_t i = 0; i < q.size(); i += q.size() / 7) {
    const Eigen::VectorXd x = q.points[i] + d * q.normals[i];
    double lap = 0.0;
    for (int a = 0; a < 3; ++a) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
      s[a] = h;
      lap += (signed_distance(e, x + s) + signed_distance(e, x - s) - 2.0 * signed_distance(e, x)) / (h * h);
    }
    EXPECT_NEAR(lap, 2.0 * q.mean_curvature(i), 5e-3 * (1.0 + 2.0 * q.mean_curvature(i)));
  }
  const auto el = SupportBody2::ellipse(1.5, 1.0);
  const auto q2 = curvature_quadrature(el);
  for (std::size_t i = 0; i < q2.size(); i += q2.size() / 9) {
    const Eigen::VectorXd x = q2.points[i] + d * q2.normals[i];
    double lap = 0.0;
    for (int a = 0; a < 2; ++a) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(2);
      s[a] = h;
      lap += (signed_distance(el, x + s) + signed_distance(el, x - s) - 2.0 * signed_distance(el, x)) / (h * h);
    }
    EXPECT_NEAR(lap, q2.mean_curvature(i), 1e-2 * (1.0 + q2.mean_curvature(i)));
  }
}

TEST(Pushforward, BallUniform) {
  const auto q = curvature_quadrature(ParamBody3::ball(2.0));
  const auto m = gauss_pushforward(q, std::vector<double>(q.size(), 1.0), 8, 4);
  EXPECT_NEAR(m.total(), 16.0 * pi, 1e-8);
  for (double v : m.mass) EXPECT_NEAR(v / m.total(), 1.0 / 32.0, 2e-3);
}

TEST(Pushforward, CurvatureGivesAngle) {
  const auto q = curvature_quadrature(random_support_body(5));
  std::vector<double> kappa(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) kappa[i] = q.principal_curvatures[i][0];
  const auto m = gauss_pushforward(q, kappa, 36);
  EXPECT_NEAR(m.total(), 2.0 * pi, 1e-9);
  // a sample on a bin edge may land on either side
  for (double v : m.mass) EXPECT_NEAR(v, m.bin_area(), 2.0 * pi / 720 + 1e-9);
  std::vector<double> x(q.size());
  double expect = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    x[i] = 1.0 + std::sin(3.0 * i);
    expect += x[i] * q.weights[i];
  }
  EXPECT_NEAR(gauss_pushforward(q, x, 17).total(), expect, 1e-10);
}

TEST(Pushforward, SegmentRejected) {
  SurfaceQuadrature q;
  q.dimension = 2;
  q.points = {v2(0, 0)};
  q.normals = {v2(1, 0)};
  q.weights = {1.0};
  q.principal_curvatures = {{0.0}};
  EXPECT_THROW(gauss_pushforward(q, {1.0}, 4), DegenerateGaussMap);
}

TEST(SupportBody2, RejectsNonConvexSamples) {
  std::vector<double> h(360, 1.0);
  h[10] = 1.2;
  EXPECT_THROW(SupportBody2(h).require_convex(), InputError);
}

TEST(SupportBody2, GridDoublingConverges) {
  // perimeter of a rounded polygon-like body converges at least quadratically
  auto body = [](int n) {
    return SupportBody2::sampled(n, [](double t) { return 1.0 + 0.05 * std::abs(std::pow(std::sin(t), 3)); });
  };
  const double p1 = body(180).perimeter(), p2 = body(360).perimeter(), p3 = body(720).perimeter();
  EXPECT_GT(std::abs(p1 - p2) / std::abs(p2 - p3), 3.5);
}

class RandomBodies : public ::testing::TestWithParam<int> {};

TEST_P(RandomBodies, ClassicalInequalities) {
  const auto b = random_support_body(1000 + GetParam());
  const double sr = surface_radius(b);
  EXPECT_LE(mean_width(b), diameter(b) + 1e-9);
  EXPECT_LE(sr, 0.5 * diameter(b) + 1e-9);   // Kubota
  EXPECT_LE(sr, 0.5 * mean_width(b) + 1e-9);  // Cauchy in 2D: equality
  EXPECT_LE(volume_radius(b), sr + 1e-9);
  const auto [lhs, rhs] = willmore_terms(b);
  EXPECT_LE(lhs, rhs * (1.0 + 1e-9));
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomBodies, ::testing::Range(0, 20));

TEST(ThreeD, ClassicalInequalities) {
  std::vector<Body> all = smooth_3d_family();
  all.emplace_back(ParamBody3::box(0.5, 0.5, 0.5));
  all.emplace_back(ParamBody3::box(1.0, 0.3, 0.2));
  const Mat3 rot = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  all.emplace_back(ParamBody3::ellipsoid(2.0, 1.0, 0.5, Vec3(1, 0, 0), rot));
  for (const auto& b : all) {
    const double sr = surface_radius(b);
    EXPECT_LE(mean_width(b), diameter(b) + 1e-9);
    EXPECT_LE(sr, 0.5 * diameter(b) + 1e-9);
    EXPECT_LE(sr, 0.5 * mean_width(b) + 1e-6);
    EXPECT_LE(volume_radius(b), sr + 1e-9);
    if (is_smooth(b)) {
      const auto [lhs, rhs] = willmore_terms(b);
      EXPECT_LE(lhs, rhs * (1.0 + 1e-9));
    }
  }
}

TEST(ThreeD, RotationInvariance) {
  const Mat3 rot = Eigen::AngleAxisd(1.1, Vec3(0.3, -1, 0.2).normalized()).toRotationMatrix();
  const auto e = ParamBody3::ellipsoid(2.0, 1.5, 1.0), r = e.rotated(rot);
  EXPECT_NEAR(surface_area(r), surface_area(e), 1e-9);
  EXPECT_NEAR(mean_width(r), mean_width(e), 1e-6);
  EXPECT_NEAR(support(r, rot.col(0)), 2.0, 1e-12);
}

TEST(Quadrature, GaussLegendreExactness) {
  const auto q = gauss_legendre(8, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], 15);
  EXPECT_NEAR(s, std::pow(2.0, 16) / 16.0, 1e-9);
  const auto sr = sphere_rule(16);
  double area = 0.0, z2 = 0.0;
  for (std::size_t i = 0; i < sr.weights.size(); ++i) {
    area += sr.weights[i];
    z2 += sr.weights[i] * sr.directions[i].z() * sr.directions[i].z();
  }
  EXPECT_NEAR(area, 4.0 * pi, 1e-12);
  EXPECT_NEAR(z2, 4.0 * pi / 3.0, 1e-12);
}
