#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "convcap/radius_tree.hpp"
#include "convcap/yau.hpp"

using namespace convcap;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

YauOptions fast_yau(int n) {
  YauOptions y;
  y.capacity = CapacityOptions::fast(n);
  return y;
}

MassDensity constant_density(int n, double v) { return MassDensity::tabulated(n, {0.0, 50.0}, {v, v}); }

// centered disk, n = 2, p = 1.5: stationarity of a pi s^2 (1 - e^{-r^2/s^2}) - 2 pi sqrt(r)
double disk_optimum(double a, double s, double lo, double hi) {
  auto g = [&](double r) { return 2.0 * a * std::pow(r, 1.5) * std::exp(-r * r / (s * s)) - 1.0; };
  std::uintmax_t it = 200;
  const auto [x0, x1] = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (x0 + x1);
}

double disk_F(double a, double s, double r) {
  return a * pi * s * s * (1.0 - std::exp(-r * r / (s * s))) - 2.0 * pi * std::sqrt(r);
}

}  // namespace

TEST(Density, L1Norms) {
  using boost::math::quadrature::gauss_kronrod;
  const std::vector<MassDensity> hs{MassDensity::gaussian_bump(2, 3.0, 1.5), MassDensity::gaussian_bump(3, 2.0, 0.7),
                                    MassDensity::radial_power(2, 1.0, 3.5), MassDensity::radial_power(3, 4.0, 5.0),
                                    MassDensity::tabulated(2, {0.0, 1.0, 2.5}, {2.0, 1.0, 0.5}),
                                    MassDensity::tabulated(3, {0.0, 1.0, 2.0}, {1.0, 3.0, 0.2})};
  for (const auto& h : hs) {
    const int n = h.dimension();
    const double t_end = 1.0;  // r = t / (1 - t)
    const double I = gauss_kronrod<double, 61>::integrate(
        [&](double t) {
          if (t >= t_end) return 0.0;
          const double r = t / (1.0 - t);
          return h.radial(r) * std::pow(r, n - 1) / ((1.0 - t) * (1.0 - t));
        },
        0.0, t_end, 15, 1e-12);
    EXPECT_NEAR(h.l1_norm() / (unit_sphere_area(n) * I), 1.0, 1e-8);
  }
}

TEST(Density, Errors) {
  EXPECT_THROW(MassDensity::gaussian_bump(2, -1.0, 1.0), InputError);
  EXPECT_THROW(MassDensity::radial_power(3, 1.0, 2.5), InputError);
  EXPECT_THROW(MassDensity::tabulated(2, {0.5, 1.0}, {1.0, 1.0}), InputError);
  EXPECT_THROW(MassDensity::gaussian_bump(4, 1.0, 1.0), InputError);
}

TEST(IntegrateDensity, DiskAndBall) {
  const auto h2 = MassDensity::gaussian_bump(2, 5.0, 0.8);
  for (double r : {0.3, 1.0, 2.0}) {
    EXPECT_NEAR(integrate_density(SupportBody2::disk(r), h2) / (5.0 * pi * 0.64 * (1.0 - std::exp(-r * r / 0.64))), 1.0, 1e-8);
  }
  const auto h3 = MassDensity::gaussian_bump(3, 1.0, 1.0);
  const double r = 1.2;
  const double exact = std::pow(pi, 1.5) * std::erf(r) - 2.0 * pi * r * std::exp(-r * r);
  EXPECT_NEAR(integrate_density(ParamBody3::ball(r), h3) / exact, 1.0, 1e-8);
  EXPECT_NEAR(integrate_density(SupportBody2::ellipse(1.5, 1.0), constant_density(2, 1.0)), 1.5 * pi, 1e-8);
}

TEST(EvaluateF, DiskClosedForm) {
  const auto h = MassDensity::gaussian_bump(2, 3.0, 1.5);
  for (double r : {0.5, 1.0, 2.0}) {
    const double F = evaluate_F(SupportBody2::disk(r), h, Objective::pcap(1.5));
    EXPECT_NEAR(F, disk_F(3.0, 1.5, r), 2e-3 * 2.0 * pi * std::sqrt(r)) << r;
  }
  EXPECT_NEAR(evaluate_F(SupportBody2::disk(2.0), h, Objective::surface()), 3.0 * pi * 2.25 * (1.0 - std::exp(-4.0 / 2.25)) - 4.0 * pi, 1e-8);
  EXPECT_NEAR(evaluate_F(SupportBody2::disk(2.0), h, Objective::volume()), 3.0 * pi * 2.25 * (1.0 - std::exp(-4.0 / 2.25)) - 4.0 * pi, 1e-8);
}

TEST(EvaluateF, ShrinkingBallsTendToZero) {
  const auto h = MassDensity::gaussian_bump(2, 3.0, 1.5);
  double prev = 1e9;
  for (double r : {1e-2, 1e-4, 1e-6}) {
    const double F = std::abs(evaluate_F(SupportBody2::disk(r), h, Objective::pcap(1.5), fast_yau(2)));
    EXPECT_LT(F, prev);
    prev = F;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(EvaluateF, UpperBoundMechanics) {
  const auto h = MassDensity::gaussian_bump(2, 3.0, 1.5);
  const double p = 1.5;
  for (int s = 0; s < 4; ++s) {
    const auto A = random_support_body(300 + s, 0.5 + 0.5 * s);
    const double F = evaluate_F(A, h, Objective::pcap(p), fast_yau(2));
    const double bound = h.l1_norm() - ball_capacity(2, p, volume_radius(A));
    EXPECT_LE(F, bound * (1.0 + 1e-3) + 1e-9) << s;
  }
}

TEST(FirstVariation, PointPerturbationIsZero) {
  const auto h = MassDensity::gaussian_bump(2, 3.0, 1.5);
  const auto A = random_support_body(5);
  for (const auto& obj : {Objective::pcap(1.5), Objective::surface(), Objective::volume()}) {
    EXPECT_EQ(first_variation(A, [](const Eigen::VectorXd&) { return 0.0; }, h, obj, fast_yau(2)), 0.0);
  }
}

TEST(FirstVariation, MatchesFiniteDifferences) {
  const auto h = MassDensity::gaussian_bump(2, 3.0, 1.5);
  const auto yo = fast_yau(2);
  for (int s = 0; s < 2; ++s) {
    const auto A = random_support_body(100 + s, 1.0);
    const auto B = random_support_body(200 + s, 0.5);
    for (const auto& obj : {Objective::pcap(1.5), Objective::surface(), Objective::volume()}) {
      const double fv = first_variation(A, B, h, obj, yo);
      const double F0 = evaluate_F(A, h, obj, yo);
      const double t = 1e-2;
      const double d1 = (evaluate_F(minkowski_sum(A, B, t), h, obj, yo) - F0) / t;
      const double d2 = (evaluate_F(minkowski_sum(A, B, t / 2), h, obj, yo) - F0) / (t / 2);
      EXPECT_LT(rel(fv, 2.0 * d2 - d1), 1e-3) << obj.name() << " pair " << s;
    }
  }
}

TEST(ElResidual, ClosedForms) {
  EXPECT_LE(el_residual(ParamBody3::ball(1.0), constant_density(3, 1.0), Objective::surface()), 1e-10);
  for (double r : {0.5, 1.0, 2.0}) {
    EXPECT_LE(el_residual(SupportBody2::disk(r), constant_density(2, r), Objective::volume()), 1e-10) << r;
    EXPECT_LE(el_residual(SupportBody2::disk(r), constant_density(2, 1.0 / r), Objective::surface()), 1e-10) << r;
  }
  EXPECT_LE(el_residual(ParamBody3::ball(1.0), constant_density(3, 1.0), Objective::pcap(2.0)), 0.02);
  // disk, p = 1.5: (p-1)|grad u|^p = 0.5 r^{-1.5}
  EXPECT_LE(el_residual(SupportBody2::disk(1.0), constant_density(2, 0.5), Objective::pcap(1.5)), 0.01);
  EXPECT_GT(el_residual(SupportBody2::ellipse(1.5, 1.0), constant_density(2, 1.0), Objective::surface()), 0.1);
}

TEST(ElResidual, RejectsDegenerateBoundaries) {
  const auto h = constant_density(3, 1.0);
  EXPECT_THROW(el_residual(ParamBody3::box(1, 1, 1), h, Objective::surface()), DegenerateGaussMap);
  EXPECT_THROW(el_residual(SupportBody2::segment(1.0), constant_density(2, 1.0), Objective::surface()), DegenerateGaussMap);
}

class Maximizer : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    trace_ = new OptimTrace(maximize(MassDensity::gaussian_bump(2, 1000.0, 1.0), Objective::pcap(1.5), SupportBody2::disk(1.0)));
  }
  static void TearDownTestSuite() { delete trace_; }
  static OptimTrace* trace_;
};

OptimTrace* Maximizer::trace_ = nullptr;

TEST_F(Maximizer, RecoversRadialOptimum) {
  const double rstar = disk_optimum(1000.0, 1.0, 1.0, 10.0);
  EXPECT_GT(disk_F(1000.0, 1.0, rstar), 0.0);
  ASSERT_FALSE(trace_->collapsed);
  EXPECT_TRUE(trace_->converged);
  EXPECT_LT(rel(mean_radius(trace_->body), rstar), 0.02);
  EXPECT_LT(rel(volume_radius(trace_->body), rstar), 0.02);
  EXPECT_LE(trace_->el_residual, 0.05);
}

TEST_F(Maximizer, AscentIsMonotone) {
  for (std::size_t i = 1; i < trace_->states.size(); ++i) {
    EXPECT_GE(trace_->states[i].objective, trace_->states[i - 1].objective - 1e-9 * std::abs(trace_->states[i - 1].objective));
  }
  EXPECT_NEAR(trace_->objective, trace_->states.back().objective, 0.0);
}

TEST_F(Maximizer, OptimumIsFixedPoint) {
  const auto again = maximize(MassDensity::gaussian_bump(2, 1000.0, 1.0), Objective::pcap(1.5), trace_->body);
  EXPECT_EQ(again.accepted_steps, 0);
  EXPECT_LE(again.el_residual, 0.05);
}

TEST_F(Maximizer, TranslationEquivariance) {
  const Vec2 v(0.7, -0.4);
  Eigen::VectorXd c(2);
  c << v.x(), v.y();
  const auto moved = maximize(MassDensity::gaussian_bump(2, 1000.0, 1.0, c), Objective::pcap(1.5), SupportBody2::disk(1.0, v));
  const auto& a = std::get<SupportBody2>(trace_->body);
  const auto& b = std::get<SupportBody2>(moved.body);
  EXPECT_LT((b.centroid() - a.centroid() - v).norm(), 0.02 * mean_radius(a));
  EXPECT_LT(rel(mean_radius(b), mean_radius(a)), 1e-3);
}

TEST(Maximize, TinyAmplitudeCollapses) {
  const auto t = maximize(MassDensity::gaussian_bump(2, 0.01, 1.0), Objective::pcap(1.5), SupportBody2::disk(1.0));
  EXPECT_TRUE(t.collapsed);
  EXPECT_EQ(t.stop_reason, "collapse");
}

TEST(Maximize, Errors) {
  const auto h = MassDensity::gaussian_bump(2, 10.0, 1.0);
  EXPECT_THROW(maximize(h, Objective::pcap(2.0), SupportBody2::disk(1.0)), ParameterError);
  EXPECT_THROW(maximize(h, Objective::pcap(1.5), ParamBody3::ball(1.0)), InputError);
  EXPECT_THROW(maximize(MassDensity::gaussian_bump(3, 10.0, 1.0), Objective::pcap(2.0), ParamBody3::box(1, 1, 1)), UnsupportedSmoothness);
}

TEST(Attainment, Starts) {
  AttainmentOptions o;
  o.starts = 3;
  o.base_radius = 2.0;
  const auto s = attainment_starts(MassDensity::gaussian_bump(2, 1.0, 1.0), o);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(mean_radius(s[0]), 1.0, 1e-9);
  EXPECT_NEAR(mean_radius(s[2]), 4.0, 1e-9);
}

TEST(Attainment, ScalingPreservesAttainment) {
  AttainmentOptions o;
  o.starts = 2;
  for (double lam : {1.0, 2.0}) {
    const auto r = attainment_check(MassDensity::gaussian_bump(2, 1000.0, 1.0).scaled(lam), Objective::pcap(1.5), o);
    EXPECT_TRUE(r.attained) << lam;
    EXPECT_EQ(r.marker, "attained");
    EXPECT_TRUE(r.witness.has_value());
  }
}

TEST(Attainment, Degenerate) {
  AttainmentOptions o;
  o.starts = 2;
  const auto r = attainment_check(MassDensity::gaussian_bump(2, 0.01, 1.0), Objective::pcap(1.5), o);
  EXPECT_FALSE(r.attained);
  EXPECT_EQ(r.marker, "degenerate");
  EXPECT_FALSE(r.witness.has_value());
  EXPECT_EQ(r.best_objective, 0.0);
}

TEST(Maximize, ThreeDimensionalBall) {
  // n = 3, p = 2: cap = 4 pi r, stationarity a r^2 e^{-r^2} = 1
  const double a = 50.0;
  std::uintmax_t it = 200;
  const auto [x0, x1] = boost::math::tools::toms748_solve([&](double r) { return a * r * r * std::exp(-r * r) - 1.0; }, 1.0, 5.0,
                                                          boost::math::tools::eps_tolerance<double>(50), it);
  const double rstar = 0.5 * (x0 + x1);
  const auto t = maximize(MassDensity::gaussian_bump(3, a, 1.0), Objective::pcap(2.0), ParamBody3::ball(1.8));
  ASSERT_FALSE(t.collapsed);
  EXPECT_LT(rel(mean_radius(t.body), rstar), 0.02);
}
