#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "convcap/core.hpp"
#include "convcap/quadrature.hpp"

namespace convcap {

/// Planar convex body stored as samples of its support function
/// h(theta_k), theta_k = 2 pi k / N.
class SupportBody2 {
 public:
  static constexpr int kDefaultGridSize = 720;

  SupportBody2() = default;

  explicit SupportBody2(std::vector<double> support_values)
      : h_(std::move(support_values)), spline_(h_) {
    if (h_.size() < 8) throw InputError("support grid needs at least 8 samples");
    spectral_derivatives();
  }

  // ---- factories -------------------------------------------------------

  static SupportBody2 disk(double radius, Vec2 center = Vec2::Zero(),
                           int grid = kDefaultGridSize) {
    return sampled(grid, [&](double t) { return radius + center.dot(direction(t)); });
  }

  /// Ellipse with semi-axes a (along the rotated x axis) and b.
  static SupportBody2 ellipse(double a, double b, Vec2 center = Vec2::Zero(),
                              double rotation = 0.0, int grid = kDefaultGridSize) {
    return sampled(grid, [&](double t) {
      const double c = std::cos(t - rotation), s = std::sin(t - rotation);
      return std::sqrt(a * a * c * c + b * b * s * s) + center.dot(direction(t));
    });
  }

  /// Centered segment of length L along the x axis; not smooth.
  static SupportBody2 segment(double length, int grid = kDefaultGridSize) {
    return sampled(grid, [&](double t) { return 0.5 * length * std::abs(std::cos(t)); });
  }

  /// h(t) = r0 + sum_m a_m cos(m t) + b_m sin(m t), harmonics starting at m = 1.
  static SupportBody2 fourier(double r0, const std::vector<double>& cos_coef,
                              const std::vector<double>& sin_coef,
                              int grid = kDefaultGridSize) {
    return sampled(grid, [&](double t) {
      double v = r0;
      for (std::size_t m = 0; m < cos_coef.size(); ++m) v += cos_coef[m] * std::cos((m + 1.0) * t);
      for (std::size_t m = 0; m < sin_coef.size(); ++m) v += sin_coef[m] * std::sin((m + 1.0) * t);
      return v;
    });
  }

  template <class F>
  static SupportBody2 sampled(int grid, F&& f) {
    if (grid < 8) throw InputError("support grid needs at least 8 samples");
    std::vector<double> v(grid);
    for (int k = 0; k < grid; ++k) v[k] = f(2.0 * pi * k / grid);
    return SupportBody2(std::move(v));
  }

  // ---- grid access -----------------------------------------------------

  int grid_size() const { return static_cast<int>(h_.size()); }
  double step() const { return 2.0 * pi / grid_size(); }
  double angle(int k) const { return step() * k; }
  const std::vector<double>& support_values() const { return h_; }
  double value(int k) const { return h_[wrap(k)]; }

  static Vec2 direction(double t) { return {std::cos(t), std::sin(t)}; }

  /// h at an arbitrary angle (periodic cubic interpolation).
  double support_at(double t) const { return spline_(t); }
  double support_derivative(double t) const { return spline_.derivative(t); }

  double support(const Vec2& dir) const {
    if (std::abs(dir.norm() - 1.0) > 1e-9) throw InputError("support direction must be a unit vector");
    return support_at(std::atan2(dir.y(), dir.x()));
  }

  /// rho_k = h + h'' at grid angle k (spectral derivative of the samples).
  double curvature_radius(int k) const { return rho_[wrap(k)]; }

  /// h' at grid angle k.
  double support_slope(int k) const { return dh_[wrap(k)]; }

  const std::vector<double>& curvature_radii() const { return rho_; }

  double min_curvature_radius() const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_size(); ++k) m = std::min(m, curvature_radius(k));
    return m;
  }

  double max_support() const { return *std::max_element(h_.begin(), h_.end()); }

  /// Discrete convexity: h_{k-1} + h_{k+1} - 2 h_k + dt^2 h_k >= -eps_conv.
  bool is_convex(double eps_rel = 1e-9) const {
    const double d2 = step() * step();
    const double eps = eps_rel * std::abs(max_support());
    for (int k = 0; k < grid_size(); ++k) {
      if (value(k - 1) + value(k + 1) - 2.0 * value(k) + d2 * value(k) < -eps) return false;
    }
    return true;
  }

  /// Strict convexity: every discrete curvature radius positive.
  bool is_smooth(double rel_floor = 1e-6) const {
    return min_curvature_radius() > rel_floor * std::abs(max_support());
  }

  void require_convex() const {
    if (!is_convex()) throw InputError("support values violate discrete convexity");
  }

  void require_smooth() const {
    if (!is_smooth()) {
      throw UnsupportedSmoothness("support body has vanishing curvature radius; curvature undefined");
    }
  }

  /// Boundary point with outward normal direction(t): h u + h' u_perp.
  Vec2 boundary_point(double t) const {
    const Vec2 u = direction(t);
    const Vec2 up(-u.y(), u.x());
    return support_at(t) * u + support_derivative(t) * up;
  }

  Vec2 boundary_point_at(int k) const {
    const Vec2 u = direction(angle(k));
    return value(k) * u + support_slope(k) * Vec2(-u.y(), u.x());
  }

  // ---- global quantities -----------------------------------------------

  double perimeter() const {
    double s = 0.0;
    for (double v : h_) s += v;
    return s * step();
  }

  /// 1/2 int h (h + h'') dtheta with the discrete curvature radius.
  double area() const {
    double s = 0.0;
    for (int k = 0; k < grid_size(); ++k) s += value(k) * curvature_radius(k);
    return 0.5 * s * step();
  }

  /// b(A) = (2 / 2 pi) int h dtheta.
  double mean_width() const { return perimeter() / pi; }

  /// max over directions of h(u) + h(-u), refined by golden section.
  double diameter() const {
    const int n = grid_size();
    auto width = [&](double t) { return support_at(t) + support_at(t + pi); };
    int best = 0;
    double wbest = -1.0;
    for (int k = 0; k < n; ++k) {
      const double w = width(angle(k));
      if (w > wbest) {
        wbest = w;
        best = k;
      }
    }
    const auto [t, w] = golden_maximize(width, angle(best) - step(), angle(best) + step(), 1e-12);
    return std::max(w, wbest);
  }

  /// Centroid from (1/3A) int x h rho dtheta.
  Vec2 centroid() const {
    Vec2 acc = Vec2::Zero();
    for (int k = 0; k < grid_size(); ++k) acc += boundary_point_at(k) * value(k) * curvature_radius(k);
    return acc * step() / (3.0 * area());
  }

  /// Signed distance b_A(x) = max_u (x.u - h(u)), exact for convex bodies.
  double signed_distance(const Vec2& x) const {
    auto g = [&](double t) { return x.dot(direction(t)) - support_at(t); };
    int best = 0;
    double gbest = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_size(); ++k) {
      const double v = x.dot(direction(angle(k))) - value(k);
      if (v > gbest) {
        gbest = v;
        best = k;
      }
    }
    const auto [t, v] = golden_maximize(g, angle(best) - step(), angle(best) + step(), 1e-13);
    return std::max(v, gbest);
  }

  /// Distance from center to the boundary along polar angle phi. The center
  /// must be interior.
  double radial(const Vec2& center, double phi) const {
    const Vec2 w = direction(phi);
    // The boundary point with normal angle t lies in direction phi when
    // cross(w, x(t) - c) = 0; the normal angle is within pi/2 of phi.
    auto cross = [&](double t) {
      const Vec2 d = boundary_point(t) - center;
      return w.x() * d.y() - w.y() * d.x();
    };
    double a = phi - 0.5 * pi + 1e-12, b = phi + 0.5 * pi - 1e-12;
    double fa = cross(a), fb = cross(b);
    if ((fa > 0) == (fb > 0)) {
      // flat pieces can pin the sign at the bracket ends; scan for a change
      const int n = 64;
      double prev = a, fprev = fa;
      for (int i = 1; i <= n; ++i) {
        const double t = a + (b - a) * i / n;
        const double ft = cross(t);
        if ((ft > 0) != (fprev > 0) || ft == 0.0) {
          a = prev;
          b = t;
          break;
        }
        prev = t;
        fprev = ft;
      }
    }
    const double t = find_root(cross, a, b, 1e-15);
    return (boundary_point(t) - center).dot(w);
  }

  /// Normal angle of the boundary point hit by the ray from center along phi.
  double normal_angle_of_ray(const Vec2& center, double phi) const {
    const Vec2 w = direction(phi);
    auto cross = [&](double t) {
      const Vec2 d = boundary_point(t) - center;
      return w.x() * d.y() - w.y() * d.x();
    };
    return find_root(cross, phi - 0.5 * pi + 1e-12, phi + 0.5 * pi - 1e-12, 1e-15);
  }

  // ---- arithmetic ------------------------------------------------------

  SupportBody2 translated(const Vec2& v) const {
    std::vector<double> out(h_);
    for (int k = 0; k < grid_size(); ++k) out[k] += v.dot(direction(angle(k)));
    return SupportBody2(std::move(out));
  }

  SupportBody2 scaled(double lambda) const {
    std::vector<double> out(h_);
    for (double& v : out) v *= lambda;
    return SupportBody2(std::move(out));
  }

 private:
  int wrap(int k) const {
    const int n = grid_size();
    return ((k % n) + n) % n;
  }

  void spectral_derivatives() {
    const int n = grid_size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> c, d1(n), d2(n);
    fft.fwd(c, h_);
    for (int m = 0; m < n; ++m) {
      const int f = m <= n / 2 ? m : m - n;
      const std::complex<double> im(0.0, f);
      d1[m] = (2 * m == n) ? 0.0 : im * c[m];
      d2[m] = -static_cast<double>(f) * f * c[m];
    }
    std::vector<std::complex<double>> t1, t2;
    fft.inv(t1, d1);
    fft.inv(t2, d2);
    dh_.resize(n);
    rho_.resize(n);
    for (int k = 0; k < n; ++k) {
      dh_[k] = t1[k].real();
      rho_[k] = h_[k] + t2[k].real();
    }
  }

  std::vector<double> h_;
  PeriodicSpline spline_;
  std::vector<double> dh_;
  std::vector<double> rho_;
};

/// A + t B; both bodies must share the same support grid.
inline SupportBody2 minkowski_sum(const SupportBody2& a, const SupportBody2& b, double t = 1.0) {
  if (t < 0.0) throw InputError("Minkowski coefficient must be nonnegative");
  if (a.grid_size() != b.grid_size()) throw InputError("Minkowski sum of incompatible support grids");
  std::vector<double> v(a.grid_size());
  for (int k = 0; k < a.grid_size(); ++k) v[k] = a.value(k) + t * b.value(k);
  return SupportBody2(std::move(v));
}

}  // namespace convcap
