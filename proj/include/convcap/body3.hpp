#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "convcap/core.hpp"
#include "convcap/quadrature.hpp"

namespace convcap {

/// Directions and area weights of a product Gauss-Legendre (in cos theta) x
/// trapezoid (in phi) rule on S^2.
struct SphereRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};

inline SphereRule sphere_rule(int order) {
  const QuadratureRule gl = gauss_legendre(order);
  const int nphi = 2 * order;
  SphereRule rule;
  rule.directions.reserve(static_cast<std::size_t>(order) * nphi);
  for (int i = 0; i < order; ++i) {
    const double z = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * pi * (j + 0.5) / nphi;
      rule.directions.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
      rule.weights.push_back(gl.weights[i] * 2.0 * pi / nphi);
    }
  }
  return rule;
}

/// Minimal Nelder-Mead for small convex problems.
template <int N, class F>
std::pair<Eigen::Matrix<double, N, 1>, double> nelder_mead(F&& f, Eigen::Matrix<double, N, 1> x0,
                                                          double scale, double ftol = 1e-15,
                                                          int max_iter = 2000) {
  using V = Eigen::Matrix<double, N, 1>;
  std::array<V, N + 1> s;
  std::array<double, N + 1> fv;
  s[0] = x0;
  for (int i = 0; i < N; ++i) {
    s[i + 1] = x0;
    s[i + 1][i] += scale;
  }
  for (int i = 0; i <= N; ++i) fv[i] = f(s[i]);
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, N + 1> idx;
    for (int i = 0; i <= N; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = idx[0], worst = idx[N], second = idx[N - 1];
    double size = 0.0;
    for (int i = 0; i <= N; ++i) size = std::max(size, (s[i] - s[best]).cwiseAbs().maxCoeff());
    if (std::abs(fv[worst] - fv[best]) <= ftol * (1.0 + std::abs(fv[best])) && size < 1e-9) break;
    V c = V::Zero();
    for (int i = 0; i <= N; ++i)
      if (i != worst) c += s[i];
    c /= N;
    const V xr = c + (c - s[worst]);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const V xe = c + 2.0 * (c - s[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        s[worst] = xe;
        fv[worst] = fe;
      } else {
        s[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      s[worst] = xr;
      fv[worst] = fr;
    } else {
      const V xc = fr < fv[worst] ? V(c + 0.5 * (xr - c)) : V(c + 0.5 * (s[worst] - c));
      const double fc = f(xc);
      if (fc < std::min(fr, fv[worst])) {
        s[worst] = xc;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= N; ++i) {
          if (i == best) continue;
          s[i] = s[best] + 0.5 * (s[i] - s[best]);
          fv[i] = f(s[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= N; ++i)
    if (fv[i] < fv[best]) best = i;
  return {s[best], fv[best]};
}

/// Orthonormal pair spanning the plane orthogonal to unit w.
inline std::pair<Vec3, Vec3> tangent_frame(const Vec3& w) {
  const Vec3 a = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (a - a.dot(w) * w).normalized();
  return {e1, w.cross(e1)};
}

/// Sampled boundary of a smooth body with principal curvatures (empty for
/// non-smooth bodies).
struct SurfaceQuadrature {
  int dimension = 3;
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> weights;
  std::vector<std::vector<double>> principal_curvatures;

  std::size_t size() const { return weights.size(); }

  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  /// Normalized mean curvature (average of the principal curvatures).
  double mean_curvature(std::size_t i) const {
    double s = 0.0;
    for (double k : principal_curvatures[i]) s += k;
    return s / static_cast<double>(principal_curvatures[i].size());
  }

  double gauss_curvature(std::size_t i) const {
    double g = 1.0;
    for (double k : principal_curvatures[i]) g *= k;
    return g;
  }
};

/// Closed parametric convex bodies in R^3.
struct ParamBody3 {
  enum class Kind { Ball, Ellipsoid, Box };

  Kind kind = Kind::Ball;
  Vec3 center = Vec3::Zero();
  /// Columns are the body axes expressed in world coordinates.
  Mat3 rotation = Mat3::Identity();
  /// Radius (ball, all entries equal), semi-axes (ellipsoid) or half-sides (box).
  Vec3 axes = Vec3::Ones();
  int quadrature_order = 48;

  static ParamBody3 ball(double r, Vec3 c = Vec3::Zero()) {
    if (!(r > 0)) throw InputError("ball radius must be positive");
    ParamBody3 b;
    b.kind = Kind::Ball;
    b.center = c;
    b.axes = Vec3::Constant(r);
    return b;
  }

  static ParamBody3 ellipsoid(double a, double b, double c, Vec3 ctr = Vec3::Zero(),
                              Mat3 rot = Mat3::Identity()) {
    if (!(a > 0 && b > 0 && c > 0)) throw InputError("ellipsoid semi-axes must be positive");
    ParamBody3 e;
    e.kind = Kind::Ellipsoid;
    e.center = ctr;
    e.rotation = rot;
    e.axes = Vec3(a, b, c);
    return e;
  }

  static ParamBody3 box(double sx, double sy, double sz, Vec3 ctr = Vec3::Zero(),
                        Mat3 rot = Mat3::Identity()) {
    if (!(sx > 0 && sy > 0 && sz > 0)) throw InputError("box half-sides must be positive");
    ParamBody3 e;
    e.kind = Kind::Box;
    e.center = ctr;
    e.rotation = rot;
    e.axes = Vec3(sx, sy, sz);
    return e;
  }

  double radius() const { return axes.x(); }
  bool is_smooth() const { return kind != Kind::Box; }

  void require_smooth() const {
    if (!is_smooth()) throw UnsupportedSmoothness("box boundary carries no curvature");
  }

  ParamBody3 scaled(double lambda) const {
    ParamBody3 b = *this;
    b.center *= lambda;
    b.axes *= lambda;
    return b;
  }

  ParamBody3 translated(const Vec3& v) const {
    ParamBody3 b = *this;
    b.center += v;
    return b;
  }

  ParamBody3 rotated(const Mat3& r) const {
    ParamBody3 b = *this;
    b.rotation = r * rotation;
    b.center = r * center;
    return b;
  }

  /// Support function without the unit-length check (positively homogeneous).
  double support_raw(const Vec3& u) const {
    const Vec3 l = rotation.transpose() * u;
    switch (kind) {
      case Kind::Ball:
        return center.dot(u) + axes.x() * u.norm();
      case Kind::Ellipsoid:
        return center.dot(u) + l.cwiseProduct(axes).norm();
      case Kind::Box:
        return center.dot(u) + l.cwiseAbs().dot(axes);
    }
    return 0.0;
  }

  double support(const Vec3& u) const {
    if (std::abs(u.norm() - 1.0) > 1e-9) throw InputError("support direction must be a unit vector");
    return support_raw(u);
  }

  double volume() const {
    const double abc = axes.prod();
    return kind == Kind::Box ? 8.0 * abc : 4.0 * pi / 3.0 * abc;
  }

  double surface_area() const {
    switch (kind) {
      case Kind::Ball:
        return 4.0 * pi * axes.x() * axes.x();
      case Kind::Box:
        return 8.0 * (axes.x() * axes.y() + axes.y() * axes.z() + axes.x() * axes.z());
      case Kind::Ellipsoid:
        return curvature_quadrature().total_weight();
    }
    return 0.0;
  }

  double diameter() const {
    switch (kind) {
      case Kind::Ball:
        return 2.0 * axes.x();
      case Kind::Box:
        return 2.0 * axes.norm();
      case Kind::Ellipsoid:
        return 2.0 * axes.maxCoeff();
    }
    return 0.0;
  }

  /// b(A) = (2 / sigma_2) int_{S^2} h.
  double mean_width() const {
    switch (kind) {
      case Kind::Ball:
        return 2.0 * axes.x();
      case Kind::Box:
        return axes.sum();
      case Kind::Ellipsoid: {
        const SphereRule rule = sphere_rule(quadrature_order);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.weights.size(); ++i) s += rule.weights[i] * support_raw(rule.directions[i]);
        return 2.0 * s / (4.0 * pi);
      }
    }
    return 0.0;
  }

  /// Distance from the center to the boundary along unit direction w.
  double radial(const Vec3& w) const {
    const Vec3 l = rotation.transpose() * w;
    switch (kind) {
      case Kind::Ball:
        return axes.x();
      case Kind::Ellipsoid:
        return 1.0 / l.cwiseQuotient(axes).norm();
      case Kind::Box:
        return 1.0 / l.cwiseAbs().cwiseQuotient(axes).maxCoeff();
    }
    return 0.0;
  }

  /// Outward unit normal at the boundary point center + radial(w) w.
  Vec3 normal_along(const Vec3& w) const {
    const Vec3 l = rotation.transpose() * w;
    switch (kind) {
      case Kind::Ball:
        return w;
      case Kind::Ellipsoid:
        return (rotation * l.cwiseQuotient(axes.cwiseProduct(axes))).normalized();
      case Kind::Box: {
        const Vec3 q = l.cwiseAbs().cwiseQuotient(axes);
        int i = 0;
        q.maxCoeff(&i);
        Vec3 n = Vec3::Zero();
        n[i] = l[i] >= 0 ? 1.0 : -1.0;
        return rotation * n;
      }
    }
    return w;
  }

  /// Signed distance: negative inside, zero on the boundary.
  double signed_distance(const Vec3& x) const {
    const Vec3 y = rotation.transpose() * (x - center);
    switch (kind) {
      case Kind::Ball:
        return y.norm() - axes.x();
      case Kind::Box: {
        const Vec3 q = y.cwiseAbs() - axes;
        const double outside = q.cwiseMax(0.0).norm();
        const double inside = std::min(q.maxCoeff(), 0.0);
        return outside + inside;
      }
      case Kind::Ellipsoid:
        return ellipsoid_signed_distance(y);
    }
    return 0.0;
  }

  /// Boundary sampled by a product rule with principal curvatures.
  SurfaceQuadrature curvature_quadrature() const {
    require_smooth();
    const int q = quadrature_order;
    const QuadratureRule gl = gauss_legendre(q, 0.0, pi);
    const int nphi = 2 * q;
    const double a = axes.x(), b = axes.y(), c = axes.z();
    SurfaceQuadrature sq;
    sq.dimension = 3;
    for (int i = 0; i < q; ++i) {
      const double th = gl.nodes[i];
      const double st = std::sin(th), ct = std::cos(th);
      for (int j = 0; j < nphi; ++j) {
        const double ph = 2.0 * pi * (j + 0.5) / nphi;
        const double sp = std::sin(ph), cp = std::cos(ph);
        const Vec3 x(a * st * cp, b * st * sp, c * ct);
        const Vec3 xt(a * ct * cp, b * ct * sp, -c * st);
        const Vec3 xp(-a * st * sp, b * st * cp, 0.0);
        const Vec3 xtt = -x;
        const Vec3 xtp(-a * ct * sp, b * ct * cp, 0.0);
        const Vec3 xpp(-a * st * cp, -b * st * sp, 0.0);
        const Vec3 cr = xt.cross(xp);
        const double jac = cr.norm();
        const Vec3 nrm = cr / jac;
        const double E = xt.dot(xt), F = xt.dot(xp), G = xp.dot(xp);
        const double L = -xtt.dot(nrm), M = -xtp.dot(nrm), N = -xpp.dot(nrm);
        // shape operator I^{-1} II; eigenvalues are the principal curvatures
        const double det = E * G - F * F;
        const double s11 = (G * L - F * M) / det, s12 = (G * M - F * N) / det;
        const double s21 = (E * M - F * L) / det, s22 = (E * N - F * M) / det;
        const double tr = s11 + s22;
        const double half = 0.5 * (s11 - s22);
        const double disc = std::sqrt(std::max(0.0, half * half + s12 * s21));
        sq.points.push_back(center + rotation * x);
        sq.normals.push_back(rotation * nrm);
        sq.weights.push_back(jac * gl.weights[i] * 2.0 * pi / nphi);
        sq.principal_curvatures.push_back({0.5 * tr + disc, 0.5 * tr - disc});
      }
    }
    return sq;
  }

 private:
  // Closest point on the ellipsoid in its local frame: solve
  // sum (a_i y_i / (t + a_i^2))^2 = 1 for the Lagrange multiplier t.
  double ellipsoid_signed_distance(Vec3 y) const {
    const Vec3 e = axes;
    const double g = y.cwiseQuotient(e).squaredNorm();
    if (std::abs(g - 1.0) < 1e-15) return 0.0;
    int imin = 0;
    const double emin = e.minCoeff(&imin);
    // the distance is continuous; nudging off the symmetry plane of the
    // shortest axis keeps the multiplier equation strictly monotone
    if (g < 1.0 && std::abs(y[imin]) < 1e-12 * emin) y[imin] = 1e-12 * emin;
    auto f = [&](double t) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double v = e[i] * y[i] / (t + e[i] * e[i]);
        s += v * v;
      }
      return s - 1.0;
    };
    double lo = 0.0, hi = 0.0;
    if (g > 1.0) {
      hi = e.maxCoeff() * y.norm() + 1.0;
    } else {
      double gap = emin * emin;
      lo = -emin * emin + gap;
      while (f(lo) < 0.0 && gap > 1e-300) {
        gap *= 0.5;
        lo = -emin * emin + gap;
      }
    }
    const double t = find_root(f, lo, hi, 1e-16);
    Vec3 p;
    for (int i = 0; i < 3; ++i) p[i] = e[i] * e[i] * y[i] / (t + e[i] * e[i]);
    const double d = (p - y).norm();
    return g > 1.0 ? d : -d;
  }
};

/// Minkowski combination sum_j lambda_j B_j of closed-family bodies; only
/// support-function queries and quantities derived from them are available.
struct SupportBody3 {
  std::vector<std::pair<double, ParamBody3>> terms;

  Vec3 center() const {
    Vec3 c = Vec3::Zero();
    for (const auto& [w, b] : terms) c += w * b.center;
    return c;
  }

  double support_raw(const Vec3& u) const {
    double s = 0.0;
    for (const auto& [w, b] : terms) s += w * b.support_raw(u);
    return s;
  }

  double support(const Vec3& u) const {
    if (std::abs(u.norm() - 1.0) > 1e-9) throw InputError("support direction must be a unit vector");
    return support_raw(u);
  }

  /// rho(w) = min over v with v.w = 1 of h(v) - c.v (a convex problem in the
  /// tangent plane of w). Also returns the minimizing normal.
  std::pair<double, Vec3> radial_and_normal(const Vec3& w) const {
    const Vec3 c = center();
    const auto [e1, e2] = tangent_frame(w);
    auto f = [&](const Eigen::Vector2d& ab) {
      const Vec3 v = w + ab.x() * e1 + ab.y() * e2;
      return support_raw(v) - c.dot(v);
    };
    auto [ab, val] = nelder_mead<2>(f, Eigen::Vector2d::Zero(), 0.2);
    // restart once from the optimum to escape simplex collapse
    auto [ab2, val2] = nelder_mead<2>(f, ab, 0.02);
    if (val2 < val) {
      ab = ab2;
      val = val2;
    }
    const Vec3 v = w + ab.x() * e1 + ab.y() * e2;
    return {val, v.normalized()};
  }

  double radial(const Vec3& w) const { return radial_and_normal(w).first; }

  double mean_width(int order = 48) const {
    double s = 0.0;
    for (const auto& [w, b] : terms) s += w * b.mean_width();
    (void)order;
    return s;
  }

  double volume(int order = 48) const {
    const SphereRule rule = sphere_rule(order);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.weights.size(); ++i) {
      const double r = radial(rule.directions[i]);
      s += rule.weights[i] * r * r * r / 3.0;
    }
    return s;
  }

  double diameter(int order = 24) const {
    const SphereRule rule = sphere_rule(order);
    auto width = [&](const Vec3& u) { return support_raw(u) + support_raw(-u); };
    std::size_t best = 0;
    double wb = -1.0;
    for (std::size_t i = 0; i < rule.weights.size(); ++i) {
      const double v = width(rule.directions[i]);
      if (v > wb) {
        wb = v;
        best = i;
      }
    }
    const Vec3 w0 = rule.directions[best];
    const auto [e1, e2] = tangent_frame(w0);
    auto f = [&](const Eigen::Vector2d& ab) {
      return -width((w0 + ab.x() * e1 + ab.y() * e2).normalized());
    };
    const auto [ab, val] = nelder_mead<2>(f, Eigen::Vector2d::Zero(), 0.1);
    return std::max(wb, -val);
  }
};

inline SupportBody3 minkowski_sum(const SupportBody3& a, const SupportBody3& b, double t = 1.0) {
  if (t < 0.0) throw InputError("Minkowski coefficient must be nonnegative");
  SupportBody3 out = a;
  for (const auto& [w, body] : b.terms) out.terms.emplace_back(t * w, body);
  return out;
}

/// Ball + t Ball stays in the closed family; other combinations are lifted
/// to SupportBody3.
inline ParamBody3 minkowski_sum(const ParamBody3& a, const ParamBody3& b, double t = 1.0) {
  if (t < 0.0) throw InputError("Minkowski coefficient must be nonnegative");
  if (a.kind == ParamBody3::Kind::Ball && b.kind == ParamBody3::Kind::Ball) {
    return ParamBody3::ball(a.radius() + t * b.radius(), a.center + t * b.center);
  }
  if (b.kind == ParamBody3::Kind::Ball) {
    if (a.kind == ParamBody3::Kind::Ellipsoid || a.kind == ParamBody3::Kind::Box) {
      if (t * b.radius() == 0.0) return a.translated(t * b.center);
    }
  }
  throw InputError("Minkowski sum leaves the closed parametric family; use SupportBody3");
}

}  // namespace convcap
