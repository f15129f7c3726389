#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "convcap/body3.hpp"
#include "convcap/capacity.hpp"
#include "convcap/core.hpp"
#include "convcap/geometry.hpp"
#include "convcap/quadrature.hpp"

namespace convcap {

/// Graph function f on R^3 minus a centered ball, radial (closed form or
/// tabulated) or general.
class GraphFunction {
 public:
  enum class Kind { Radial, Tabulated, General };
  using Profile = std::function<double(double)>;
  static constexpr int n = 3;

  /// f(rho) = sqrt(8 m (rho - 2m)), horizon at rho = 2m.
  static GraphFunction schwarzschild(double m) {
    if (!(m > 0.0)) throw InputError("Schwarzschild mass must be positive");
    const double rs = 2.0 * m;
    GraphFunction g = radial(
        [m, rs](double r) { return std::sqrt(8.0 * m * (r - rs)); },
        [m, rs](double r) { return std::sqrt(2.0 * m / (r - rs)); },
        [m, rs](double r) { return -0.5 * std::sqrt(2.0 * m) * std::pow(r - rs, -1.5); },
        [m, rs](double r) { return 0.75 * std::sqrt(2.0 * m) * std::pow(r - rs, -2.5); }, rs, 1.0);
    g.name_ = "schwarzschild";
    g.mass_parameter_ = m;
    // f'^2 / (1 + f'^2) = 2m / rho, exact near the horizon
    g.q_ = [m](double r) { return 2.0 * m / r; };
    g.dq_ = [m](double r) { return -2.0 * m / (r * r); };
    return g;
  }

  static GraphFunction radial(Profile f, Profile d1, Profile d2, Profile d3, double inner_radius, double gamma) {
    GraphFunction g(Kind::Radial, inner_radius, gamma);
    g.f_ = std::move(f);
    g.d1_ = std::move(d1);
    g.d2_ = std::move(d2);
    g.d3_ = std::move(d3);
    g.name_ = "radial";
    return g;
  }

  static GraphFunction constant(double c, double inner_radius = 1.0) {
    GraphFunction g = radial([c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                             [](double) { return 0.0; }, inner_radius, 2.0);
    g.name_ = "constant";
    return g;
  }

  /// f(rho) = c rho^e: gamma = 2 (1 - e).
  static GraphFunction power(double c, double e, double inner_radius = 1.0) {
    GraphFunction g = radial([c, e](double r) { return c * std::pow(r, e); },
                             [c, e](double r) { return c * e * std::pow(r, e - 1.0); },
                             [c, e](double r) { return c * e * (e - 1.0) * std::pow(r, e - 2.0); },
                             [c, e](double r) { return c * e * (e - 1.0) * (e - 2.0) * std::pow(r, e - 3.0); },
                             inner_radius, 2.0 * (1.0 - e));
    g.name_ = "power";
    return g;
  }

  /// Uniform samples f(r0 + k dr) interpolated by a cubic B-spline.
  static GraphFunction tabulated(double r0, double dr, std::vector<double> values, double gamma) {
    if (values.size() < 8) throw InputError("tabulated profile needs at least 8 samples");
    if (!(dr > 0.0)) throw InputError("tabulated profile step must be positive");
    GraphFunction g(Kind::Tabulated, r0, gamma);
    auto sp = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(values.begin(), values.end(),
                                                                                           r0, dr);
    const double rmax = r0 + dr * (values.size() - 1);
    g.outer_radius_ = rmax;
    auto check = [r0, rmax](double r) {
      if (r < r0 || r > rmax) throw DomainError("radius outside the tabulated profile");
    };
    g.f_ = [sp, check](double r) { check(r); return (*sp)(r); };
    g.d1_ = [sp, check](double r) { check(r); return sp->prime(r); };
    g.d2_ = [sp, check](double r) { check(r); return sp->double_prime(r); };
    const double h = dr * 1e-2;
    g.d3_ = [sp, check, h, r0, rmax](double r) {
      check(r);
      const double a = std::max(r0, r - h), b = std::min(rmax, r + h);
      return (sp->double_prime(b) - sp->double_prime(a)) / (b - a);
    };
    g.name_ = "tabulated";
    return g;
  }

  /// Arbitrary f(x); derivatives by central differences.
  static GraphFunction general(std::function<double(const Vec3&)> f, double inner_radius, double gamma) {
    GraphFunction g(Kind::General, inner_radius, gamma);
    g.general_ = std::move(f);
    g.name_ = "general";
    return g;
  }

  /// f = c x_1.
  static GraphFunction linear(double c, double inner_radius = 1.0) {
    GraphFunction g = general([c](const Vec3& x) { return c * x.x(); }, inner_radius, 2.0);
    g.name_ = "linear";
    return g;
  }

  Kind kind() const { return kind_; }
  bool is_radial() const { return kind_ != Kind::General; }
  double inner_radius() const { return inner_; }
  double outer_radius() const { return outer_radius_; }
  double gamma() const { return gamma_; }
  const std::string& name() const { return name_; }
  /// m of the Schwarzschild preset, NaN otherwise.
  double mass_parameter() const { return mass_parameter_; }

  void require_exterior(double r) const {
    if (!(r > inner_)) throw DomainError("graph function evaluated at or inside the inner boundary");
  }

  double value(const Vec3& x) const {
    require_exterior(x.norm());
    return kind_ == Kind::General ? general_(x) : f_(x.norm());
  }

  /// Radial derivatives f^(k)(rho), k = 0..3.
  double radial_derivative(int k, double r) const {
    if (kind_ == Kind::General) throw InputError("radial derivative of a non-radial graph function");
    require_exterior(r);
    switch (k) {
      case 0: return f_(r);
      case 1: return d1_(r);
      case 2: return d2_(r);
      case 3: return d3_(r);
      default: throw InputError("derivative order must be 0..3");
    }
  }

  /// q = f'^2 / (1 + f'^2) and dq/drho for radial profiles.
  double q(double r) const {
    require_exterior(r);
    if (q_) return q_(r);
    const double d = d1_(r);
    return d * d / (1.0 + d * d);
  }

  double dq(double r) const {
    require_exterior(r);
    if (dq_) return dq_(r);
    const double d = d1_(r);
    const double s = 1.0 + d * d;
    return 2.0 * d * d2_(r) / (s * s);
  }

  /// Gradient and Hessian by central differences (general kind).
  void derivatives(const Vec3& x, Vec3& grad, Mat3& hess, double step) const {
    for (int i = 0; i < 3; ++i) {
      const Vec3 ei = Vec3::Unit(i) * step;
      grad[i] = (general_(x + ei) - general_(x - ei)) / (2.0 * step);
      for (int j = i; j < 3; ++j) {
        const Vec3 ej = Vec3::Unit(j) * step;
        const double v = (general_(x + ei + ej) - general_(x + ei - ej) - general_(x - ei + ej) + general_(x - ei - ej)) /
                         (4.0 * step * step);
        hess(i, j) = hess(j, i) = v;
      }
    }
  }

 private:
  GraphFunction(Kind kind, double inner, double gamma) : kind_(kind), inner_(inner), gamma_(gamma) {
    if (!(inner > 0.0)) throw InputError("inner radius must be positive");
  }

  Kind kind_;
  double inner_;
  double gamma_;
  double outer_radius_ = std::numeric_limits<double>::infinity();
  double mass_parameter_ = std::numeric_limits<double>::quiet_NaN();
  std::string name_;
  Profile f_, d1_, d2_, d3_, q_, dq_;
  std::function<double(const Vec3&)> general_;
};

namespace detail {

/// V_j = sum_i (f_ii f_j - f_ij f_i) / (1 + |grad f|^2) by differences.
inline Vec3 curvature_flux(const GraphFunction& f, const Vec3& x, double step) {
  Vec3 g;
  Mat3 H;
  f.derivatives(x, g, H, step);
  const double lap = H.trace();
  return (lap * g - H * g) / (1.0 + g.squaredNorm());
}

inline double difference_step(const Vec3& x) { return 1e-3 * std::max(1.0, x.norm()); }

}  // namespace detail

/// R_f = sum_j d/dx_j sum_i (f_ii f_j - f_ij f_i) / (1 + |grad f|^2).
inline double scalar_curvature(const GraphFunction& f, const Vec3& x) {
  const double r = x.norm();
  f.require_exterior(r);
  constexpr int n = GraphFunction::n;
  if (f.is_radial()) {
    // rho^{1-n} d/drho [(n-1) rho^{n-2} q]
    return (n - 1) * std::pow(r, 1 - n) * ((n - 2) * std::pow(r, n - 3) * f.q(r) + std::pow(r, n - 2) * f.dq(r));
  }
  const double h1 = detail::difference_step(x), h2 = 10.0 * h1;
  if (r - h2 - h1 <= f.inner_radius()) throw DomainError("difference stencil crosses the inner boundary");
  double div = 0.0;
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = Vec3::Unit(j) * h2;
    div += (detail::curvature_flux(f, x + e, h1)[j] - detail::curvature_flux(f, x - e, h1)[j]) / (2.0 * h2);
  }
  return div;
}

/// S_r integral of the ADM density (m_ADM normalization).
inline double adm_shell(const GraphFunction& f, double r) {
  f.require_exterior(r);
  constexpr int n = GraphFunction::n;
  if (f.is_radial()) return 0.5 * std::pow(r, n - 2) * f.q(r);
  const SphereRule rule = sphere_rule(16);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    const Vec3 w = rule.directions[i];
    const Vec3 x = r * w;
    s += rule.weights[i] * detail::curvature_flux(f, x, detail::difference_step(x)).dot(w);
  }
  return s * r * r / (2.0 * (n - 1) * unit_sphere_area(n));
}

struct AdmResult {
  /// m_ADM.
  double mass = 0.0;
  /// 2 m_ADM, the quantity in the Lam identity and the mass radius.
  double two_mass = 0.0;
  std::vector<double> radii;
  std::vector<double> shell_values;
  /// Fitted exponent s of a + b r^{-s}.
  double exponent = 0.0;
  double fit_coefficient = 0.0;
  /// RMS residual of the fit.
  double fit_residual = 0.0;
};

/// Shell integrals at the given radii extrapolated by a + b r^{-s}.
inline AdmResult adm_boundary(const GraphFunction& f, const std::vector<double>& radii) {
  if (radii.empty()) throw InputError("adm_boundary needs at least one radius");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw InputError("radii must increase");
  }
  AdmResult res;
  res.radii = radii;
  for (double r : radii) res.shell_values.push_back(adm_shell(f, r));
  const std::size_t m = radii.size();
  if (m < 3) {
    res.mass = res.shell_values.back();
    res.two_mass = 2.0 * res.mass;
    return res;
  }
  // linear least squares for (a, b) at fixed s; golden search over s
  auto fit = [&](double s, double& a, double& b) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = std::pow(radii[i], -s), y = res.shell_values[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double det = m * sxx - sx * sx;
    if (std::abs(det) < 1e-300) {
      a = sy / m;
      b = 0.0;
    } else {
      b = (m * sxy - sx * sy) / det;
      a = (sy - b * sx) / m;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = a + b * std::pow(radii[i], -s) - res.shell_values[i];
      ss += e * e;
    }
    return std::sqrt(ss / m);
  };
  double a = 0, b = 0;
  const auto [s, negres] = golden_maximize(
      [&](double s) {
        double aa, bb;
        return -fit(s, aa, bb);
      },
      0.05, 4.0, 1e-10);
  res.fit_residual = -negres;
  fit(s, a, b);
  res.exponent = s;
  res.fit_coefficient = b;
  res.mass = a;
  res.two_mass = 2.0 * a;
  return res;
}

struct DecayReport {
  double declared_gamma = 0.0;
  double fitted_slope = 0.0;
  double fitted_gamma = 0.0;
  bool admissible = false;
  std::string reason;
};

/// Log-log slope of |f_i| + |x||f_ij| + |x|^2|f_ijk| over geometric shells.
inline DecayReport validate_decay(const GraphFunction& f, double r_min = 0.0, double r_max = 0.0, int shells = 12) {
  constexpr int n = GraphFunction::n;
  if (r_min <= 0.0) r_min = 10.0 * f.inner_radius();
  if (r_max <= 0.0) r_max = std::isfinite(f.outer_radius()) ? f.outer_radius() : 1e4 * f.inner_radius();
  if (!(r_max > r_min)) throw InputError("decay shells need r_max > r_min");
  auto size = [&](double r) -> double {
    if (f.is_radial()) {
      const double d1 = std::abs(f.radial_derivative(1, r)), d2 = std::abs(f.radial_derivative(2, r));
      const double d3 = std::abs(f.radial_derivative(3, r));
      return d1 + r * std::max(d2, d1 / r) + r * r * std::max({d3, d2 / r, d1 / (r * r)});
    }
    const Vec3 x(r, 0.0, 0.0);
    Vec3 g;
    Mat3 H;
    const double h = detail::difference_step(x);
    f.derivatives(x, g, H, h);
    Mat3 Hp, Hm;
    Vec3 gp, gm;
    f.derivatives(x + Vec3::UnitX() * h, gp, Hp, h);
    f.derivatives(x - Vec3::UnitX() * h, gm, Hm, h);
    const double third = ((Hp - Hm) / (2.0 * h)).cwiseAbs().maxCoeff();
    return g.norm() + r * H.cwiseAbs().maxCoeff() + r * r * third;
  };
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int i = 0; i < shells; ++i) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (shells - 1));
    const double v = size(r);
    if (!(v > 0.0)) continue;
    const double x = std::log(r), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  DecayReport rep;
  rep.declared_gamma = f.gamma();
  if (used < 2) {
    // identically flat derivatives decay arbitrarily fast
    rep.fitted_slope = -std::numeric_limits<double>::infinity();
    rep.fitted_gamma = std::numeric_limits<double>::infinity();
  } else {
    rep.fitted_slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    rep.fitted_gamma = -2.0 * rep.fitted_slope;
  }
  const double floor = 0.5 * (n - 2);
  if (!(rep.declared_gamma > floor)) {
    rep.reason = "declared decay order does not exceed (n-2)/2";
  } else if (!(rep.fitted_gamma > floor * (1.0 + 1e-6))) {
    rep.reason = "fitted decay order does not exceed (n-2)/2";
  } else if (std::isfinite(rep.fitted_gamma) &&
             std::abs(rep.fitted_slope + 0.5 * rep.declared_gamma) > 0.2 * 0.5 * rep.declared_gamma &&
             rep.fitted_gamma < rep.declared_gamma) {
    rep.reason = "fitted slope slower than the declared decay";
  } else {
    rep.admissible = true;
  }
  return rep;
}

struct LamResult {
  double mass = 0.0;
  double two_mass = 0.0;
  /// (1/sigma) int_{dA} H
  double boundary_term = 0.0;
  /// (1/((n-1) n omega_n)) int R_f
  double bulk_term = 0.0;
};

/// m = 1/2 [ (1/sigma) int H + (1/((n-1) n omega_n)) int R_f ] for a radial f
/// with the inner ball as A.
inline LamResult lam_mass(const GraphFunction& f, const ParamBody3& A) {
  constexpr int n = GraphFunction::n;
  if (!f.is_radial()) throw InputError("bulk integral implemented for radial profiles only");
  if (A.kind != ParamBody3::Kind::Ball || A.center.norm() > 1e-12 || std::abs(A.radius() - f.inner_radius()) > 1e-9 * A.radius()) {
    throw PreconditionError("inner boundary must be the level-set sphere of the radial profile");
  }
  const double r0 = A.radius();
  const double probe = r0 * (1.0 + 1e-9);
  if (!(std::abs(f.radial_derivative(1, probe)) > 1e3)) {
    throw PreconditionError("profile is not a horizon: |grad f| <= 1e3 on the innermost shell");
  }
  LamResult res;
  const SurfaceQuadrature q = curvature_quadrature(A);
  double sH = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sH += q.weights[i] * q.mean_curvature(i);
  res.boundary_term = sH / unit_sphere_area(n);
  auto integrand = [&](double r) {
    // quadrature nodes may round onto the boundary itself
    if (!(r > r0)) return 0.0;
    return std::pow(r, n - 1) * scalar_curvature(f, Vec3(r, 0.0, 0.0));
  };
  double radial_integral = 0.0;
  if (std::isfinite(f.outer_radius())) {
    boost::math::quadrature::tanh_sinh<double> ts;
    radial_integral = ts.integrate([&](double r) { return integrand(r); }, r0, f.outer_radius());
  } else {
    boost::math::quadrature::exp_sinh<double> es;
    radial_integral = es.integrate([&](double t) { return integrand(r0 + t); }, 0.0,
                                   std::numeric_limits<double>::infinity());
  }
  res.bulk_term = unit_sphere_area(n) * radial_integral / ((n - 1) * n * unit_ball_volume(n));
  res.two_mass = res.boundary_term + res.bulk_term;
  res.mass = 0.5 * res.two_mass;
  return res;
}

struct PenroseRecord {
  double mass = 0.0;
  double two_mass = 0.0;
  /// (2 m)^{1/(n-2)}
  double mass_radius = 0.0;
  double capacity_radius = 0.0;
  double surface_radius = 0.0;
  double capacity_slack = 0.0;
  double surface_slack = 0.0;
  bool capacity_pass = false;
  bool surface_pass = false;
  double tolerance = 0.0;

  bool pass() const { return capacity_pass && surface_pass; }
};

/// capacity_radius(A, 2) <= (2m)^{1/(n-2)} and surface_radius(A) <= (2m)^{1/(n-2)}.
inline PenroseRecord penrose_check(const ParamBody3& A, double mass, double pcap2, double tolerance = 0.01) {
  constexpr int n = GraphFunction::n;
  PenroseRecord r;
  r.mass = mass;
  r.two_mass = 2.0 * mass;
  r.mass_radius = std::pow(r.two_mass, 1.0 / (n - 2));
  r.capacity_radius = capacity_radius_of(n, 2.0, pcap2);
  r.surface_radius = std::sqrt(A.surface_area() / unit_sphere_area(n));
  r.capacity_slack = (r.mass_radius - r.capacity_radius) / r.mass_radius;
  r.surface_slack = (r.mass_radius - r.surface_radius) / r.mass_radius;
  r.tolerance = tolerance;
  r.capacity_pass = r.capacity_radius <= r.mass_radius * (1.0 + tolerance);
  r.surface_pass = r.surface_radius <= r.mass_radius * (1.0 + tolerance);
  return r;
}

inline PenroseRecord penrose_check(const ParamBody3& A, const GraphFunction& f, double tolerance = 0.01) {
  const LamResult lam = lam_mass(f, A);
  return penrose_check(A, lam.mass, capacity(A, 2.0).value(), tolerance);
}

}  // namespace convcap
