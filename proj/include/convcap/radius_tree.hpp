#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convcap/bounds.hpp"
#include "convcap/capacity.hpp"
#include "convcap/geometry.hpp"

namespace convcap {

/// A radius that may be absent, with the reason.
struct Radius {
  std::optional<double> value;
  std::string reason;

  bool present() const { return value.has_value(); }
  double operator*() const { return *value; }
  static Radius absent(std::string why) { return {std::nullopt, std::move(why)}; }
};

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  /// (rhs - lhs) / rhs
  double slack = 0.0;
  std::string p_range;
  bool applicable = false;
  bool pass = false;
  double tolerance = 0.0;
  std::string note;
};

struct SandwichRecord {
  double alpha = 0.0;
  double beta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double surface_value = 0.0;
  bool lower_pass = false;
  bool upper_pass = false;
  double tolerance = 0.0;
  /// p outside [2, n): the lemma is only claimed there, not proved.
  bool extrapolated = false;

  bool pass() const { return lower_pass && upper_pass; }
};

struct RadiusReport {
  int dimension = 0;
  double p = 0.0;
  Radius volume_radius, surface_radius, capacity_radius, semidiameter, mean_radius, imc_radius;
  double capacity = 0.0;
  double capacity_estimate = 0.0;
  std::vector<InequalityCheck> checks;
  std::optional<SandwichRecord> sandwich;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (c.applicable && !c.pass) return false;
    }
    return !sandwich || sandwich->pass();
  }
  const InequalityCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

inline double volume_radius(const Body& body) {
  const int n = dimension(body);
  return std::pow(volume(body) / unit_ball_volume(n), 1.0 / n);
}

inline double surface_radius(const Body& body) {
  const int n = dimension(body);
  return std::pow(surface_area(body) / unit_sphere_area(n), 1.0 / (n - 1));
}

inline double capacity_radius(const Body& body, double p, const CapacityOptions& opt) {
  return capacity_radius_of(dimension(body), p, capacity(body, p, opt).value());
}

inline double capacity_radius(const Body& body, double p) {
  return capacity_radius(body, p, CapacityOptions::defaults(dimension(body)));
}

inline double mean_radius(const Body& body) { return 0.5 * mean_width(body); }

inline double semidiameter(const Body& body) { return 0.5 * diameter(body); }

/// ((1/sigma) int H^{p-1})^{1/(n-p)}; absent unless p in [2,n) and the body is smooth.
inline Radius imc_radius(const Body& body, double p) {
  const int n = dimension(body);
  require_capacity_exponent(n, p);
  if (p < 2.0) return Radius::absent("p outside [2,n)");
  if (!is_smooth(body)) return Radius::absent("non-smooth boundary");
  const SurfaceQuadrature q = curvature_quadrature(body);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double H = q.mean_curvature(i);
    if (H < 0.0) return Radius::absent("negative mean curvature");
    s += q.weights[i] * std::pow(H, p - 1.0);
  }
  return {std::pow(s / unit_sphere_area(n), 1.0 / (n - p)), ""};
}

/// sigma <= int H^{n-1}; returns (lhs, rhs).
inline std::pair<double, double> willmore_terms(const Body& body) {
  const int n = dimension(body);
  const SurfaceQuadrature q = curvature_quadrature(body);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.mean_curvature(i), n - 1);
  return {unit_sphere_area(n), s};
}

struct TreeOptions {
  double tolerance = 0.02;
  std::map<std::string, double> overrides;
  CapacityOptions capacity;
  bool has_capacity_options = false;

  double tolerance_for(const std::string& name) const {
    auto it = overrides.find(name);
    return it == overrides.end() ? tolerance : it->second;
  }
};

namespace detail {

inline InequalityCheck make_check(std::string name, double lhs, double rhs, std::string range, double tol) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = (rhs - lhs) / rhs;
  c.p_range = std::move(range);
  c.applicable = true;
  c.tolerance = tol;
  c.pass = lhs <= rhs * (1.0 + tol);
  return c;
}

inline InequalityCheck inapplicable(std::string name, std::string range, std::string why) {
  InequalityCheck c;
  c.name = std::move(name);
  c.p_range = std::move(range);
  c.note = std::move(why);
  return c;
}

}  // namespace detail

/// All radii plus every applicable inequality of the tree, given a capacity value.
inline RadiusReport build_report(const Body& body, double p, double pcap, double estimate,
                                 const TreeOptions& opt = {}) {
  const int n = dimension(body);
  require_capacity_exponent(n, p);
  RadiusReport r;
  r.dimension = n;
  r.p = p;
  r.capacity = pcap;
  r.capacity_estimate = estimate;
  const bool smooth = is_smooth(body);
  r.volume_radius = {volume_radius(body), ""};
  r.surface_radius = {surface_radius(body), ""};
  r.capacity_radius = {capacity_radius_of(n, p, pcap), ""};
  r.semidiameter = {semidiameter(body), ""};
  r.mean_radius = {mean_radius(body), ""};
  r.imc_radius = imc_radius(body, p);

  const double vol = *r.volume_radius, sur = *r.surface_radius, cap = *r.capacity_radius;
  const double semi = *r.semidiameter, mean = *r.mean_radius;
  auto add = [&](const std::string& name, double lhs, double rhs, const std::string& range) {
    r.checks.push_back(detail::make_check(name, lhs, rhs, range, opt.tolerance_for(name)));
  };
  add("volume<=capacity", vol, cap, "(1,n)");
  add("volume<=surface", vol, sur, "all");
  add("capacity<=semidiameter", cap, semi, "(1,n)");
  add("surface<=semidiameter", sur, semi, "all");
  if (std::abs(p - (n - 1)) < 1e-12) {
    add("capacity<=mean", cap, mean, "p=n-1");
  } else {
    r.checks.push_back(detail::inapplicable("capacity<=mean", "p=n-1", "p != n-1"));
  }
  add("surface<=mean", sur, mean, "all");
  if (r.imc_radius.present()) {
    add("capacity<=imc", cap, *r.imc_radius, "[2,n)");
    add("surface<=imc", sur, *r.imc_radius, "[2,n)");
  } else {
    r.checks.push_back(detail::inapplicable("capacity<=imc", "[2,n)", r.imc_radius.reason));
    r.checks.push_back(detail::inapplicable("surface<=imc", "[2,n)", r.imc_radius.reason));
  }
  if (smooth) {
    add("capacity<=gehring", cap, capacity_radius_of(n, p, gehring_upper_bound(body, p)), "(1,n)");
    const auto [lhs, rhs] = willmore_terms(body);
    add("willmore", lhs, rhs, "all");
  } else {
    r.checks.push_back(detail::inapplicable("capacity<=gehring", "(1,n)", "non-smooth boundary"));
    r.checks.push_back(detail::inapplicable("willmore", "all", "non-smooth boundary"));
  }
  return r;
}

inline RadiusReport verify_tree(const Body& body, double p, const TreeOptions& opt = {}) {
  const int n = dimension(body);
  require_capacity_exponent(n, p);
  const CapacityOptions copt = opt.has_capacity_options ? opt.capacity : CapacityOptions::defaults(n);
  const CapacityResult cr = capacity(body, p, copt);
  return build_report(body, p, cr.value(), cr.estimate, opt);
}

/// Curvature range of a smooth body: (min principal curvature, max mean curvature).
inline std::pair<double, double> curvature_bounds(const Body& body) {
  const SurfaceQuadrature q = curvature_quadrature(body);
  double kmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (double k : q.principal_curvatures[i]) kmin = std::min(kmin, k);
    hmax = std::max(hmax, q.mean_curvature(i));
  }
  return {kmin, hmax};
}

/// Lower bound with beta (H <= beta), upper bound with alpha (kappa_i >= alpha).
inline SandwichRecord sandwich_check(const Body& body, double p, double alpha, double beta, double pcap,
                                     double tolerance = 0.02) {
  const int n = dimension(body);
  require_capacity_exponent(n, p);
  if (!(alpha > 0.0) || !(beta >= alpha)) throw InputError("need 0 < alpha <= beta");
  const SurfaceQuadrature q = curvature_quadrature(body);
  const double slack = 1e-9 * beta;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (double k : q.principal_curvatures[i]) {
      if (k < alpha - slack) {
        throw PreconditionError("principal curvature " + std::to_string(k) + " below alpha at quadrature point " +
                                std::to_string(i));
      }
    }
    const double H = q.mean_curvature(i);
    if (H > beta + slack || H < 0.0) {
      throw PreconditionError("mean curvature " + std::to_string(H) + " outside [0, beta] at quadrature point " +
                              std::to_string(i));
    }
  }
  const double sigma = unit_sphere_area(n);
  SandwichRecord s;
  s.alpha = alpha;
  s.beta = beta;
  s.tolerance = tolerance;
  s.lower = std::pow((p - 1.0) / ((n - p) * beta), p - 1.0) * pcap / sigma;
  s.upper = std::pow((p - 1.0) / ((n - p) * alpha), p - 1.0) * pcap / sigma;
  s.surface_value = surface_area(body) / sigma;
  s.lower_pass = s.lower <= s.surface_value * (1.0 + tolerance);
  s.upper_pass = s.surface_value <= s.upper * (1.0 + tolerance);
  s.extrapolated = p < 2.0;
  return s;
}

inline SandwichRecord sandwich_check(const Body& body, double p, double alpha, double beta) {
  return sandwich_check(body, p, alpha, beta, capacity(body, p).value());
}

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// h = r0 + sum_{m<=6} a_m cos(m t) + b_m sin(m t), resampled until h + h'' >= 0.05 r0.
inline SupportBody2 random_support_body(std::uint64_t seed, double r0 = 1.0, int grid = SupportBody2::kDefaultGridSize) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<double> a(6), b(6);
    for (int m = 1; m <= 6; ++m) {
      const double amp = 0.6 * r0 / (m * m);
      a[m - 1] = amp * (2.0 * unit_uniform(rng) - 1.0);
      b[m - 1] = amp * (2.0 * unit_uniform(rng) - 1.0);
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2048; ++k) {
      const double t = 2.0 * pi * k / 2048;
      double rho = r0;
      for (int m = 1; m <= 6; ++m) rho += (1.0 - m * m) * (a[m - 1] * std::cos(m * t) + b[m - 1] * std::sin(m * t));
      worst = std::min(worst, rho);
    }
    if (worst >= 0.05 * r0) return SupportBody2::fourier(r0, a, b, grid);
  }
  throw Error("random body generator exhausted its attempts");
}

}  // namespace convcap
