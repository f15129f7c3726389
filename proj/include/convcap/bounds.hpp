#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "convcap/core.hpp"
#include "convcap/geometry.hpp"

namespace convcap {

/// Moments I_j = int_{dA} H^j for j = 0..n-1, H the normalized mean curvature.
inline std::vector<double> mean_curvature_moments(const SurfaceQuadrature& q) {
  const int n = q.dimension;
  std::vector<double> mom(n, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double H = q.mean_curvature(i);
    if (H < 0.0) throw PreconditionError("mean curvature must be nonnegative");
    double hj = 1.0;
    for (int j = 0; j < n; ++j) {
      mom[j] += q.weights[i] * hj;
      hj *= H;
    }
  }
  return mom;
}

/// (int_0^inf (int_{dA} (1 + tH)^{n-1})^{1/(1-p)} dt)^{1-p}.
inline double gehring_upper_bound(const SurfaceQuadrature& q, double p) {
  const int n = q.dimension;
  require_capacity_exponent(n, p);
  const auto mom = mean_curvature_moments(q);
  std::vector<double> c(n);
  for (int j = 0; j < n; ++j) c[j] = binomial(n - 1, j) * mom[j];
  if (!(c[n - 1] > 0.0)) throw PreconditionError("Gehring bound needs H > 0 somewhere on the boundary");
  const double e = 1.0 / (1.0 - p);
  auto integrand = [&](double t) {
    double s = 0.0;
    for (int j = n - 1; j >= 0; --j) s = s * t + c[j];
    return std::pow(s, e);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double val = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
  return std::pow(val, 1.0 - p);
}

inline double gehring_upper_bound(const Body& body, double p) {
  return gehring_upper_bound(curvature_quadrature(body), p);
}

enum class BarrierSide { LowerAlpha, UpperBeta };

/// phi(t) = (1 + kappa t)^{(p-n)/(p-1)}.
inline double barrier_phi(int n, double p, double kappa, double t) {
  require_capacity_exponent(n, p);
  if (!(kappa > 0.0)) throw InputError("barrier curvature bound must be positive");
  if (t < 0.0) throw DomainError("barrier is defined on the exterior only");
  return std::pow(1.0 + kappa * t, (p - n) / (p - 1.0));
}

/// v(x) = phi(d(x, A)); points inside A (up to roundoff) evaluate to 1.
inline double barrier_profile(const Body& body, double p, double kappa, BarrierSide /*side*/,
                              const Eigen::VectorXd& x) {
  const double d = signed_distance(body, x);
  if (d < -1e-9) throw DomainError("barrier profile evaluated inside the body");
  return barrier_phi(dimension(body), p, kappa, std::max(d, 0.0));
}

}  // namespace convcap
