#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace convcap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: non-unit directions, mismatched grids, bad JSON.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter outside its admissible range (e.g. p outside (1,n)).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The body does not fit the discretization.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Curvature-dependent operation requested on a non-smooth body.
class UnsupportedSmoothness : public Error {
 public:
  using Error::Error;
};

/// Gauss map is not a bijection (flat pieces or corners).
class DegenerateGaussMap : public Error {
 public:
  using Error::Error;
};

/// Evaluation point outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Optimizer iterate left the admissible region.
class UnboundedGrowth : public Error {
 public:
  using Error::Error;
};

/// Precondition of a lemma is violated by the input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Surface area of the unit sphere S^{n-1}.
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

/// Exponent k = (n-p)/(p-1) of the radial equilibrium potential (r/|x|)^k.
inline double radial_decay_exponent(int n, double p) { return (n - p) / (p - 1.0); }

inline void require_capacity_exponent(int n, double p) {
  if (!(p > 1.0 && p < n)) {
    throw ParameterError("p must lie in (1,n): got p=" + std::to_string(p) +
                         ", n=" + std::to_string(n));
  }
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace convcap
