#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "convcap/body3.hpp"
#include "convcap/core.hpp"
#include "convcap/support_body2.hpp"

namespace convcap {

/// Any convex body the toolkit understands.
using Body = std::variant<SupportBody2, ParamBody3, SupportBody3>;

inline int dimension(const Body& body) { return std::holds_alternative<SupportBody2>(body) ? 2 : 3; }

inline bool is_smooth(const Body& body) {
  return std::visit(
      [](const auto& b) -> bool {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          return b.is_smooth();
        } else if constexpr (std::is_same_v<T, ParamBody3>) {
          return b.is_smooth();
        } else {
          return false;
        }
      },
      body);
}

inline double support(const Body& body, const Eigen::VectorXd& dir) {
  if (dir.size() != dimension(body)) throw InputError("direction dimension does not match body");
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          return b.support(Vec2(dir[0], dir[1]));
        } else {
          return b.support(Vec3(dir[0], dir[1], dir[2]));
        }
      },
      body);
}

inline double mean_width(const Body& body) {
  return std::visit([](const auto& b) { return b.mean_width(); }, body);
}

inline double diameter(const Body& body) {
  return std::visit([](const auto& b) { return b.diameter(); }, body);
}

inline double volume(const Body& body) {
  return std::visit(
      [](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          return b.area();
        } else {
          return b.volume();
        }
      },
      body);
}

/// Perimeter in 2D, boundary area in 3D.
inline double surface_area(const Body& body) {
  return std::visit(
      [](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          return b.perimeter();
        } else if constexpr (std::is_same_v<T, ParamBody3>) {
          return b.surface_area();
        } else {
          throw UnsupportedSmoothness("surface area of a general support body is not implemented");
          return 0.0;
        }
      },
      body);
}

/// Boundary samples x(theta_k) with weights rho_k dtheta and curvature 1/rho_k.
inline SurfaceQuadrature curvature_quadrature(const SupportBody2& body) {
  body.require_smooth();
  SurfaceQuadrature q;
  q.dimension = 2;
  const double d = body.step();
  for (int k = 0; k < body.grid_size(); ++k) {
    const double rho = body.curvature_radius(k);
    const double t = body.angle(k);
    Eigen::VectorXd x(2), n(2);
    const Vec2 p = body.boundary_point_at(k);
    x << p.x(), p.y();
    n << std::cos(t), std::sin(t);
    q.points.push_back(x);
    q.normals.push_back(n);
    q.weights.push_back(rho * d);
    q.principal_curvatures.push_back({1.0 / rho});
  }
  return q;
}

inline SurfaceQuadrature curvature_quadrature(const ParamBody3& body) { return body.curvature_quadrature(); }

inline SurfaceQuadrature curvature_quadrature(const Body& body) {
  return std::visit(
      [](const auto& b) -> SurfaceQuadrature {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody3>) {
          throw UnsupportedSmoothness("curvature of a general support body is not implemented");
          return {};
        } else {
          return curvature_quadrature(b);
        }
      },
      body);
}

/// Normalized elementary symmetric function m_j of the principal curvatures.
inline double normalized_symmetric(const std::vector<double>& k, int j) {
  const int m = static_cast<int>(k.size());
  std::vector<double> e(m + 1, 0.0);
  e[0] = 1.0;
  for (double kappa : k) {
    for (int i = m; i >= 1; --i) e[i] += kappa * e[i - 1];
  }
  return e[j] / binomial(m, j);
}

/// M_j = int m_j dH^{n-1}; M_0 is the surface area for every body.
inline double integral_mean_curvature(const Body& body, int j) {
  const int n = dimension(body);
  if (j < 0 || j > n - 1) throw InputError("integral mean curvature index must lie in 0..n-1");
  if (j == 0) return surface_area(body);
  const SurfaceQuadrature q = curvature_quadrature(body);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * normalized_symmetric(q.principal_curvatures[i], j);
  return s;
}

/// Steiner polynomial S(A, t) = sum_j C(n-1, j) M_j t^j.
inline double steiner_area(const Body& body, double t) {
  if (t < 0.0) throw InputError("Steiner parameter must be nonnegative");
  const int n = dimension(body);
  double s = 0.0;
  for (int j = 0; j <= n - 1; ++j) s += binomial(n - 1, j) * integral_mean_curvature(body, j) * std::pow(t, j);
  return s;
}

inline double signed_distance(const Body& body, const Eigen::VectorXd& x) {
  if (x.size() != dimension(body)) throw InputError("point dimension does not match body");
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          return b.signed_distance(Vec2(x[0], x[1]));
        } else if constexpr (std::is_same_v<T, ParamBody3>) {
          return b.signed_distance(Vec3(x[0], x[1], x[2]));
        } else {
          throw InputError("signed distance of a general support body is not implemented");
          return 0.0;
        }
      },
      body);
}

/// Binned push-forward of X dH^{n-1} through the Gauss map.
struct DirectionMeasure {
  int dimension = 2;
  /// 2D: bins over the normal angle in [0, 2 pi).
  /// 3D: bins over (polar index, azimuth index), polar bins uniform in cos.
  int polar_bins = 0;
  int azimuth_bins = 0;
  std::vector<double> mass;

  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }

  /// Measure of each bin under the uniform measure of the sphere/circle.
  double bin_area() const {
    return dimension == 2 ? 2.0 * pi / azimuth_bins : 4.0 * pi / (polar_bins * azimuth_bins);
  }
};

inline DirectionMeasure gauss_pushforward(const SurfaceQuadrature& q, const std::vector<double>& density,
                                          int azimuth_bins, int polar_bins = 0) {
  if (density.size() != q.size()) throw InputError("density must have one value per quadrature point");
  if (q.principal_curvatures.size() != q.size()) {
    throw DegenerateGaussMap("Gauss map requires a smooth boundary sample");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (double k : q.principal_curvatures[i]) {
      if (!(k > 0.0)) throw DegenerateGaussMap("Gauss map is not injective: vanishing principal curvature");
    }
  }
  DirectionMeasure m;
  m.dimension = q.dimension;
  m.azimuth_bins = azimuth_bins;
  m.polar_bins = q.dimension == 2 ? 1 : polar_bins;
  if (azimuth_bins < 1 || (q.dimension == 3 && polar_bins < 1)) throw InputError("bin counts must be positive");
  m.mass.assign(static_cast<std::size_t>(m.polar_bins) * azimuth_bins, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (density[i] < 0.0) throw InputError("push-forward density must be nonnegative");
    const auto& nu = q.normals[i];
    double phi = std::atan2(nu[1], nu[0]);
    if (phi < 0) phi += 2.0 * pi;
    const int a = std::min(azimuth_bins - 1, static_cast<int>(phi / (2.0 * pi) * azimuth_bins));
    int b = 0;
    if (q.dimension == 3) {
      const double z = std::clamp(nu[2], -1.0, 1.0);
      b = std::min(polar_bins - 1, static_cast<int>((z + 1.0) * 0.5 * polar_bins));
    }
    m.mass[static_cast<std::size_t>(b) * azimuth_bins + a] += density[i] * q.weights[i];
  }
  return m;
}

}  // namespace convcap
