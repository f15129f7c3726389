#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "convcap/body3.hpp"
#include "convcap/core.hpp"
#include "convcap/support_body2.hpp"

namespace convcap {

/// Discretization options for the truncated exterior domain.
struct MeshOptions {
  /// 2D: cells around the boundary; 3D: cells along each cube-sphere face edge.
  int angular_cells = 0;
  /// Cells between the boundary and the outer sphere.
  int radial_cells = 0;
  /// R_out = outer_radius_factor * max boundary radius.
  double outer_radius_factor = 200.0;
  /// Radial coordinate r = rho (R/rho)^{s^grading}; grading > 1 refines near the body.
  double grading = 1.3;

  static MeshOptions defaults(int dim) {
    MeshOptions o;
    if (dim == 2) {
      o.angular_cells = 192;
      o.radial_cells = 64;
    } else {
      o.angular_cells = 12;
      o.radial_cells = 36;
    }
    return o;
  }

  MeshOptions refined(double factor) const {
    MeshOptions o = *this;
    o.angular_cells = static_cast<int>(std::lround(angular_cells * factor));
    o.radial_cells = static_cast<int>(std::lround(radial_cells * factor));
    return o;
  }
};

/// Ray description of a star-shaped body: boundary radius and outward normal
/// along each unit direction from an interior center.
template <int Dim>
struct RayBody {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  Vec center;
  std::function<std::pair<double, Vec>(const Vec&)> ray;
};

inline RayBody<2> ray_body(const SupportBody2& body) {
  RayBody<2> rb;
  rb.center = body.centroid();
  rb.ray = [body, c = rb.center](const Vec2& w) {
    const double phi = std::atan2(w.y(), w.x());
    const double t = body.normal_angle_of_ray(c, phi);
    const double r = (body.boundary_point(t) - c).dot(w);
    return std::pair<double, Vec2>{r, SupportBody2::direction(t)};
  };
  return rb;
}

inline RayBody<3> ray_body(const ParamBody3& body) {
  RayBody<3> rb;
  rb.center = body.center;
  rb.ray = [body](const Vec3& w) { return std::pair<double, Vec3>{body.radial(w), body.normal_along(w)}; };
  return rb;
}

inline RayBody<3> ray_body(const SupportBody3& body) {
  RayBody<3> rb;
  rb.center = body.center();
  rb.ray = [body](const Vec3& w) { return body.radial_and_normal(w); };
  return rb;
}

/// Boundary-fitted mesh of {rho(w) <= |x - c| <= R_out}: a tensor product
/// of an angular surface grid and log-graded radial layers, with Q1 cells.
/// Node (k, s) has index k * surface_size + s; layer 0 lies on the body.
template <int Dim>
class ExteriorMesh {
 public:
  using Vec = Eigen::Matrix<double, Dim, 1>;
  static constexpr int kCorners = 1 << Dim;
  using Cell = std::array<int, kCorners>;
  using Facet = std::array<int, kCorners / 2>;

  ExteriorMesh(const RayBody<Dim>& body, const MeshOptions& opt) : options_(opt) {
    if (opt.angular_cells < (Dim == 2 ? 8 : 2) || opt.radial_cells < 2) {
      throw InputError("mesh resolution too small");
    }
    if (!(opt.outer_radius_factor > 2.0)) throw InputError("outer_radius_factor must exceed 2");
    center_ = body.center;
    build_surface(opt.angular_cells);
    const int S = surface_size();
    rho_.resize(S);
    normals_.resize(S);
    for (int s = 0; s < S; ++s) {
      const auto [r, n] = body.ray(dirs_[s]);
      if (!(r > 0.0) || !std::isfinite(r)) throw GeometryError("body does not contain the mesh center");
      rho_[s] = r;
      normals_[s] = n;
    }
    double rmax = 0.0;
    for (double r : rho_) rmax = std::max(rmax, r);
    outer_radius_ = opt.outer_radius_factor * rmax;
    const int K = opt.radial_cells;
    nodes_.resize(static_cast<std::size_t>(K + 1) * S);
    for (int k = 0; k <= K; ++k) {
      const double sk = std::pow(static_cast<double>(k) / K, opt.grading);
      for (int s = 0; s < S; ++s) {
        const double r = rho_[s] * std::pow(outer_radius_ / rho_[s], sk);
        nodes_[static_cast<std::size_t>(k) * S + s] = center_ + r * dirs_[s];
      }
    }
    for (int k = 0; k < K; ++k) {
      for (const Facet& f : facets_) {
        Cell c;
        for (int a = 0; a < kCorners / 2; ++a) {
          c[2 * a] = k * S + f[a];
          c[2 * a + 1] = (k + 1) * S + f[a];
        }
        cells_.push_back(c);
      }
    }
    compute_facet_areas();
  }

  int dimension() const { return Dim; }
  int surface_size() const { return static_cast<int>(dirs_.size()); }
  int radial_cells() const { return options_.radial_cells; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec>& nodes() const { return nodes_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Vec& center() const { return center_; }
  double outer_radius() const { return outer_radius_; }
  const MeshOptions& options() const { return options_; }

  const std::vector<Vec>& directions() const { return dirs_; }
  const std::vector<double>& boundary_radii() const { return rho_; }
  const std::vector<Vec>& boundary_normals() const { return normals_; }
  /// Area share of each surface node on the body boundary / outer sphere.
  const std::vector<double>& boundary_weights() const { return inner_w_; }
  const std::vector<double>& outer_weights() const { return outer_w_; }
  const std::vector<Facet>& surface_facets() const { return facets_; }

  int node(int k, int s) const { return k * surface_size() + s; }
  bool on_body(int i) const { return i < surface_size(); }
  bool on_outer(int i) const { return i >= options_.radial_cells * surface_size(); }

  /// Smallest cell edge on the body, a resolution indicator.
  double min_boundary_spacing() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Facet& f : facets_) {
      for (int a = 0; a < kCorners / 2; ++a)
        for (int b = a + 1; b < kCorners / 2; ++b) m = std::min(m, (nodes_[f[a]] - nodes_[f[b]]).norm());
    }
    return m;
  }

  /// Locate direction w on the angular grid: facet index and bilinear (or
  /// linear) weights of its corners.
  std::pair<int, std::array<double, kCorners / 2>> locate_direction(const Vec& w) const {
    if constexpr (Dim == 2) {
      const int n = surface_size();
      double phi = std::atan2(w.y(), w.x());
      if (phi < 0) phi += 2.0 * pi;
      const double x = phi / (2.0 * pi) * n;
      int j = static_cast<int>(std::floor(x));
      const double t = x - j;
      j %= n;
      return {j, {1.0 - t, t}};
    } else {
      const int m = options_.angular_cells;
      int axis = 0;
      w.cwiseAbs().maxCoeff(&axis);
      const int sign = w[axis] >= 0 ? 1 : -1;
      const int face = 2 * axis + (sign > 0 ? 0 : 1);
      const int ia = (axis + 1) % 3, ib = (axis + 2) % 3;
      const double ta = w[ia] / std::abs(w[axis]);
      const double tb = w[ib] / std::abs(w[axis]);
      const double xa = (std::atan(ta) + 0.25 * pi) / (0.5 * pi) * m;
      const double xb = (std::atan(tb) + 0.25 * pi) / (0.5 * pi) * m;
      int i = std::clamp(static_cast<int>(std::floor(xa)), 0, m - 1);
      int j = std::clamp(static_cast<int>(std::floor(xb)), 0, m - 1);
      const double s = xa - i, t = xb - j;
      const int facet = (face * m + i) * m + j;
      return {facet, {(1 - s) * (1 - t), (1 - s) * t, s * (1 - t), s * t}};
    }
  }

 private:
  void build_surface(int m) {
    if constexpr (Dim == 2) {
      for (int j = 0; j < m; ++j) {
        const double phi = 2.0 * pi * j / m;
        dirs_.push_back(Vec(std::cos(phi), std::sin(phi)));
        facets_.push_back({j, (j + 1) % m});
      }
    } else {
      // Equiangular cube-sphere; nodes on shared face edges are merged through
      // their integer cube coordinates.
      std::map<std::tuple<int, int, int>, int> index;
      auto key_of = [m](int axis, int sign, int i, int j) {
        std::array<int, 3> k{};
        k[axis] = sign * m;
        k[(axis + 1) % 3] = 2 * i - m;
        k[(axis + 2) % 3] = 2 * j - m;
        return std::tuple<int, int, int>{k[0], k[1], k[2]};
      };
      auto dir_of = [m](int axis, int sign, int i, int j) {
        Vec3 v;
        v[axis] = sign;
        v[(axis + 1) % 3] = std::tan(-0.25 * pi + 0.5 * pi * i / m);
        v[(axis + 2) % 3] = std::tan(-0.25 * pi + 0.5 * pi * j / m);
        // exact +-1 on the cube edges so shared nodes coincide bitwise
        if (i == 0) v[(axis + 1) % 3] = -1.0;
        if (i == m) v[(axis + 1) % 3] = 1.0;
        if (j == 0) v[(axis + 2) % 3] = -1.0;
        if (j == m) v[(axis + 2) % 3] = 1.0;
        return Vec(v.normalized());
      };
      std::vector<int> local(static_cast<std::size_t>(m + 1) * (m + 1));
      for (int face = 0; face < 6; ++face) {
        const int axis = face / 2;
        const int sign = face % 2 == 0 ? 1 : -1;
        for (int i = 0; i <= m; ++i) {
          for (int j = 0; j <= m; ++j) {
            const auto key = key_of(axis, sign, i, j);
            auto it = index.find(key);
            int id;
            if (it == index.end()) {
              id = static_cast<int>(dirs_.size());
              index.emplace(key, id);
              dirs_.push_back(dir_of(axis, sign, i, j));
            } else {
              id = it->second;
            }
            local[i * (m + 1) + j] = id;
          }
        }
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            facets_.push_back({local[i * (m + 1) + j], local[i * (m + 1) + j + 1],
                               local[(i + 1) * (m + 1) + j], local[(i + 1) * (m + 1) + j + 1]});
          }
        }
      }
    }
  }

  void compute_facet_areas() {
    const int S = surface_size();
    inner_w_.assign(S, 0.0);
    outer_w_.assign(S, 0.0);
    const int K = options_.radial_cells;
    auto accumulate = [&](int layer, std::vector<double>& w) {
      for (const Facet& f : facets_) {
        if constexpr (Dim == 2) {
          const double len = (nodes_[node(layer, f[0])] - nodes_[node(layer, f[1])]).norm();
          w[f[0]] += 0.5 * len;
          w[f[1]] += 0.5 * len;
        } else {
          // bilinear patch area by 2x2 Gauss, distributed with the shape functions
          const double g = 0.5 / std::sqrt(3.0);
          for (double s : {0.5 - g, 0.5 + g}) {
            for (double t : {0.5 - g, 0.5 + g}) {
              const Vec p00 = nodes_[node(layer, f[0])], p01 = nodes_[node(layer, f[1])];
              const Vec p10 = nodes_[node(layer, f[2])], p11 = nodes_[node(layer, f[3])];
              const Vec ds = (1 - t) * (p10 - p00) + t * (p11 - p01);
              const Vec dt = (1 - s) * (p01 - p00) + s * (p11 - p10);
              const double da = Vec3(ds).cross(Vec3(dt)).norm() * 0.25;
              w[f[0]] += da * (1 - s) * (1 - t);
              w[f[1]] += da * (1 - s) * t;
              w[f[2]] += da * s * (1 - t);
              w[f[3]] += da * s * t;
            }
          }
        }
      }
    };
    accumulate(0, inner_w_);
    accumulate(K, outer_w_);
  }

  MeshOptions options_;
  Vec center_;
  double outer_radius_ = 0.0;
  std::vector<Vec> dirs_;
  std::vector<Facet> facets_;
  std::vector<double> rho_;
  std::vector<Vec> normals_;
  std::vector<Vec> nodes_;
  std::vector<Cell> cells_;
  std::vector<double> inner_w_;
  std::vector<double> outer_w_;
};

}  // namespace convcap
