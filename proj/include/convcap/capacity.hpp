#pragma once

#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include "convcap/core.hpp"
#include "convcap/exterior_mesh.hpp"
#include "convcap/geometry.hpp"
#include "convcap/p_energy.hpp"

namespace convcap {

/// pcap of the ball of radius r: sigma_{n-1} ((p-1)/(n-p))^{1-p} r^{n-p}.
inline double ball_capacity(int n, double p, double r) {
  require_capacity_exponent(n, p);
  if (r < 0.0) throw InputError("ball radius must be nonnegative");
  return unit_sphere_area(n) * std::pow((p - 1.0) / (n - p), 1.0 - p) * std::pow(r, n - p);
}

/// Radius of the ball with the given p-capacity.
inline double capacity_radius_of(int n, double p, double pcap) {
  require_capacity_exponent(n, p);
  return std::pow(std::pow((p - 1.0) / (n - p), p - 1.0) * pcap / unit_sphere_area(n), 1.0 / (n - p));
}

struct CapacityOptions {
  MeshOptions mesh;
  SolverOptions solver;
  /// Second mesh for Richardson extrapolation is `mesh.refined(refine_factor)`.
  double refine_factor = 2.0;
  bool extrapolate = true;

  static CapacityOptions defaults(int dim) {
    CapacityOptions o;
    o.mesh = MeshOptions::defaults(dim);
    o.refine_factor = dim == 2 ? 2.0 : 1.5;
    if (dim == 3) o.solver.direct_limit = 0;
    return o;
  }

  /// Coarser settings for repeated solves inside optimization loops.
  static CapacityOptions fast(int dim) {
    CapacityOptions o = defaults(dim);
    if (dim == 2) {
      o.mesh.angular_cells = 96;
      o.mesh.radial_cells = 40;
    } else {
      o.mesh.angular_cells = 6;
      o.mesh.radial_cells = 20;
    }
    return o;
  }
};

/// Discrete equilibrium potential: node values on an exterior mesh.
template <int Dim>
struct PotentialField {
  std::shared_ptr<const ExteriorMesh<Dim>> mesh;
  Eigen::VectorXd values;
  double p = 2.0;
  /// Energy of the discrete minimizer (regularized, with far field).
  double energy = 0.0;
  /// Final Newton decrement relative to the energy.
  double residual = 0.0;
  int newton_iterations = 0;

  double min_value() const { return values.minCoeff(); }
  double max_value() const { return values.maxCoeff(); }
};

template <int Dim>
PotentialField<Dim> solve_equilibrium(const RayBody<Dim>& body, double p, const MeshOptions& mesh_opt,
                                      const SolverOptions& solver_opt) {
  require_capacity_exponent(Dim, p);
  auto mesh = std::make_shared<const ExteriorMesh<Dim>>(body, mesh_opt);
  PEnergy<Dim> energy(*mesh, p, solver_opt.epsilon);
  SolveStats stats;
  PotentialField<Dim> field;
  field.values = minimize_p_energy(energy, solver_opt, &stats);
  field.mesh = mesh;
  field.p = p;
  field.energy = stats.energy;
  field.residual = stats.decrement;
  field.newton_iterations = stats.newton_iterations;
  return field;
}

inline PotentialField<2> solve_equilibrium(const SupportBody2& body, double p,
                                           const CapacityOptions& opt = CapacityOptions::defaults(2)) {
  body.require_convex();
  return solve_equilibrium<2>(ray_body(body), p, opt.mesh, opt.solver);
}

inline PotentialField<3> solve_equilibrium(const ParamBody3& body, double p,
                                           const CapacityOptions& opt = CapacityOptions::defaults(3)) {
  return solve_equilibrium<3>(ray_body(body), p, opt.mesh, opt.solver);
}

inline PotentialField<3> solve_equilibrium(const SupportBody3& body, double p,
                                           const CapacityOptions& opt = CapacityOptions::defaults(3)) {
  return solve_equilibrium<3>(ray_body(body), p, opt.mesh, opt.solver);
}

/// |grad u| at every body node from a one-sided second-order difference along
/// the mesh ray, divided by the ray/normal cosine (u is constant on the body,
/// so grad u is normal there).
template <int Dim>
std::vector<double> boundary_gradient(const PotentialField<Dim>& field) {
  const auto& mesh = *field.mesh;
  const int S = mesh.surface_size();
  std::vector<double> g(S);
  for (int s = 0; s < S; ++s) {
    const auto& w = mesh.directions()[s];
    const double r0 = mesh.boundary_radii()[s];
    const double r1 = (mesh.nodes()[mesh.node(1, s)] - mesh.center()).norm();
    const double r2 = (mesh.nodes()[mesh.node(2, s)] - mesh.center()).norm();
    const double u0 = field.values[mesh.node(0, s)];
    const double u1 = field.values[mesh.node(1, s)];
    const double u2 = field.values[mesh.node(2, s)];
    const double h1 = r1 - r0, h2 = r2 - r0;
    // derivative at r0 of the parabola through (r0,u0), (r1,u1), (r2,u2)
    const double du = -(h1 + h2) / (h1 * h2) * u0 + h2 / (h1 * (h2 - h1)) * u1 - h1 / (h2 * (h2 - h1)) * u2;
    const double cosang = w.dot(mesh.boundary_normals()[s]);
    g[s] = std::abs(du) / std::max(cosang, 1e-12);
  }
  return g;
}

/// |grad u| interpolated from the body nodes to arbitrary boundary points
/// (located by their direction from the mesh center).
template <int Dim>
std::vector<double> boundary_gradient(const PotentialField<Dim>& field, const SurfaceQuadrature& q) {
  const auto nodal = boundary_gradient(field);
  const auto& mesh = *field.mesh;
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    Eigen::Matrix<double, Dim, 1> x;
    for (int d = 0; d < Dim; ++d) x[d] = q.points[i][d];
    const Eigen::Matrix<double, Dim, 1> w = (x - mesh.center()).normalized();
    const auto [facet, wts] = mesh.locate_direction(w);
    const auto& f = mesh.surface_facets()[facet];
    double v = 0.0;
    for (std::size_t a = 0; a < wts.size(); ++a) v += wts[a] * nodal[f[a]];
    out[i] = v;
  }
  return out;
}

/// Flux route: sum over body nodes of area weight * |grad u|^{p-1}.
template <int Dim>
double flux_capacity(const PotentialField<Dim>& field) {
  const auto g = boundary_gradient(field);
  const auto& w = field.mesh->boundary_weights();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * std::pow(g[i], field.p - 1.0);
  return s;
}

struct CapacityResult {
  /// p-energy of the discrete minimizer on the finer mesh.
  double energy_route = 0.0;
  /// Boundary flux integral of |grad u|^{p-1} on the finer mesh.
  double flux_route = 0.0;
  /// Richardson extrapolation of the energy over the two meshes.
  double extrapolated = 0.0;
  /// Relative discretization estimate |extrapolated - energy_route| / extrapolated,
  /// floored by the solver tolerance.
  double estimate = 0.0;
  double coarse_energy = 0.0;
  double coarse_flux = 0.0;
  /// Richardson extrapolation of the flux route.
  double flux_extrapolated = 0.0;
  int coarse_nodes = 0;
  int fine_nodes = 0;

  /// Best available capacity value.
  double value() const { return extrapolated; }
};

template <int Dim>
CapacityResult capacity(const RayBody<Dim>& body, double p, const CapacityOptions& opt) {
  require_capacity_exponent(Dim, p);
  CapacityResult res;
  const auto coarse = solve_equilibrium<Dim>(body, p, opt.mesh, opt.solver);
  res.coarse_energy = coarse.energy;
  res.coarse_flux = flux_capacity(coarse);
  res.coarse_nodes = coarse.mesh->node_count();
  if (!opt.extrapolate) {
    res.energy_route = res.extrapolated = res.coarse_energy;
    res.flux_route = res.flux_extrapolated = res.coarse_flux;
    res.fine_nodes = res.coarse_nodes;
    res.estimate = std::max(std::abs(res.flux_route - res.energy_route) / res.energy_route, opt.solver.tolerance);
    return res;
  }
  const MeshOptions fine_opt = opt.mesh.refined(opt.refine_factor);
  const auto fine = solve_equilibrium<Dim>(body, p, fine_opt, opt.solver);
  res.energy_route = fine.energy;
  res.flux_route = flux_capacity(fine);
  res.fine_nodes = fine.mesh->node_count();
  // effective ratio of mesh widths, error ~ h^2
  const double r = static_cast<double>(fine_opt.angular_cells) / opt.mesh.angular_cells;
  const double denom = r * r - 1.0;
  res.extrapolated = res.energy_route + (res.energy_route - res.coarse_energy) / denom;
  res.flux_extrapolated = res.flux_route + (res.flux_route - res.coarse_flux) / denom;
  res.estimate = std::max(std::abs(res.extrapolated - res.energy_route) / res.extrapolated, opt.solver.tolerance);
  return res;
}

inline CapacityResult capacity(const SupportBody2& body, double p,
                               const CapacityOptions& opt = CapacityOptions::defaults(2)) {
  body.require_convex();
  return capacity<2>(ray_body(body), p, opt);
}

inline CapacityResult capacity(const ParamBody3& body, double p,
                               const CapacityOptions& opt = CapacityOptions::defaults(3)) {
  return capacity<3>(ray_body(body), p, opt);
}

inline CapacityResult capacity(const SupportBody3& body, double p,
                               const CapacityOptions& opt = CapacityOptions::defaults(3)) {
  return capacity<3>(ray_body(body), p, opt);
}

inline CapacityResult capacity(const Body& body, double p) {
  return std::visit([p](const auto& b) { return capacity(b, p); }, body);
}

inline CapacityResult capacity(const Body& body, double p, const CapacityOptions& opt) {
  return std::visit([&](const auto& b) { return capacity(b, p, opt); }, body);
}

}  // namespace convcap
