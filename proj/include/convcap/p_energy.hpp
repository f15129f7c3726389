#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "convcap/core.hpp"
#include "convcap/exterior_mesh.hpp"

namespace convcap {

struct SolverOptions {
  /// Stop when the Newton decrement falls below tolerance * energy.
  double tolerance = 1e-10;
  /// |grad u|^p is regularized to (|grad u|^2 + eps^2)^{p/2}, eps = epsilon / R_out.
  double epsilon = 1e-8;
  int max_newton = 60;
  /// Direct factorization below this many unknowns, preconditioned CG above.
  int direct_limit = 60000;
};

/// Discrete p-Dirichlet energy on an exterior mesh: Q1 cells with tensor
/// Gauss quadrature plus the exact exterior energy of the radial continuation
/// C |x|^{-k} beyond the outer sphere, lumped per outer node.
template <int Dim>
class PEnergy {
 public:
  using Mesh = ExteriorMesh<Dim>;
  using Vec = Eigen::Matrix<double, Dim, 1>;
  static constexpr int kCorners = Mesh::kCorners;
  static constexpr int kQuad = kCorners;  // 2^Dim Gauss points

  PEnergy(const Mesh& mesh, double p, double epsilon) : mesh_(mesh), p_(p) {
    require_capacity_exponent(Dim, p);
    eps2_ = std::pow(epsilon / mesh.outer_radius(), 2);
    const double k = radial_decay_exponent(Dim, p);
    const double R = mesh.outer_radius();
    far_.assign(mesh.surface_size(), 0.0);
    for (int s = 0; s < mesh.surface_size(); ++s) far_[s] = mesh.outer_weights()[s] * std::pow(k, p - 1.0) * std::pow(R, 1.0 - p);
    const double g = 0.5 / std::sqrt(3.0);
    for (int q = 0; q < kQuad; ++q) {
      for (int d = 0; d < Dim; ++d) qp_[q][d] = (q >> d) & 1 ? 0.5 + g : 0.5 - g;
    }
    qw_ = 1.0 / kQuad;
  }

  double p() const { return p_; }
  const Mesh& mesh() const { return mesh_; }

  /// Physical shape-function gradients and weight at quadrature point q.
  void cell_geometry(int c, int q, Eigen::Matrix<double, Dim, kCorners>& grad, double& w) const {
    const auto& cell = mesh_.cells()[c];
    Eigen::Matrix<double, Dim, kCorners> dref;
    for (int a = 0; a < kCorners; ++a) {
      for (int d = 0; d < Dim; ++d) {
        double v = 1.0;
        for (int e = 0; e < Dim; ++e) {
          const int bit = (a >> e) & 1;
          const double x = qp_[q][e];
          if (e == d) {
            v *= bit ? 1.0 : -1.0;
          } else {
            v *= bit ? x : 1.0 - x;
          }
        }
        dref(d, a) = v;
      }
    }
    Eigen::Matrix<double, Dim, Dim> J = Eigen::Matrix<double, Dim, Dim>::Zero();
    for (int a = 0; a < kCorners; ++a) J += mesh_.nodes()[cell[a]] * dref.col(a).transpose();
    const double det = J.determinant();
    grad = J.transpose().inverse() * dref;
    w = std::abs(det) * qw_;
  }

  Vec cell_gradient(int c, int q, const Eigen::VectorXd& u, double* weight = nullptr) const {
    Eigen::Matrix<double, Dim, kCorners> G;
    double w;
    cell_geometry(c, q, G, w);
    Vec g = Vec::Zero();
    for (int a = 0; a < kCorners; ++a) g += u[mesh_.cells()[c][a]] * G.col(a);
    if (weight) *weight = w;
    return g;
  }

  /// Regularized energy; `interior_only` drops the far-field term.
  double energy(const Eigen::VectorXd& u, bool interior_only = false) const {
    double e = 0.0;
    for (int c = 0; c < static_cast<int>(mesh_.cells().size()); ++c) {
      for (int q = 0; q < kQuad; ++q) {
        double w;
        const Vec g = cell_gradient(c, q, u, &w);
        e += w * std::pow(g.squaredNorm() + eps2_, 0.5 * p_);
      }
    }
    if (!interior_only) e += far_field_energy(u);
    return e;
  }

  double far_field_energy(const Eigen::VectorXd& u) const {
    double e = 0.0;
    const int S = mesh_.surface_size();
    const int K = mesh_.radial_cells();
    for (int s = 0; s < S; ++s) e += far_[s] * std::pow(std::abs(u[K * S + s]), p_);
    return e;
  }

  /// Gradient (length node_count) and, optionally, the Hessian as triplets.
  void assemble(const Eigen::VectorXd& u, Eigen::VectorXd& grad,
                std::vector<Eigen::Triplet<double>>* hess) const {
    const int n = mesh_.node_count();
    grad.setZero(n);
    if (hess) {
      hess->clear();
      hess->reserve(mesh_.cells().size() * kCorners * kCorners + mesh_.surface_size());
    }
    Eigen::Matrix<double, Dim, kCorners> G;
    for (int c = 0; c < static_cast<int>(mesh_.cells().size()); ++c) {
      const auto& cell = mesh_.cells()[c];
      Eigen::Matrix<double, kCorners, kCorners> Hc = Eigen::Matrix<double, kCorners, kCorners>::Zero();
      Eigen::Matrix<double, kCorners, 1> gc = Eigen::Matrix<double, kCorners, 1>::Zero();
      for (int q = 0; q < kQuad; ++q) {
        double w;
        cell_geometry(c, q, G, w);
        Vec g = Vec::Zero();
        for (int a = 0; a < kCorners; ++a) g += u[cell[a]] * G.col(a);
        const double s = g.squaredNorm() + eps2_;
        const double d1 = p_ * std::pow(s, 0.5 * p_ - 1.0);
        const Eigen::Matrix<double, kCorners, 1> Gg = G.transpose() * g;
        gc += w * d1 * Gg;
        if (hess) {
          const double d2 = p_ * (p_ - 2.0) * std::pow(s, 0.5 * p_ - 2.0);
          Hc.noalias() += w * d1 * (G.transpose() * G);
          Hc.noalias() += w * d2 * (Gg * Gg.transpose());
        }
      }
      for (int a = 0; a < kCorners; ++a) {
        grad[cell[a]] += gc[a];
        if (hess) {
          for (int b = 0; b < kCorners; ++b) hess->emplace_back(cell[a], cell[b], Hc(a, b));
        }
      }
    }
    const int S = mesh_.surface_size();
    const int K = mesh_.radial_cells();
    for (int s = 0; s < S; ++s) {
      const int i = K * S + s;
      const double v = std::abs(u[i]);
      grad[i] += far_[s] * p_ * std::pow(v, p_ - 1.0) * (u[i] >= 0 ? 1.0 : -1.0);
      if (hess) hess->emplace_back(i, i, far_[s] * p_ * (p_ - 1.0) * std::pow(std::max(v, 1e-300), p_ - 2.0));
    }
  }

 private:
  const Mesh& mesh_;
  double p_;
  double eps2_;
  std::vector<double> far_;
  std::array<std::array<double, Dim>, kQuad> qp_{};
  double qw_;
};

struct SolveStats {
  int newton_iterations = 0;
  double decrement = 0.0;   // final Newton decrement relative to energy
  double energy = 0.0;
};

/// Newton minimization of the discrete energy with u = 1 on the body layer.
template <int Dim>
Eigen::VectorXd minimize_p_energy(const PEnergy<Dim>& energy, const SolverOptions& opt,
                                  SolveStats* stats = nullptr) {
  const auto& mesh = energy.mesh();
  const int n = mesh.node_count();
  const int S = mesh.surface_size();
  const double p = energy.p();
  const double k = radial_decay_exponent(Dim, p);
  Eigen::VectorXd u(n);
  // radial ball profile along each ray as the starting guess
  for (int i = 0; i < n; ++i) {
    const int s = i % S;
    const double r = (mesh.nodes()[i] - mesh.center()).norm();
    u[i] = i < S ? 1.0 : std::pow(mesh.boundary_radii()[s] / r, k);
  }
  const int nfree = n - S;
  auto to_free = [S](int i) { return i - S; };

  Eigen::VectorXd grad;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseMatrix<double> H(nfree, nfree);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> direct;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  const bool use_direct = nfree <= opt.direct_limit;
  bool analyzed = false;

  double e = energy.energy(u);
  double dec = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opt.max_newton; ++it) {
    energy.assemble(u, grad, &trip);
    std::vector<Eigen::Triplet<double>> ft;
    ft.reserve(trip.size());
    for (const auto& t : trip) {
      if (t.row() >= S && t.col() >= S) ft.emplace_back(to_free(t.row()), to_free(t.col()), t.value());
    }
    H.setFromTriplets(ft.begin(), ft.end());
    const Eigen::VectorXd g = grad.tail(nfree);
    Eigen::VectorXd d;
    if (use_direct) {
      if (!analyzed) {
        direct.analyzePattern(H);
        analyzed = true;
      }
      direct.factorize(H);
      if (direct.info() != Eigen::Success) throw SolverError("Hessian factorization failed", g.norm());
      d = -direct.solve(g);
    } else {
      cg.setTolerance(1e-10);
      cg.setMaxIterations(20000);
      cg.compute(H);
      d = -cg.solve(g);
      if (cg.info() != Eigen::Success && cg.error() > 1e-6) {
        throw SolverError("preconditioned CG did not converge", cg.error());
      }
    }
    dec = -g.dot(d);
    if (dec < 0) {
      // not a descent direction (numerical breakdown): fall back to gradient
      d = -g;
      dec = g.squaredNorm();
    }
    if (dec < opt.tolerance * e) break;
    double step = 1.0;
    Eigen::VectorXd trial = u;
    double et = e;
    for (int ls = 0; ls < 60; ++ls) {
      trial.tail(nfree) = u.tail(nfree) + step * d;
      et = energy.energy(trial);
      if (et <= e - 1e-4 * step * dec) break;
      step *= 0.5;
    }
    if (!(et <= e)) {
      if (dec < 1e3 * opt.tolerance * e) break;  // roundoff floor
      throw SolverError("line search failed to decrease the p-energy", dec / e);
    }
    u = trial;
    e = et;
  }
  if (it == opt.max_newton) throw SolverError("Newton iteration limit reached", dec / e);
  if (stats) {
    stats->newton_iterations = it;
    stats->decrement = dec / e;
    stats->energy = e;
  }
  return u;
}

}  // namespace convcap
