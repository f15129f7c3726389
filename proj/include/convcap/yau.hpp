#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <unsupported/Eigen/FFT>

#include "convcap/capacity.hpp"
#include "convcap/core.hpp"
#include "convcap/geometry.hpp"
#include "convcap/quadrature.hpp"

namespace convcap {

/// Positive radial mass density h(x) = profile(|x - center|).
class MassDensity {
 public:
  enum class Kind { GaussianBump, RadialPower, Tabulated };

  /// a exp(-|x - c|^2 / s^2)
  static MassDensity gaussian_bump(int n, double amplitude, double width,
                                   Eigen::VectorXd center = Eigen::VectorXd()) {
    if (!(width > 0.0)) throw InputError("gaussian width must be positive");
    MassDensity m(Kind::GaussianBump, n, amplitude, std::move(center));
    m.width_ = width;
    return m;
  }

  /// a (1 + |x - c|^2)^{-q/2}, q > n
  static MassDensity radial_power(int n, double amplitude, double exponent,
                                  Eigen::VectorXd center = Eigen::VectorXd()) {
    if (!(exponent > n)) throw InputError("radial power exponent must exceed the dimension");
    MassDensity m(Kind::RadialPower, n, amplitude, std::move(center));
    m.exponent_ = exponent;
    return m;
  }

  /// Piecewise linear in r through (radii[i], values[i]), radii[0] = 0;
  /// beyond the last radius the profile decays like r^{-(n+1)}.
  static MassDensity tabulated(int n, std::vector<double> radii, std::vector<double> values,
                               Eigen::VectorXd center = Eigen::VectorXd()) {
    if (radii.size() != values.size() || radii.size() < 2) throw InputError("tabulated density needs matching radii and values");
    if (radii.front() != 0.0) throw InputError("tabulated density must start at r = 0");
    for (std::size_t i = 1; i < radii.size(); ++i) {
      if (!(radii[i] > radii[i - 1])) throw InputError("tabulated radii must increase");
    }
    for (double v : values) {
      if (!(v > 0.0)) throw InputError("tabulated density values must be positive");
    }
    MassDensity m(Kind::Tabulated, n, 1.0, std::move(center));
    m.radii_ = std::move(radii);
    m.values_ = std::move(values);
    return m;
  }

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  double amplitude() const { return amplitude_; }
  double width() const { return width_; }
  double exponent() const { return exponent_; }
  const Eigen::VectorXd& center() const { return center_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& values() const { return values_; }

  /// Length scale of the effective support.
  double length_scale() const {
    switch (kind_) {
      case Kind::GaussianBump: return width_;
      case Kind::RadialPower: return 1.0;
      case Kind::Tabulated: return radii_.back();
    }
    return 1.0;
  }

  double radial(double r) const {
    switch (kind_) {
      case Kind::GaussianBump: return amplitude_ * std::exp(-(r * r) / (width_ * width_));
      case Kind::RadialPower: return amplitude_ * std::pow(1.0 + r * r, -0.5 * exponent_);
      case Kind::Tabulated: {
        const double rl = radii_.back();
        if (r >= rl) return amplitude_ * values_.back() * std::pow(rl / r, n_ + 1);
        const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
        const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
        const double t = (r - radii_[i]) / (radii_[i + 1] - radii_[i]);
        return amplitude_ * ((1.0 - t) * values_[i] + t * values_[i + 1]);
      }
    }
    return 0.0;
  }

  double operator()(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw InputError("density evaluated at a point of the wrong dimension");
    return radial((x - center_).norm());
  }

  double l1_norm() const {
    const double sigma = unit_sphere_area(n_);
    switch (kind_) {
      case Kind::GaussianBump: return amplitude_ * std::pow(pi * width_ * width_, 0.5 * n_);
      case Kind::RadialPower:
        return amplitude_ * 0.5 * sigma * boost::math::beta(0.5 * n_, 0.5 * (exponent_ - n_));
      case Kind::Tabulated: {
        double s = 0.0;
        const QuadratureRule gl = gauss_legendre(8, 0.0, 1.0);
        for (std::size_t i = 0; i + 1 < radii_.size(); ++i) {
          const double a = radii_[i], b = radii_[i + 1];
          for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            const double r = a + (b - a) * gl.nodes[j];
            s += (b - a) * gl.weights[j] * radial(r) * std::pow(r, n_ - 1);
          }
        }
        s += amplitude_ * values_.back() * std::pow(radii_.back(), n_);
        return sigma * s;
      }
    }
    return 0.0;
  }

  MassDensity scaled(double lambda) const {
    if (!(lambda > 0.0)) throw InputError("density scale must be positive");
    MassDensity m = *this;
    m.amplitude_ *= lambda;
    return m;
  }

  MassDensity translated(const Eigen::VectorXd& v) const {
    MassDensity m = *this;
    m.center_ += v;
    return m;
  }

 private:
  MassDensity(Kind kind, int n, double amplitude, Eigen::VectorXd center)
      : kind_(kind), n_(n), amplitude_(amplitude), center_(std::move(center)) {
    if (n != 2 && n != 3) throw InputError("density dimension must be 2 or 3");
    if (!(amplitude > 0.0)) throw InputError("density amplitude must be positive");
    if (center_.size() == 0) center_ = Eigen::VectorXd::Zero(n);
    if (center_.size() != n) throw InputError("density center has the wrong dimension");
  }

  Kind kind_;
  int n_;
  double amplitude_;
  Eigen::VectorXd center_;
  double width_ = 1.0;
  double exponent_ = 0.0;
  std::vector<double> radii_, values_;
};

struct Objective {
  enum class Kind { Pcap, Surface, Volume };
  Kind kind = Kind::Pcap;
  double p = 0.0;

  static Objective pcap(double p) { return {Kind::Pcap, p}; }
  static Objective surface() { return {Kind::Surface, 0.0}; }
  static Objective volume() { return {Kind::Volume, 0.0}; }

  std::string name() const {
    switch (kind) {
      case Kind::Pcap: return "pcap";
      case Kind::Surface: return "surface";
      case Kind::Volume: return "volume";
    }
    return "";
  }
};

struct YauOptions {
  /// Capacity discretization; per-dimension defaults when empty.
  std::optional<CapacityOptions> capacity;
  /// Gauss points along each ray for int_A h.
  int radial_order = 32;
  /// Sphere rule order for 3D interiors.
  int sphere_order = 32;

  CapacityOptions capacity_for(int n) const { return capacity ? *capacity : CapacityOptions::defaults(n); }
};

/// int_A h dL^n by polar quadrature around an interior point.
inline double integrate_density(const Body& body, const MassDensity& h, const YauOptions& opt = {}) {
  if (h.dimension() != dimension(body)) throw InputError("density and body dimensions differ");
  const QuadratureRule gl = gauss_legendre(opt.radial_order, 0.0, 1.0);
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          // (theta, s) -> c + s (x(theta) - c), Jacobian s rho(theta) (h(theta) - c.u)
          const Vec2 c = b.centroid();
          Eigen::VectorXd y(2);
          double total = 0.0;
          for (int k = 0; k < b.grid_size(); ++k) {
            const Vec2 x = b.boundary_point_at(k);
            const Vec2 u = SupportBody2::direction(b.angle(k));
            const double jac = b.curvature_radius(k) * (b.value(k) - c.dot(u));
            double inner = 0.0;
            for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
              const double s = gl.nodes[j];
              const Vec2 z = c + s * (x - c);
              y << z.x(), z.y();
              inner += gl.weights[j] * s * h(y);
            }
            total += jac * inner;
          }
          return total * b.step();
        } else if constexpr (std::is_same_v<T, ParamBody3>) {
          Eigen::VectorXd y(3);
          if (b.kind == ParamBody3::Kind::Box) {
            const QuadratureRule g = gauss_legendre(opt.radial_order);
            double s = 0.0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
              for (std::size_t j = 0; j < g.nodes.size(); ++j) {
                for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                  const Vec3 loc(g.nodes[i] * b.axes.x(), g.nodes[j] * b.axes.y(), g.nodes[k] * b.axes.z());
                  const Vec3 z = b.center + b.rotation * loc;
                  y << z.x(), z.y(), z.z();
                  s += g.weights[i] * g.weights[j] * g.weights[k] * h(y);
                }
              }
            }
            return s * b.axes.prod();
          }
          const SphereRule rule = sphere_rule(opt.sphere_order);
          double s = 0.0;
          for (std::size_t d = 0; d < rule.weights.size(); ++d) {
            const Vec3 dir = b.rotation * b.axes.cwiseProduct(rule.directions[d]);
            double inner = 0.0;
            for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
              const double t = gl.nodes[j];
              const Vec3 z = b.center + t * dir;
              y << z.x(), z.y(), z.z();
              inner += gl.weights[j] * t * t * h(y);
            }
            s += rule.weights[d] * inner;
          }
          return s * b.axes.prod();
        } else {
          const Vec3 c = b.center();
          const SphereRule rule = sphere_rule(opt.sphere_order);
          Eigen::VectorXd y(3);
          double s = 0.0;
          for (std::size_t d = 0; d < rule.weights.size(); ++d) {
            const double rho = b.radial(rule.directions[d]);
            double inner = 0.0;
            for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
              const double t = gl.nodes[j] * rho;
              const Vec3 z = c + t * rule.directions[d];
              y << z.x(), z.y(), z.z();
              inner += gl.weights[j] * t * t * h(y);
            }
            s += rule.weights[d] * inner * rho;
          }
          return s;
        }
      },
      body);
}

struct FValue {
  double value = 0.0;
  double mass = 0.0;
  double cost = 0.0;
  std::optional<CapacityResult> capacity;
};

inline FValue evaluate_F_detail(const Body& body, const MassDensity& h, const Objective& obj,
                                const YauOptions& opt = {}) {
  const int n = dimension(body);
  if (obj.kind == Objective::Kind::Pcap) require_capacity_exponent(n, obj.p);
  FValue f;
  f.mass = integrate_density(body, h, opt);
  switch (obj.kind) {
    case Objective::Kind::Pcap:
      f.capacity = capacity(body, obj.p, opt.capacity_for(n));
      f.cost = f.capacity->value();
      break;
    case Objective::Kind::Surface: f.cost = surface_area(body); break;
    case Objective::Kind::Volume: f.cost = volume(body); break;
  }
  f.value = f.mass - f.cost;
  return f;
}

/// F(A) = int_A h - cost(A).
inline double evaluate_F(const Body& body, const MassDensity& h, const Objective& obj, const YauOptions& opt = {}) {
  return evaluate_F_detail(body, h, obj, opt).value;
}

/// Boundary data shared by the first variation and the Euler-Lagrange residual.
struct BoundaryState {
  SurfaceQuadrature quadrature;
  /// h at each boundary point.
  std::vector<double> density;
  /// Shape derivative density of the cost: d cost(A + tB)/dt = sum w h_B(nu) variation.
  std::vector<double> variation;
  /// Euler-Lagrange target: (p-1)|grad u|^p, H, or 1/G.
  std::vector<double> el_target;
};

inline BoundaryState boundary_state(const Body& body, const MassDensity& h, const Objective& obj,
                                    const YauOptions& opt = {}) {
  const int n = dimension(body);
  if (h.dimension() != n) throw InputError("density and body dimensions differ");
  if (std::holds_alternative<SupportBody3>(body) || !is_smooth(body)) {
    throw DegenerateGaussMap("boundary is not smooth and strictly convex");
  }
  BoundaryState st;
  st.quadrature = curvature_quadrature(body);
  const auto& q = st.quadrature;
  for (const auto& k : q.principal_curvatures) {
    for (double v : k) {
      if (!(v > 0.0)) throw DegenerateGaussMap("vanishing principal curvature");
    }
  }
  const std::size_t m = q.size();
  st.density.resize(m);
  st.variation.resize(m);
  st.el_target.resize(m);
  for (std::size_t i = 0; i < m; ++i) st.density[i] = h(q.points[i]);
  switch (obj.kind) {
    case Objective::Kind::Pcap: {
      require_capacity_exponent(n, obj.p);
      const CapacityOptions copt = opt.capacity_for(n);
      std::vector<double> g;
      auto trace = [&](const MeshOptions& mo) {
        if (n == 2) {
          return boundary_gradient(solve_equilibrium<2>(ray_body(std::get<SupportBody2>(body)), obj.p, mo, copt.solver), q);
        }
        return boundary_gradient(solve_equilibrium<3>(ray_body(std::get<ParamBody3>(body)), obj.p, mo, copt.solver), q);
      };
      g = trace(copt.mesh);
      if (copt.extrapolate) {
        const MeshOptions fine = copt.mesh.refined(copt.refine_factor);
        const auto gf = trace(fine);
        const double r = static_cast<double>(fine.angular_cells) / copt.mesh.angular_cells;
        for (std::size_t i = 0; i < m; ++i) g[i] = gf[i] + (gf[i] - g[i]) / (r * r - 1.0);
      }
      for (std::size_t i = 0; i < m; ++i) {
        st.variation[i] = st.el_target[i] = (obj.p - 1.0) * std::pow(g[i], obj.p);
      }
      break;
    }
    case Objective::Kind::Surface:
      for (std::size_t i = 0; i < m; ++i) {
        const double H = q.mean_curvature(i);
        st.variation[i] = (n - 1) * H;
        st.el_target[i] = H;
      }
      break;
    case Objective::Kind::Volume:
      for (std::size_t i = 0; i < m; ++i) {
        st.variation[i] = 1.0;
        st.el_target[i] = 1.0 / q.gauss_curvature(i);
      }
      break;
  }
  return st;
}

using SupportFunction = std::function<double(const Eigen::VectorXd&)>;

/// sum w h_B(nu) [h - variation] over a precomputed boundary state.
inline double first_variation(const BoundaryState& st, const SupportFunction& hB) {
  double s = 0.0;
  const auto& q = st.quadrature;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * hB(q.normals[i]) * (st.density[i] - st.variation[i]);
  return s;
}

inline double first_variation(const Body& A, const SupportFunction& hB, const MassDensity& h, const Objective& obj,
                              const YauOptions& opt = {}) {
  return first_variation(boundary_state(A, h, obj, opt), hB);
}

inline double first_variation(const Body& A, const Body& B, const MassDensity& h, const Objective& obj,
                              const YauOptions& opt = {}) {
  if (dimension(A) != dimension(B)) throw InputError("bodies of different dimension");
  return first_variation(A, [&B](const Eigen::VectorXd& u) { return support(B, u); }, h, obj, opt);
}

/// max |target - h| / max h over the boundary quadrature.
inline double el_residual(const BoundaryState& st) {
  double worst = 0.0, hmax = 0.0;
  for (std::size_t i = 0; i < st.density.size(); ++i) {
    worst = std::max(worst, std::abs(st.el_target[i] - st.density[i]));
    hmax = std::max(hmax, std::abs(st.density[i]));
  }
  return worst / hmax;
}

inline double el_residual(const Body& A, const MassDensity& h, const Objective& obj, const YauOptions& opt = {}) {
  return el_residual(boundary_state(A, h, obj, opt));
}

// ---- maximization ----------------------------------------------------

struct MaximizeOptions {
  /// Capacity discretization used inside the loop; fast defaults when empty.
  YauOptions yau;
  int max_iterations = 60;
  /// Stop when the relative projected gradient falls below this.
  double gradient_tolerance = 1e-3;
  /// Collapse when the inradius drops below this fraction of the initial one.
  double collapse_ratio = 1e-3;
  /// Unbounded growth when the diameter exceeds this multiple of the initial one.
  double growth_limit = 100.0;
  /// Highest Fourier mode of the 2D support parameterization.
  int fourier_order = 8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  /// Largest relative parameter change per step.
  double max_relative_step = 0.5;
};

struct OptimState {
  int iteration = 0;
  double objective = 0.0;
  double step = 0.0;
  double gradient_norm = 0.0;
  double el_residual = 0.0;
  double inradius = 0.0;
  bool collapsed = false;
  std::vector<double> parameters;
};

struct OptimTrace {
  std::vector<OptimState> states;
  Body body;
  double objective = 0.0;
  double el_residual = 0.0;
  bool collapsed = false;
  bool converged = false;
  int accepted_steps = 0;
  std::string stop_reason;
};

namespace detail {

/// h(theta) = c0 + sum_{m=1}^M a_m cos(m theta) + b_m sin(m theta).
struct FourierFamily {
  int order;
  int grid;

  static Eigen::VectorXd coefficients(const SupportBody2& b, int order) {
    const int n = b.grid_size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> c;
    fft.fwd(c, b.support_values());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1 + 2 * order);
    x[0] = c[0].real() / n;
    for (int m = 1; m <= order && m < n / 2; ++m) {
      x[m] = 2.0 * c[m].real() / n;
      x[order + m] = -2.0 * c[m].imag() / n;
    }
    return x;
  }

  double support(const Eigen::VectorXd& x, double t) const {
    double v = x[0];
    for (int m = 1; m <= order; ++m) v += x[m] * std::cos(m * t) + x[order + m] * std::sin(m * t);
    return v;
  }

  double curvature_radius(const Eigen::VectorXd& x, double t) const {
    double v = x[0];
    for (int m = 1; m <= order; ++m) v += (1.0 - m * m) * (x[m] * std::cos(m * t) + x[order + m] * std::sin(m * t));
    return v;
  }

  Body body(const Eigen::VectorXd& x) const {
    std::vector<double> a(x.data() + 1, x.data() + 1 + order), b(x.data() + 1 + order, x.data() + 1 + 2 * order);
    return SupportBody2::fourier(x[0], a, b, grid);
  }

  double basis(const Eigen::VectorXd&, int i, const Eigen::VectorXd& nu) const {
    const double t = std::atan2(nu[1], nu[0]);
    if (i == 0) return 1.0;
    if (i <= order) return std::cos(i * t);
    return std::sin((i - order) * t);
  }

  /// L^2(dtheta) norms of the basis functions.
  double metric(int i) const { return i == 0 ? 2.0 * pi : pi; }

  double size(const Eigen::VectorXd& x) const { return x[0]; }

  double min_rho(const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid; ++k) m = std::min(m, curvature_radius(x, 2.0 * pi * k / grid));
    return m;
  }

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    if (!(x[0] > 0.0)) throw Error("support parameterization lost positivity");
    for (int it = 0; it < 400 && min_rho(x) < 0.01 * x[0]; ++it) {
      for (int m = 2; m <= order; ++m) {
        x[m] *= 0.9;
        x[order + m] *= 0.9;
      }
    }
    return x;
  }

  /// Inradius of the ball centered at the Steiner point.
  double inradius(const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid; ++k) {
      const double t = 2.0 * pi * k / grid;
      m = std::min(m, support(x, t) - x[1] * std::cos(t) - x[order + 1] * std::sin(t));
    }
    return m;
  }

  int dimension() const { return 1 + 2 * order; }
};

/// Ball (center, radius) or ellipsoid (center, semi-axes) with fixed orientation.
struct ParamFamily {
  ParamBody3 base;

  Eigen::VectorXd coefficients() const {
    Eigen::VectorXd x(base.kind == ParamBody3::Kind::Ball ? 4 : 6);
    x.head<3>() = base.center;
    if (base.kind == ParamBody3::Kind::Ball) {
      x[3] = base.radius();
    } else {
      x.tail<3>() = base.axes;
    }
    return x;
  }

  Body body(const Eigen::VectorXd& x) const {
    ParamBody3 b = base;
    b.center = x.head<3>();
    b.axes = x.size() == 4 ? Vec3::Constant(x[3]) : Vec3(x.tail<3>());
    return b;
  }

  double basis(const Eigen::VectorXd& x, int i, const Eigen::VectorXd& nu) const {
    if (i < 3) return nu[i];
    if (x.size() == 4) return 1.0;
    const Vec3 v = base.rotation.transpose() * Vec3(nu[0], nu[1], nu[2]);
    const Vec3 a = x.tail<3>();
    const double hr = std::sqrt((a.cwiseProduct(v)).squaredNorm());
    const int j = i - 3;
    return a[j] * v[j] * v[j] / hr;
  }

  double metric(int) const { return 1.0; }

  double size(const Eigen::VectorXd& x) const { return x.size() == 4 ? x[3] : x.tail<3>().mean(); }

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    for (int i = 3; i < x.size(); ++i) {
      if (!(x[i] > 0.0)) throw Error("parametric body lost positivity");
    }
    return x;
  }

  double inradius(const Eigen::VectorXd& x) const { return x.size() == 4 ? x[3] : x.tail<3>().minCoeff(); }

  int dimension() const { return static_cast<int>(coefficients().size()); }
};

template <class Family>
OptimTrace maximize_family(const Family& fam, Eigen::VectorXd x, const MassDensity& h, const Objective& obj,
                           const MaximizeOptions& opt) {
  const int np = static_cast<int>(x.size());
  x = fam.project(x);
  OptimTrace trace;
  Body body = fam.body(x);
  const int n = dimension(body);
  YauOptions yopt = opt.yau;
  if (!yopt.capacity) yopt.capacity = CapacityOptions::fast(n);
  double F = evaluate_F(body, h, obj, yopt);
  const double r_in0 = fam.inradius(x);
  const double diam0 = diameter(body);
  double alpha = -1.0;

  auto snapshot = [&](int it, double step, double gnorm, double el) {
    OptimState s;
    s.iteration = it;
    s.objective = F;
    s.step = step;
    s.gradient_norm = gnorm;
    s.el_residual = el;
    s.inradius = fam.inradius(x);
    s.collapsed = s.inradius < opt.collapse_ratio * r_in0;
    s.parameters.assign(x.data(), x.data() + np);
    trace.states.push_back(s);
  };

  trace.stop_reason = "iteration limit";
  for (int it = 0;; ++it) {
    const BoundaryState st = boundary_state(body, h, obj, yopt);
    const double el = el_residual(st);
    Eigen::VectorXd g(np), gabs(np);
    for (int i = 0; i < np; ++i) {
      g[i] = first_variation(st, [&](const Eigen::VectorXd& u) { return fam.basis(x, i, u); });
      double a = 0.0;
      for (std::size_t k = 0; k < st.quadrature.size(); ++k) {
        a += st.quadrature.weights[k] * std::abs(fam.basis(x, i, st.quadrature.normals[k])) *
             (std::abs(st.density[k]) + std::abs(st.variation[k]));
      }
      gabs[i] = a;
    }
    double num = 0.0, den = 0.0;
    Eigen::VectorXd d(np);
    for (int i = 0; i < np; ++i) {
      num += g[i] * g[i] / fam.metric(i);
      den += gabs[i] * gabs[i] / fam.metric(i);
      d[i] = g[i] / fam.metric(i);
    }
    const double gnorm = den > 0.0 ? std::sqrt(num / den) : 0.0;
    snapshot(it, it == 0 ? 0.0 : alpha, gnorm, el);
    if (gnorm <= opt.gradient_tolerance) {
      trace.converged = true;
      trace.stop_reason = "gradient tolerance";
      break;
    }
    if (it >= opt.max_iterations) break;

    const double size = fam.size(x);
    const double amax = opt.max_relative_step * size / d.cwiseAbs().maxCoeff();
    alpha = alpha < 0.0 ? 0.1 * amax : std::min(2.0 * alpha, amax);
    bool accepted = false;
    for (int ls = 0; ls < opt.max_backtracks; ++ls, alpha *= opt.backtrack) {
      Eigen::VectorXd trial;
      try {
        trial = fam.project(x + alpha * d);
      } catch (const Error&) {
        continue;
      }
      const Body tb = fam.body(trial);
      if (diameter(tb) > opt.growth_limit * diam0) {
        throw UnboundedGrowth("optimizer iterate exceeded the growth limit; density too large for the domain");
      }
      const double Ft = evaluate_F(tb, h, obj, yopt);
      if (Ft >= F + opt.armijo * g.dot(trial - x)) {
        x = trial;
        body = tb;
        F = Ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      trace.stop_reason = "line search stalled";
      trace.converged = true;
      break;
    }
    ++trace.accepted_steps;
    if (fam.inradius(x) < opt.collapse_ratio * r_in0) {
      snapshot(it + 1, alpha, 0.0, 0.0);
      trace.collapsed = true;
      trace.stop_reason = "collapse";
      break;
    }
  }
  trace.body = body;
  trace.objective = F;
  trace.el_residual = trace.states.back().el_residual;
  return trace;
}

}  // namespace detail

/// Projected gradient ascent of F from `init`. 2D bodies move in Fourier
/// support coordinates, 3D balls/ellipsoids in their parameters.
inline OptimTrace maximize(const MassDensity& h, const Objective& obj, const Body& init,
                           const MaximizeOptions& opt = {}) {
  if (h.dimension() != dimension(init)) throw InputError("density and body dimensions differ");
  if (obj.kind == Objective::Kind::Pcap) require_capacity_exponent(dimension(init), obj.p);
  if (const auto* b2 = std::get_if<SupportBody2>(&init)) {
    detail::FourierFamily fam{opt.fourier_order, b2->grid_size()};
    return detail::maximize_family(fam, detail::FourierFamily::coefficients(*b2, opt.fourier_order), h, obj, opt);
  }
  if (const auto* b3 = std::get_if<ParamBody3>(&init)) {
    if (b3->kind == ParamBody3::Kind::Box) throw UnsupportedSmoothness("box family is not optimized");
    detail::ParamFamily fam{*b3};
    return detail::maximize_family(fam, fam.coefficients(), h, obj, opt);
  }
  throw InputError("general 3D support bodies are not optimized");
}

struct AttainmentOptions {
  MaximizeOptions maximize;
  int starts = 4;
  /// Radius of the middle start; the density's length scale when nonpositive.
  double base_radius = 0.0;
};

struct AttainmentResult {
  bool attained = false;
  /// "attained" or "degenerate".
  std::string marker;
  std::optional<Body> witness;
  double best_objective = 0.0;
  int best_start = -1;
  std::vector<OptimTrace> traces;
};

/// Balls centered at the density center with radii base * 2^{j - (starts-1)/2}.
inline std::vector<Body> attainment_starts(const MassDensity& h, const AttainmentOptions& opt) {
  const double base = opt.base_radius > 0.0 ? opt.base_radius : h.length_scale();
  std::vector<Body> out;
  for (int j = 0; j < opt.starts; ++j) {
    const double r = base * std::pow(2.0, j - 0.5 * (opt.starts - 1));
    if (h.dimension() == 2) {
      out.emplace_back(SupportBody2::disk(r, Vec2(h.center()[0], h.center()[1])));
    } else {
      out.emplace_back(ParamBody3::ball(r, Vec3(h.center()[0], h.center()[1], h.center()[2])));
    }
  }
  return out;
}

inline AttainmentResult attainment_check(const MassDensity& h, const Objective& obj, const AttainmentOptions& opt = {}) {
  if (opt.starts < 1) throw InputError("attainment check needs at least one start");
  AttainmentResult res;
  const auto inits = attainment_starts(h, opt);
  for (int j = 0; j < static_cast<int>(inits.size()); ++j) {
    res.traces.push_back(maximize(h, obj, inits[j], opt.maximize));
    const auto& t = res.traces.back();
    if (t.collapsed) continue;
    if (res.best_start < 0 || t.objective > res.best_objective) {
      res.best_start = j;
      res.best_objective = t.objective;
    }
  }
  res.attained = res.best_start >= 0 && res.best_objective >= 0.0;
  if (res.attained) {
    res.witness = res.traces[res.best_start].body;
    res.marker = "attained";
  } else {
    res.marker = "degenerate";
    res.best_objective = 0.0;
  }
  return res;
}

}  // namespace convcap
