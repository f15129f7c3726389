#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "convcap/core.hpp"

namespace convcap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` points mapped to [a, b].
inline QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0) {
  if (order < 1) throw InputError("quadrature order must be positive");
  const auto positive = boost::math::legendre_p_zeros<double>(order);
  std::vector<double> x;
  x.reserve(order);
  for (double z : positive) {
    if (z != 0.0) x.push_back(-z);
  }
  for (double z : positive) x.push_back(z);
  std::sort(x.begin(), x.end());
  QuadratureRule rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (double xi : x) {
    const double dp = boost::math::legendre_p_prime(order, xi);
    rule.nodes.push_back(mid + half * xi);
    rule.weights.push_back(half * 2.0 / ((1.0 - xi * xi) * dp * dp));
  }
  return rule;
}

/// Interpolating cubic spline through equispaced samples of a 2*pi-periodic
/// function. Second derivatives come from the cyclic tridiagonal system.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;

  explicit PeriodicSpline(std::vector<double> values, double period = 2.0 * pi)
      : y_(std::move(values)), period_(period) {
    const int n = static_cast<int>(y_.size());
    if (n < 3) throw InputError("periodic spline needs at least 3 samples");
    step_ = period_ / n;
    m_ = solve_cyclic(y_, step_);
  }

  int size() const { return static_cast<int>(y_.size()); }
  double step() const { return step_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& second_derivatives() const { return m_; }

  double operator()(double x) const { return eval(x, 0); }
  double derivative(double x) const { return eval(x, 1); }
  double second_derivative(double x) const { return eval(x, 2); }

  /// 0th, 1st or 2nd derivative of the spline at x.
  double eval(double x, int order) const {
    const int n = size();
    double s = std::fmod(x, period_);
    if (s < 0) s += period_;
    int k = static_cast<int>(std::floor(s / step_));
    if (k >= n) k = n - 1;
    const double t = (s - k * step_) / step_;
    const int k1 = (k + 1) % n;
    const double a = 1.0 - t;
    const double h = step_;
    const double y0 = y_[k], y1 = y_[k1], m0 = m_[k], m1 = m_[k1];
    switch (order) {
      case 0:
        return a * y0 + t * y1 + h * h / 6.0 * ((a * a * a - a) * m0 + (t * t * t - t) * m1);
      case 1:
        return (y1 - y0) / h + h / 6.0 * ((-3.0 * a * a + 1.0) * m0 + (3.0 * t * t - 1.0) * m1);
      default:
        return a * m0 + t * m1;
    }
  }

 private:
  static std::vector<double> solve_cyclic(const std::vector<double>& y, double h) {
    // M_{k-1} + 4 M_k + M_{k+1} = 6 (y_{k+1} - 2 y_k + y_{k-1}) / h^2, solved
    // by Sherman-Morrison on top of the Thomas algorithm.
    const int n = static_cast<int>(y.size());
    std::vector<double> rhs(n);
    for (int k = 0; k < n; ++k) {
      rhs[k] = 6.0 * (y[(k + 1) % n] - 2.0 * y[k] + y[(k + n - 1) % n]) / (h * h);
    }
    const double gamma = -4.0;
    std::vector<double> diag(n, 4.0);
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    auto thomas = [&](std::vector<double> d) {
      std::vector<double> b = diag;
      for (int i = 1; i < n; ++i) {
        const double w = 1.0 / b[i - 1];
        b[i] -= w;
        d[i] -= w * d[i - 1];
      }
      d[n - 1] /= b[n - 1];
      for (int i = n - 2; i >= 0; --i) d[i] = (d[i] - d[i + 1]) / b[i];
      return d;
    };
    const std::vector<double> x = thomas(rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = 1.0;
    const std::vector<double> z = thomas(u);
    const double fact = (x[0] + x[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
    return out;
  }

  std::vector<double> y_;
  std::vector<double> m_;
  double period_ = 2.0 * pi;
  double step_ = 0.0;
};

/// Golden-section maximization of a unimodal function on [a, b].
inline std::pair<double, double> golden_maximize(const std::function<double(double)>& f,
                                                 double a, double b, double tol = 1e-12) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Bracketed root of a continuous function (TOMS 748).
inline double find_root(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-14, std::uintmax_t max_iter = 200) {
  const double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw InputError("find_root: root is not bracketed");
  auto stop = [tol](double lo, double hi) { return std::abs(hi - lo) <= tol * (1.0 + std::abs(lo)); };
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, max_iter);
  return 0.5 * (lo + hi);
}

}  // namespace convcap
