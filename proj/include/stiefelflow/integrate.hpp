#pragma once

// Fixed-step RK4 and adaptive RKF45 over Phase states, with optional
// projection back onto the constraint set after every accepted step.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "stiefelflow/flows.hpp"

namespace stiefelflow {

enum class Method { rk4, rkf45 };

inline std::string to_string(Method m) { return m == Method::rk4 ? "rk4" : "rkf45"; }

struct IntegratorOptions {
  double step = 1e-3;
  Method method = Method::rk4;
  bool project = false;
  double t_end = 1.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("step", "must be positive");
    if (!(t_end >= step)) throw ConfigError("t_end", "must be at least one step");
  }
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Phase> states;
  std::size_t rhs_evaluations = 0;
  std::size_t rejected_steps = 0;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  const Phase& back() const { return states.back(); }
};

using Rhs = std::function<Phase(const Phase&)>;
using Projector = std::function<void(Phase&)>;

inline Phase rk4_step(const Rhs& f, const Phase& y, double h) {
  const Phase k1 = f(y);
  const Phase k2 = f(y + (0.5 * h) * k1);
  const Phase k3 = f(y + (0.5 * h) * k2);
  const Phase k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

// Runge-Kutta-Fehlberg 4(5) tableau.
struct Rkf45Result {
  Phase y5;
  Phase err;
};

inline Rkf45Result rkf45_step(const Rhs& f, const Phase& y, double h) {
  const Phase k1 = f(y);
  const Phase k2 = f(y + (h / 4.0) * k1);
  const Phase k3 = f(y + h * ((3.0 / 32.0) * k1 + (9.0 / 32.0) * k2));
  const Phase k4 =
      f(y + h * ((1932.0 / 2197.0) * k1 + (-7200.0 / 2197.0) * k2 + (7296.0 / 2197.0) * k3));
  const Phase k5 = f(y + h * ((439.0 / 216.0) * k1 + (-8.0) * k2 + (3680.0 / 513.0) * k3 +
                              (-845.0 / 4104.0) * k4));
  const Phase k6 = f(y + h * ((-8.0 / 27.0) * k1 + 2.0 * k2 + (-3544.0 / 2565.0) * k3 +
                              (1859.0 / 4104.0) * k4 + (-11.0 / 40.0) * k5));
  const Phase y4 = y + h * ((25.0 / 216.0) * k1 + (1408.0 / 2565.0) * k3 + (2197.0 / 4104.0) * k4 +
                            (-1.0 / 5.0) * k5);
  const Phase y5 = y + h * ((16.0 / 135.0) * k1 + (6656.0 / 12825.0) * k3 +
                            (28561.0 / 56430.0) * k4 + (-9.0 / 50.0) * k5 + (2.0 / 55.0) * k6);
  return {y5, y5 - y4};
}

inline double scaled_error(const Phase& err, const Phase& y0, const Phase& y1, double atol,
                           double rtol) {
  double e = 0.0;
  auto acc = [&](const Mat& d, const Mat& a, const Mat& b) {
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double sc = atol + rtol * std::max(std::abs(a(i)), std::abs(b(i)));
      e = std::max(e, std::abs(d(i)) / sc);
    }
  };
  acc(err.first, y0.first, y1.first);
  acc(err.second, y0.second, y1.second);
  return e;
}

}  // namespace detail

/// Integrates y' = rhs(y) from t = 0 to opts.t_end. The trajectory records the
/// initial state and every accepted step. When opts.project is set and a
/// projector is given, it is applied after each accepted step.
inline Trajectory integrate(const Rhs& rhs, Phase y0, const IntegratorOptions& opts,
                            const Projector& projector = {}) {
  opts.validate();
  Trajectory traj;
  std::size_t evals = 0;
  const Rhs f = [&](const Phase& y) {
    ++evals;
    return rhs(y);
  };
  const bool project = opts.project && static_cast<bool>(projector);
  traj.t.push_back(0.0);
  traj.states.push_back(y0);

  if (opts.method == Method::rk4) {
    const auto steps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.step - 1e-9));
    Phase y = std::move(y0);
    double t = 0.0;
    for (std::size_t i = 1; i <= steps; ++i) {
      const double t_next = std::min(opts.t_end, static_cast<double>(i) * opts.step);
      y = rk4_step(f, y, t_next - t);
      if (project) projector(y);
      t = t_next;
      traj.t.push_back(t);
      traj.states.push_back(y);
    }
  } else {
    Phase y = std::move(y0);
    double t = 0.0;
    double h = opts.step;
    while (t < opts.t_end) {
      if (t + h > opts.t_end) h = opts.t_end - t;
      if (h < 1e-14) throw StepFailure(t, h);
      auto res = detail::rkf45_step(f, y, h);
      const double err = detail::scaled_error(res.err, y, res.y5, opts.abs_tol, opts.rel_tol);
      if (err <= 1.0) {
        y = std::move(res.y5);
        if (project) projector(y);
        t = (opts.t_end - (t + h) < 1e-14 * opts.t_end) ? opts.t_end : t + h;
        traj.t.push_back(t);
        traj.states.push_back(y);
      } else {
        ++traj.rejected_steps;
      }
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
    }
  }
  traj.rhs_evaluations = evals;
  return traj;
}

// ---- projectors ---------------------------------------------------------

/// Polar re-orthonormalization of the first component.
inline Projector frame_projector() {
  return [](Phase& y) { y.first = reorthonormalize(y.first).mat(); };
}

/// Polar projection of Q followed by the metric-minimal correction
/// S <- S + C Q restoring Q Lambda^{-1} S^T + S Lambda^{-1} Q^T = 0, where
/// K C + C K = -(Q Lambda^{-1} S^T + S Lambda^{-1} Q^T).
inline void project_cotangent(Phase& y, const Metric& lambda) {
  y.first = reorthonormalize(y.first).mat();
  const Mat& q = y.first;
  const Mat c = lambda.right_inv(q) * y.second.transpose();
  const SymMatrix e(c + c.transpose());
  const Mat k = lambda.right_inv(q) * q.transpose();
  const SymMatrix corr = solve_kxxk(k, SymMatrix(-e.mat()));
  y.second += corr.mat() * q;
}

inline Projector cotangent_projector(const Metric& lambda) {
  return [lambda](Phase& y) { project_cotangent(y, lambda); };
}

/// Q back onto SO(N), M antisymmetrized.
inline Projector rigid_projector() {
  return [](Phase& y) {
    y.first = reorthonormalize(y.first).mat();
    y.second = SkewMatrix(y.second).mat();
  };
}

/// For n = 1 flows stored as column vectors: normalize q; when `tangent`
/// is set also remove the normal component of the second vector.
inline Projector unit_vector_projector(bool tangent) {
  return [tangent](Phase& y) {
    y.first /= y.first.norm();
    if (tangent) y.second -= y.first * (y.first.transpose() * y.second);
  };
}

}  // namespace stiefelflow
