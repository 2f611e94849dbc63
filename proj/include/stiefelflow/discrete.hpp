#pragma once

// Moser-Veselov discrete flow on V(n, N):
//   Q_{k+1} Lambda + Q_{k-1} Lambda = B_k Q_k,  B_k symmetric,
// its discrete momenta, the momentum-update form and the isospectral pencil.

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "stiefelflow/stiefel.hpp"

namespace stiefelflow {

/// Two consecutive points (Q_{k-1}, Q_k) of a discrete trajectory.
class DiscretePair {
 public:
  DiscretePair(StiefelPoint prev, StiefelPoint curr) : prev_(std::move(prev)), curr_(std::move(curr)) {
    if (prev_.n() != curr_.n() || prev_.N() != curr_.N())
      throw DimensionError("DiscretePair: points differ in shape");
  }
  DiscretePair(const Mat& prev, const Mat& curr) : DiscretePair(StiefelPoint(prev), StiefelPoint(curr)) {}

  const Mat& prev() const { return prev_.mat(); }
  const Mat& curr() const { return curr_.mat(); }
  Eigen::Index n() const { return curr_.n(); }
  Eigen::Index N() const { return curr_.N(); }

 private:
  StiefelPoint prev_;
  StiefelPoint curr_;
};

struct DiscreteMomenta {
  SkewMatrix body;     // M_k, N x N
  SkewMatrix spatial;  // m_k, n x n
};

/// M_k = Q_{k-1}^T Q_k Lambda - Lambda Q_k^T Q_{k-1},
/// m_k = Q_k Lambda Q_{k-1}^T - Q_{k-1} Lambda Q_k^T.
inline DiscreteMomenta discrete_body_momentum(const DiscretePair& pair, const Metric& lambda) {
  if (pair.N() != lambda.size()) throw DimensionError("discrete_body_momentum: Lambda size");
  const Mat a = pair.prev().transpose() * lambda.right(pair.curr());
  const Mat b = lambda.right(pair.curr()) * pair.prev().transpose();
  return {SkewMatrix(2.0 * a), SkewMatrix(2.0 * b)};
}

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
  /// Extra deterministic starting points tried when Newton from the seed
  /// fails; 0 disables the fallback.
  int fallback_starts = 200;
};

struct MvStepResult {
  DiscretePair pair;  // (Q_k, Q_{k+1})
  SymMatrix multiplier;
  double residual = 0.0;
  int iterations = 0;
  bool from_seed = true;  // false when the root came from a fallback start
};

namespace detail {

inline std::vector<std::pair<Eigen::Index, Eigen::Index>> sym_coords(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) idx.emplace_back(i, j);
  return idx;
}

struct NewtonOutcome {
  Mat b;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton on F(B) = (B G - Qp)(B G - Qp)^T - I over symmetric B, with the
// Jacobian dF(E) = E G Qn^T + Qn G^T E assembled in upper-triangle
// coordinates.
inline NewtonOutcome mv_newton(Mat b, const Mat& g, const Mat& qp, const NewtonOptions& opts) {
  const Eigen::Index n = b.rows();
  const auto coords = sym_coords(n);
  const auto dim = static_cast<Eigen::Index>(coords.size());
  const Mat eye = Mat::Identity(n, n);
  Mat jac(dim, dim);
  Vec f(dim);
  NewtonOutcome out;
  for (int it = 0;; ++it) {
    const Mat qn = b * g - qp;
    const Mat fm = qn * qn.transpose() - eye;
    out.residual = fm.norm();
    out.iterations = it;
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= opts.tolerance) {
      out.converged = true;
      break;
    }
    if (it == opts.max_iterations) break;
    const Mat gq = g * qn.transpose();
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto [i, j] = coords[static_cast<std::size_t>(c)];
      Mat e = Mat::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      const Mat egq = e * gq;
      const Mat df = egq + egq.transpose();
      for (Eigen::Index r = 0; r < dim; ++r) {
        const auto [a, bb] = coords[static_cast<std::size_t>(r)];
        jac(r, c) = df(a, bb);
      }
    }
    for (Eigen::Index r = 0; r < dim; ++r) {
      const auto [a, bb] = coords[static_cast<std::size_t>(r)];
      f(r) = fm(a, bb);
    }
    const Vec delta = jac.fullPivLu().solve(f);
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto [i, j] = coords[static_cast<std::size_t>(c)];
      b(i, j) -= delta(c);
      if (i != j) b(j, i) -= delta(c);
    }
  }
  out.b = std::move(b);
  return out;
}

}  // namespace detail

/// Seed B0 = Q_k L Q_k^T + Q_{k-1} L Q_k^T + Q_k L Q_{k-1}^T.
inline SymMatrix mv_seed(const DiscretePair& pair, const Metric& lambda) {
  const Mat qcl = lambda.right(pair.curr());
  return SymMatrix(qcl * pair.curr().transpose() + lambda.right(pair.prev()) * pair.curr().transpose() +
                   qcl * pair.prev().transpose());
}

/// One implicit step: Newton's method on the n(n+1)/2 entries of B_k with
/// F(B) = Q_{k+1} Q_{k+1}^T - I, Q_{k+1} = B Q_k Lambda^{-1} - Q_{k-1}, from
/// the seed B0. If that iteration fails, Newton is restarted from seeded
/// perturbations of B0 of growing size and the converged root nearest B0 is
/// taken. The step is a deterministic function of the pair.
inline MvStepResult mv_step_detailed(const DiscretePair& pair, const Metric& lambda,
                                     const NewtonOptions& opts = {}) {
  if (pair.N() != lambda.size()) throw DimensionError("mv_step: Lambda size");
  const Mat& qp = pair.prev();
  const Mat g = lambda.right_inv(pair.curr());
  const Mat seed = mv_seed(pair, lambda).mat();
  auto finish = [&](const detail::NewtonOutcome& o, bool from_seed, int iterations) {
    return MvStepResult{DiscretePair(pair.curr(), o.b * g - qp), SymMatrix(o.b), o.residual,
                        iterations, from_seed};
  };

  const detail::NewtonOutcome first = detail::mv_newton(seed, g, qp, opts);
  if (first.converged) return finish(first, true, first.iterations);

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  const double scale = std::max(seed.norm(), 1.0);
  int total = first.iterations;
  std::optional<detail::NewtonOutcome> best;
  for (int s = 0; s < opts.fallback_starts; ++s) {
    const double size = 0.1 * scale * (1.0 + s / 20);
    const Mat start = seed + size * SymMatrix(detail::gaussian(seed.rows(), seed.cols(), rng)).mat();
    detail::NewtonOutcome o = detail::mv_newton(start, g, qp, opts);
    total += o.iterations;
    if (o.converged && (!best || (o.b - seed).norm() < (best->b - seed).norm())) best = std::move(o);
  }
  if (best) return finish(*best, false, total);
  throw NewtonDiverged(first.residual, first.iterations);
}

inline DiscretePair mv_step(const DiscretePair& pair, const Metric& lambda,
                            const NewtonOptions& opts = {}) {
  return mv_step_detailed(pair, lambda, opts).pair;
}

/// M_{k+1} = U^T M_k U - A_k with U = Q_{k-1}^T Q_k and
/// A_k = U^T Lambda (I - U^T U) - (I - U^T U) Lambda U.
inline SkewMatrix mv_momentum_update(const SkewMatrix& m, const Mat& u, const Metric& lambda) {
  const Eigen::Index N = lambda.size();
  if (u.rows() != N || u.cols() != N || m.size() != N)
    throw DimensionError("mv_momentum_update: shapes must be N x N");
  const Mat defect = Mat::Identity(N, N) - u.transpose() * u;
  const Mat ult = lambda.right(u.transpose());  // U^T Lambda
  const Mat a = ult * defect - defect * lambda.left(u);
  return SkewMatrix(u.transpose() * m.mat() * u - a);
}

struct MvPencil {
  Mat l;  // Lambda^2 + s M_k - s^2 Q_{k-1}^T Q_{k-1}
  Mat c;  // Lambda - s Q_k^T Q_{k-1}
};

inline MvPencil mv_pencil(const DiscretePair& pair, const Metric& lambda, double pencil_param) {
  const double s = pencil_param;
  const Mat l2 = lambda.left(lambda.mat());
  const SkewMatrix m = discrete_body_momentum(pair, lambda).body;
  const Mat pp = pair.prev().transpose() * pair.prev();
  return {l2 + s * m.mat() - s * s * pp, lambda.mat() - s * pair.curr().transpose() * pair.prev()};
}

/// || L(s) - C(-s)^T C(s) ||_F / || L(s) ||_F
inline double mv_factorization_residual(const DiscretePair& pair, const Metric& lambda,
                                        double pencil_param) {
  const MvPencil p = mv_pencil(pair, lambda, pencil_param);
  const MvPencil q = mv_pencil(pair, lambda, -pencil_param);
  return (p.l - q.c.transpose() * p.c).norm() / p.l.norm();
}

/// Seeds a discrete trajectory from continuous data: Q_1 is the polar
/// projection of Q_0 + h S_0 Lambda^{-1}.
inline DiscretePair mv_initialize(const Mat& q0, const Mat& s0, const Metric& lambda, double h) {
  if (!(h > 0.0)) throw ConfigError("step", "must be positive");
  if (q0.rows() != s0.rows() || q0.cols() != s0.cols() || q0.cols() != lambda.size())
    throw DimensionError("mv_initialize: shape mismatch");
  return DiscretePair(StiefelPoint(q0), reorthonormalize(q0 + h * lambda.right_inv(s0)));
}

/// Sequence Q_0, Q_1, ..., Q_steps+1 of a discrete run together with Newton
/// statistics per step.
struct DiscreteRun {
  std::vector<Mat> points;
  std::vector<double> residuals;
  std::vector<int> iterations;
};

inline DiscreteRun mv_run(DiscretePair pair, const Metric& lambda, std::size_t steps,
                          const NewtonOptions& opts = {}) {
  DiscreteRun run;
  run.points.reserve(steps + 2);
  run.points.push_back(pair.prev());
  run.points.push_back(pair.curr());
  for (std::size_t k = 0; k < steps; ++k) {
    MvStepResult r = [&] {
      try {
        return mv_step_detailed(pair, lambda, opts);
      } catch (const NewtonDiverged& e) {
        throw NewtonDiverged(e.residual(), e.iterations(), static_cast<long>(k));
      }
    }();
    run.residuals.push_back(r.residual);
    run.iterations.push_back(r.iterations);
    run.points.push_back(r.pair.curr());
    pair = std::move(r.pair);
  }
  return run;
}

}  // namespace stiefelflow
