#pragma once

// Right-hand sides of the continuous flows:
//   geodesic (Q, S):           Qdot = S Lambda^{-1}, Sdot = B Q
//   optimal control (Q, P):    Qdot = Q U, Pdot = P U - Q A
//   rigid body (Q, M), n = N:  Qdot = Q U, Mdot = [M, U]
//   McLachlan-Scovel (Q, P0):  Qdot = Q U, P0dot = P0 U
//   ellipsoid (q, p), n = 1:   qdot = -U q, pdot = -U p + A q
//   sphere (q, qdot), n = 1:   qddot = -(qdot.qdot)/(q^T Lambda^{-1} q) Lambda^{-1} q

#include "stiefelflow/momentum.hpp"

namespace stiefelflow {

/// A pair of equally usable matrices (position-like, momentum-like). Every
/// continuous flow in the library evolves one of these.
struct Phase {
  Mat first;
  Mat second;

  Phase& operator+=(const Phase& o) {
    first += o.first;
    second += o.second;
    return *this;
  }
  friend Phase operator+(Phase a, const Phase& b) { return a += b; }
  friend Phase operator-(const Phase& a, const Phase& b) {
    return {a.first - b.first, a.second - b.second};
  }
  friend Phase operator*(double s, const Phase& a) { return {s * a.first, s * a.second}; }

  double norm() const { return std::sqrt(first.squaredNorm() + second.squaredNorm()); }
};

/// (Q, S) with S = Qdot Lambda.
using CotangentState = Phase;
/// (Q, P) state and costate of the optimal-control extremals.
using ExtremalState = Phase;

/// || Q Lambda^{-1} S^T + S Lambda^{-1} Q^T ||_F
inline double cotangent_residual(const Mat& q, const Mat& s, const Metric& lambda) {
  const Mat c = lambda.right_inv(q) * s.transpose();
  return (c + c.transpose()).norm();
}

/// Geodesic flow in (Q, S): B solves K B + B K = -2 S Lambda^{-2} S^T.
inline Phase geodesic_rhs(const Mat& q, const Mat& s, const Metric& lambda) {
  check_pair_shape(q, s, "geodesic_rhs");
  const Mat qdot = lambda.right_inv(s);
  const GramFactor gram(q, lambda);
  const SymMatrix b = solve_kxxk(gram.eigen(), SymMatrix(-2.0 * qdot * qdot.transpose()));
  return {qdot, b.mat() * q};
}

/// Lagrange multiplier B of the geodesic flow (exposed for diagnostics).
inline SymMatrix geodesic_multiplier(const Mat& q, const Mat& s, const Metric& lambda) {
  const Mat qdot = lambda.right_inv(s);
  return solve_kxxk(Mat(lambda.right_inv(q) * q.transpose()), SymMatrix(-2.0 * qdot * qdot.transpose()));
}

/// A = Q^T Q U Lambda U - U Lambda U Q^T Q.
inline Mat extremal_a_term(const Mat& q, const SkewMatrix& u, const Metric& lambda) {
  const Mat qtq = q.transpose() * q;
  const Mat ulu = u.mat() * lambda.left(u.mat());
  return commutator(qtq, ulu);
}

/// Optimal-control extremal flow on W^k; U from the maximum principle.
inline Phase oc_rhs(const Mat& q, const Mat& p, const Metric& lambda) {
  check_pair_shape(q, p, "oc_rhs");
  const ControlRep ctrl = jq_solve(q, p, lambda);
  const Mat& u = ctrl.u.mat();
  const Mat a = extremal_a_term(q, ctrl.u, lambda);
  return {q * u, p * u - q * a};
}

/// Euler-Arnold rigid body on SO(N): U = J^{-1}(M), J(U) = Lambda U + U Lambda.
inline Phase rigid_body_rhs(const Mat& q, const Mat& m, const Metric& lambda) {
  if (q.rows() != q.cols() || q.cols() != lambda.size() || m.rows() != q.cols())
    throw DimensionError("rigid_body_rhs requires n = N");
  const SkewMatrix u = solve_kxxk(lambda.mat(), SkewMatrix(m));
  return {q * u.mat(), commutator(m, u.mat())};
}

/// || sym(Q^T P0) ||_F, zero on the McLachlan-Scovel invariant set.
inline double ms_skew_residual(const Mat& q, const Mat& p0) {
  const Mat a = q.transpose() * p0;
  return (a + a.transpose()).norm();
}

/// McLachlan-Scovel flow, n = N: U = J^{-1}(Q^T P0).
inline Phase mclachlan_scovel_rhs(const Mat& q, const Mat& p0, const Metric& lambda,
                                  double tolerance = 1e-10) {
  if (q.rows() != q.cols() || q.cols() != lambda.size())
    throw DimensionError("mclachlan_scovel_rhs requires n = N");
  const double res = ms_skew_residual(q, p0);
  if (!(res <= tolerance)) throw ConstraintViolated("Q^T P0 is not skew", res);
  const SkewMatrix u = solve_kxxk(lambda.mat(), SkewMatrix(q.transpose() * p0));
  return {q * u.mat(), p0 * u.mat()};
}

/// Quantities of the n = 1 extremal flow at (q, p).
struct EllipsoidTerms {
  SkewMatrix body;  // M = q p^T - p q^T
  SkewMatrix u;     // Lambda^{-1} M Lambda^{-1} / (q^T Lambda^{-1} q)
  Mat a;            // (q q^T Lambda^{-1} - Lambda^{-1} q q^T) Delta / c^2
  double c = 0.0;   // q^T Lambda^{-1} q
  double delta = 0.0;  // (p^T L^{-1} q)^2 - (p^T L^{-1} p)(q^T L^{-1} q)
};

inline EllipsoidTerms ellipsoid_terms(const Vec& q, const Vec& p, const Metric& lambda) {
  if (q.size() != lambda.size() || p.size() != lambda.size())
    throw DimensionError("ellipsoid: q, p must have length N");
  EllipsoidTerms t;
  const Vec lq = lambda.inv_diag().cwiseProduct(q);
  const Vec lp = lambda.inv_diag().cwiseProduct(p);
  t.c = q.dot(lq);
  const double beta = p.dot(lq);
  const double gamma = p.dot(lp);
  t.delta = beta * beta - gamma * t.c;
  const Mat qp = q * p.transpose();
  t.body = SkewMatrix(2.0 * qp);
  t.u = SkewMatrix(lambda.left_inv(lambda.right_inv(t.body.mat())) / t.c);
  const Mat qql = q * lq.transpose();  // q q^T Lambda^{-1}
  t.a = (qql - qql.transpose()) * (t.delta / (t.c * t.c));
  return t;
}

/// n = 1 extremal flow with Q = q^T, P = p^T.
inline Phase ellipsoid_rhs(const Vec& q, const Vec& p, const Metric& lambda) {
  const EllipsoidTerms t = ellipsoid_terms(q, p, lambda);
  return {Mat(-t.u.mat() * q), Mat(-t.u.mat() * p + t.a * q)};
}

/// Variational sphere flow: returns qddot.
inline Vec sphere_variational_rhs(const Vec& q, const Vec& qdot, const Metric& lambda) {
  if (q.size() != lambda.size() || qdot.size() != lambda.size())
    throw DimensionError("sphere: q, qdot must have length N");
  const Vec lq = lambda.inv_diag().cwiseProduct(q);
  return -(qdot.squaredNorm() / q.dot(lq)) * lq;
}

/// Checked variant of sphere_variational_rhs: |q| = 1 and q.qdot = 0 to 1e-10.
inline Vec sphere_variational_rhs_checked(const Vec& q, const Vec& qdot, const Metric& lambda) {
  const double r1 = std::abs(q.squaredNorm() - 1.0);
  if (!(r1 <= 1e-10)) throw ConstraintViolated("|q| != 1", r1);
  const double r2 = std::abs(q.dot(qdot));
  if (!(r2 <= 1e-10)) throw ConstraintViolated("q . qdot != 0", r2);
  return sphere_variational_rhs(q, qdot, lambda);
}

/// Costate of the symmetric rigid-body representation:
/// P = Q exp(asinh(M / 2)), so that Q^T P - P^T Q = M. Requires ||M||_op < 2.
inline Mat reconstruct_P_rigid(const Mat& q, const SkewMatrix& m) {
  if (q.rows() != q.cols() || m.size() != q.cols())
    throw DimensionError("reconstruct_P_rigid requires n = N");
  return q * expm_skew(skew_arcsinh_half(m));
}

}  // namespace stiefelflow
