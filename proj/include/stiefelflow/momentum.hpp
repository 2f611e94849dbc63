#pragma once

// Momentum maps and the structure maps between solution spaces:
//   J_Q(U) = Q^T Q U Lambda + Lambda U Q^T Q  and its inversion,
//   body / spatial momenta,
//   Xi   : (Q, P)  -> (Q, P0)   shift of the costate onto k = 0,
//   frak M: (Q, S) -> (Q, P0)   variational -> optimal-control states,
//   Phi  : (Q, P0) -> (Q, Mbar) optimal-control states -> cotangent bundle.

#include "stiefelflow/stiefel.hpp"

namespace stiefelflow {

/// Body momentum M = Q^T S - S^T Q.
struct BodyMomentum {
  SkewMatrix m;
};

/// Spatial momentum m = S Q^T - Q S^T = Q M Q^T.
struct SpatialMomentum {
  SkewMatrix m;
};

/// Momentum-like Mbar with Q Mbar = P0.
struct MBar {
  SkewMatrix m;
};

/// K = Q Lambda^{-1} Q^T with its Cholesky factor (for K^{-1} products) and
/// eigendecomposition (for K X + X K = R solves).
class GramFactor {
 public:
  GramFactor(const Mat& q, const Metric& lambda)
      : k_(lambda.right_inv(q) * q.transpose()), llt_(k_), eig_(spd_eigen(k_)) {
    if (llt_.info() != Eigen::Success) throw NotSPD("Q Lambda^-1 Q^T is not positive definite");
  }

  const Mat& k() const { return k_; }
  /// K^{-1} A
  Mat solve_left(const Mat& a) const { return llt_.solve(a); }
  /// A K^{-1}
  Mat solve_right(const Mat& a) const { return llt_.solve(a.transpose()).transpose(); }
  const SpdEigen& eigen() const { return eig_; }

 private:
  Mat k_;
  Eigen::LLT<Mat> llt_;
  SpdEigen eig_;
};

inline void check_pair_shape(const Mat& q, const Mat& s, const char* who) {
  if (q.rows() != s.rows() || q.cols() != s.cols())
    throw DimensionError(std::string(who) + ": Q and its fiber variable differ in shape");
}

inline BodyMomentum body_momentum(const Mat& q, const Mat& s) {
  check_pair_shape(q, s, "body_momentum");
  const Mat qs = q.transpose() * s;
  return {SkewMatrix(2.0 * qs)};  // (2A - 2A^T)/2 = A - A^T
}

inline SpatialMomentum spatial_momentum(const Mat& q, const Mat& s) {
  check_pair_shape(q, s, "spatial_momentum");
  const Mat sq = s * q.transpose();
  return {SkewMatrix(2.0 * sq)};
}

/// J_Q(U) = Q^T Q U Lambda + Lambda U Q^T Q.
inline BodyMomentum jq_apply(const Mat& q, const SkewMatrix& u, const Metric& lambda) {
  const Mat qtq = q.transpose() * q;
  const Mat a = qtq * lambda.right(u.mat());
  return {SkewMatrix(a - a.transpose())};  // (Lambda U Q^T Q) = -(Q^T Q U Lambda)^T
}

/// Canonical solution U = U1 + U2 of J_Q(U) = Q^T S - S^T Q.
///
///   U1 = Lambda^{-1} (Q^T K^{-1} S - S^T K^{-1} Q) Lambda^{-1}
///   U2 = Lambda^{-1} Q^T X Q Lambda^{-1},   K X + X K = R,
///   R  = (Q Lambda^{-1} S^T) K^{-1} - K^{-1} (S Lambda^{-1} Q^T),
///
/// with K = Q Lambda^{-1} Q^T. S need not be tangent; Q U Lambda = S holds
/// whenever S Lambda^{-1} is tangent at Q.
inline ControlRep jq_solve(const Mat& q, const Mat& s, const Metric& lambda, const GramFactor& gram) {
  check_pair_shape(q, s, "jq_solve");
  const Mat kinv_s = gram.solve_left(s);                     // K^{-1} S
  const Mat g = q.transpose() * kinv_s;                      // Q^T K^{-1} S
  const Mat u1 = lambda.left_inv(lambda.right_inv(g - g.transpose()));
  const Mat c = lambda.right_inv(q) * s.transpose();         // Q Lambda^{-1} S^T
  const Mat ck = gram.solve_right(c);                        // (Q Lambda^{-1} S^T) K^{-1}
  const SkewMatrix r(2.0 * ck);                              // ck - ck^T
  const SkewMatrix x = solve_kxxk(gram.eigen(), r);
  const Mat u2 = lambda.left_inv(lambda.right_inv(q.transpose() * x.mat() * q));
  return {q, SkewMatrix(u1 + u2)};
}

inline ControlRep jq_solve(const Mat& q, const Mat& s, const Metric& lambda) {
  return jq_solve(q, s, lambda, GramFactor(q, lambda));
}

/// frak M: P0 = S + D Q with D = -(Q S^T + S Q^T) / 2.
inline Mat map_S_to_P0(const Mat& q, const Mat& s, const Metric& /*lambda*/) {
  check_pair_shape(q, s, "map_S_to_P0");
  const Mat qs = q * s.transpose();
  const Mat d = -0.5 * (qs + qs.transpose());
  return s + d * q;
}

/// || Q P^T + P Q^T ||_F
inline double k_residual(const Mat& q, const Mat& p) {
  const Mat qp = q * p.transpose();
  return (qp + qp.transpose()).norm();
}

/// frak M^{-1}: S = P0 - [ (Q Lambda^{-1} P0^T) K^{-1} - K X0 ] Q with
/// K X0 + X0 K = R0 and R0 built from P0 as R is built from S.
inline Mat map_P0_to_S(const Mat& q, const Mat& p0, const Metric& lambda) {
  check_pair_shape(q, p0, "map_P0_to_S");
  const double res = k_residual(q, p0);
  if (!(res <= 1e-10)) throw ConstraintViolated("map_P0_to_S requires Q P0^T + P0 Q^T = 0", res);
  const GramFactor gram(q, lambda);
  const Mat c = lambda.right_inv(q) * p0.transpose();  // Q Lambda^{-1} P0^T
  const Mat ck = gram.solve_right(c);
  const SkewMatrix x0 = solve_kxxk(gram.eigen(), SkewMatrix(2.0 * ck));
  const Mat d = ck - gram.k() * x0.mat();
  return p0 - d * q;
}

/// Xi: P0 = P - k Q / 2 with k = P Q^T + Q P^T.
inline Mat xi_reduce(const Mat& q, const Mat& p) {
  check_pair_shape(q, p, "xi_reduce");
  const Mat pq = p * q.transpose();
  const Mat k = pq + pq.transpose();
  return p - 0.5 * k * q;
}

/// Mbar = -Q^T m Q / 2 + M with m = Q M Q^T.
inline MBar mbar_from_momenta(const Mat& q, const SkewMatrix& body) {
  const Mat m = q * body.mat() * q.transpose();
  return {SkewMatrix(-0.5 * q.transpose() * m * q + body.mat())};
}

/// P0 = -m Q / 2 + Q M with m = Q M Q^T.
inline Mat p0_from_momenta(const Mat& q, const SkewMatrix& body) {
  const Mat m = q * body.mat() * q.transpose();
  return -0.5 * m * q + q * body.mat();
}

/// Phi: (Q, P0) -> (Q, Mbar),
/// Mbar = -Q^T (P0 Q^T - Q P0^T) Q / 2 + Q^T P0 - P0^T Q.
inline MBar phi_to_cotangent(const Mat& q, const Mat& p0) {
  check_pair_shape(q, p0, "phi_to_cotangent");
  const double res = k_residual(q, p0);
  if (!(res <= 1e-10)) throw ConstraintViolated("phi_to_cotangent requires Q P0^T + P0 Q^T = 0", res);
  const Mat pq = p0 * q.transpose();
  const Mat qp = q.transpose() * p0;
  return {SkewMatrix(-0.5 * q.transpose() * (pq - pq.transpose()) * q + qp - qp.transpose())};
}

/// Phi^{-1}: (Q, Mbar) -> (Q, Q Mbar).
inline Mat phi_inverse(const Mat& q, const MBar& mbar) { return q * mbar.m.mat(); }

/// Mbar from the variational pair: Mbar = Q^T Sbar - Sbar^T Q, Sbar = S (I - Q^T Q / 2).
inline MBar mbar_from_cotangent(const Mat& q, const Mat& s) {
  check_pair_shape(q, s, "mbar_from_cotangent");
  const Mat sbar = s * (Mat::Identity(q.cols(), q.cols()) - 0.5 * q.transpose() * q);
  const Mat a = q.transpose() * sbar;
  return {SkewMatrix(a - a.transpose())};
}

}  // namespace stiefelflow
