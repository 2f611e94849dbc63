#pragma once

// Points of V(n, N) = { Q in R^{n x N} : Q Q^T = I_n }, the left-invariant
// metric <<W1, W2>> = trace(Lambda W1^T W2), tangent representatives and
// sampling.

#include <cstdint>
#include <random>

#include "stiefelflow/matlin.hpp"

namespace stiefelflow {

/// Positive diagonal metric Lambda.
class Metric {
 public:
  Metric() = default;
  explicit Metric(SpdDiag d) : d_(std::move(d)), inv_(d_.diag().cwiseInverse()) {}
  explicit Metric(const Vec& diag) : Metric(SpdDiag(diag)) {}
  static Metric identity(Eigen::Index n) { return Metric(Vec::Ones(n)); }

  Eigen::Index size() const { return d_.size(); }
  const Vec& diag() const { return d_.diag(); }
  const Vec& inv_diag() const { return inv_; }
  Mat mat() const { return d_.mat(); }
  Mat inv_mat() const { return inv_.asDiagonal(); }

  /// W Lambda
  Mat right(const Mat& w) const { return w * d_.diag().asDiagonal(); }
  /// W Lambda^{-1}
  Mat right_inv(const Mat& w) const { return w * inv_.asDiagonal(); }
  /// Lambda W
  Mat left(const Mat& w) const { return d_.diag().asDiagonal() * w; }
  /// Lambda^{-1} W
  Mat left_inv(const Mat& w) const { return inv_.asDiagonal() * w; }

  bool is_identity(double tol = 0.0) const {
    return (d_.diag().array() - 1.0).abs().maxCoeff() <= tol;
  }

 private:
  SpdDiag d_;
  Vec inv_;
};

/// || Q Q^T - I_n ||_F
inline double orthonormality_residual(const Mat& q) {
  return (q * q.transpose() - Mat::Identity(q.rows(), q.rows())).norm();
}

/// An n x N matrix with orthonormal rows, checked on construction.
class StiefelPoint {
 public:
  static constexpr double kTolerance = 1e-10;

  explicit StiefelPoint(Mat q) : q_(std::move(q)) {
    if (q_.rows() < 1 || q_.rows() > q_.cols())
      throw DimensionError("StiefelPoint requires 1 <= n <= N");
    const double r = orthonormality_residual(q_);
    if (!(r <= kTolerance)) throw ConstraintViolated("rows of Q are not orthonormal", r);
  }

  const Mat& mat() const { return q_; }
  Eigen::Index n() const { return q_.rows(); }
  Eigen::Index N() const { return q_.cols(); }

 private:
  Mat q_;
};

/// || X Q^T + Q X^T ||_F, zero for X tangent to V(n, N) at Q.
inline double tangency_residual(const Mat& q, const Mat& x) {
  const Mat c = x * q.transpose();
  return (c + c.transpose()).norm();
}

/// Tangent vector X at Q, checked on construction.
class TangentVec {
 public:
  static constexpr double kTolerance = 1e-10;

  TangentVec(const StiefelPoint& q, Mat x) : x_(std::move(x)) {
    if (x_.rows() != q.n() || x_.cols() != q.N())
      throw DimensionError("TangentVec shape does not match its base point");
    const double r = tangency_residual(q.mat(), x_);
    if (!(r <= kTolerance)) throw ConstraintViolated("X is not tangent at Q", r);
  }

  const Mat& mat() const { return x_; }

 private:
  Mat x_;
};

/// Skew control U representing the tangent class Q[U]; V ~ U iff Q V = Q U.
struct ControlRep {
  Mat q;
  SkewMatrix u;

  Mat tangent() const { return q * u.mat(); }
};

namespace detail {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Mat gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat a(rows, cols);
  // Fill row-major so the draw order does not depend on storage order.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = nd(rng);
  return a;
}

// Row-wise modified Gram-Schmidt with one re-orthogonalization pass.
inline Mat gram_schmidt_rows(Mat a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) a.row(i) -= a.row(i).dot(a.row(j)) * a.row(j);
    }
    const double nrm = a.row(i).norm();
    if (!(nrm > 1e-12)) throw RankDeficient("Gram-Schmidt: dependent rows");
    a.row(i) /= nrm;
  }
  return a;
}

}  // namespace detail

inline StiefelPoint random_point(Eigen::Index n, Eigen::Index N, std::mt19937_64& rng) {
  if (n < 1 || n > N) throw DimensionError("random_point requires 1 <= n <= N");
  return StiefelPoint(detail::gram_schmidt_rows(detail::gaussian(n, N, rng)));
}

/// Deterministic point of V(n, N) built from a seeded Gaussian matrix.
inline StiefelPoint random_point(Eigen::Index n, Eigen::Index N, std::uint64_t seed) {
  auto rng = detail::make_rng(seed);
  return random_point(n, N, rng);
}

inline SkewMatrix random_skew(Eigen::Index N, std::mt19937_64& rng) {
  return SkewMatrix(detail::gaussian(N, N, rng));
}

inline SymMatrix random_sym(Eigen::Index n, std::mt19937_64& rng) {
  return SymMatrix(detail::gaussian(n, n, rng));
}

/// Rows spanning the orthogonal complement of the row space of Q, as an
/// (N - n) x N matrix with orthonormal rows.
inline Mat orthogonal_complement(const Mat& q) {
  const Eigen::Index n = q.rows(), N = q.cols();
  Eigen::JacobiSVD<Mat> svd(q, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(N - n).transpose();
}

/// Random skew V with Q V = 0, i.e. a kernel element of U -> Q U.
inline SkewMatrix random_kernel_skew(const Mat& q, std::mt19937_64& rng) {
  const Mat c = orthogonal_complement(q);
  const SkewMatrix inner = random_skew(c.rows(), rng);
  return SkewMatrix(c.transpose() * inner.mat() * c);
}

/// <<W1, W2>> = trace(Lambda W1^T W2) = <W1 Lambda, W2>.
inline double metric_inner(const Mat& w1, const Mat& w2, const Metric& lambda) {
  if (w1.rows() != w2.rows() || w1.cols() != w2.cols() || w1.cols() != lambda.size())
    throw DimensionError("metric_inner: shape mismatch");
  return frob_inner(lambda.right(w1), w2);
}

/// 1/2 <<Qdot, Qdot>>
inline double kinetic_energy(const Mat& qdot, const Metric& lambda) {
  return 0.5 * metric_inner(qdot, qdot, lambda);
}

/// Polar projection (A A^T)^{-1/2} A onto V(n, N).
inline StiefelPoint reorthonormalize(const Mat& a) {
  if (a.rows() < 1 || a.rows() > a.cols())
    throw DimensionError("reorthonormalize requires 1 <= n <= N");
  Eigen::SelfAdjointEigenSolver<Mat> es(a * a.transpose());
  const Vec& ev = es.eigenvalues();
  // singular values of A are sqrt(ev)
  if (!(ev(0) > 1e-16)) throw RankDeficient("reorthonormalize: smallest singular value <= 1e-8");
  const Mat& v = es.eigenvectors();
  const Mat inv_sqrt = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return StiefelPoint(inv_sqrt * a);
}

/// X = Q U.
inline TangentVec tangent_from_control(const StiefelPoint& q, const SkewMatrix& u) {
  if (u.size() != q.N()) throw DimensionError("tangent_from_control: U must be N x N");
  return TangentVec(q, q.mat() * u.mat());
}

/// Random tangent vector Q U at Q.
inline Mat random_tangent(const Mat& q, std::mt19937_64& rng) {
  return q * random_skew(q.cols(), rng).mat();
}

}  // namespace stiefelflow
