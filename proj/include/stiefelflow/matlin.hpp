#pragma once

// Dense matrix kernels: SPD eigendecomposition, the K X + X K = R solve,
// functions of skew-symmetric matrices and norms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stiefelflow/errors.hpp"

namespace stiefelflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symmetric matrix. Construction symmetrizes, (A + A^T) / 2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Mat& a) : m_(0.5 * (a + a.transpose())) {
    if (a.rows() != a.cols()) throw DimensionError("SymMatrix must be square");
  }
  static SymMatrix zero(Eigen::Index n) { return SymMatrix(Mat::Zero(n, n)); }

  const Mat& mat() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

 private:
  Mat m_;
};

/// Skew-symmetric matrix. Construction antisymmetrizes, (A - A^T) / 2.
class SkewMatrix {
 public:
  SkewMatrix() = default;
  explicit SkewMatrix(const Mat& a) : m_(0.5 * (a - a.transpose())) {
    if (a.rows() != a.cols()) throw DimensionError("SkewMatrix must be square");
  }
  static SkewMatrix zero(Eigen::Index n) { return SkewMatrix(Mat::Zero(n, n)); }

  const Mat& mat() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

  SkewMatrix operator+(const SkewMatrix& o) const { return SkewMatrix(m_ + o.m_); }
  SkewMatrix operator-(const SkewMatrix& o) const { return SkewMatrix(m_ - o.m_); }
  SkewMatrix operator*(double s) const { return SkewMatrix(s * m_); }

 private:
  Mat m_;
};

/// Positive diagonal matrix stored as its diagonal.
class SpdDiag {
 public:
  SpdDiag() = default;
  explicit SpdDiag(Vec diag) : d_(std::move(diag)) {
    if (d_.size() == 0) throw DimensionError("SpdDiag must be nonempty");
    for (Eigen::Index i = 0; i < d_.size(); ++i) {
      if (!(d_(i) > 0.0) || !std::isfinite(d_(i)))
        throw NotSPD("diagonal entry " + std::to_string(i) + " is not positive");
    }
  }

  const Vec& diag() const { return d_; }
  Eigen::Index size() const { return d_.size(); }
  Mat mat() const { return d_.asDiagonal(); }

 private:
  Vec d_;
};

struct SpdEigen {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a symmetric positive-definite matrix. Throws NotSPD
/// when the smallest eigenvalue is not above 1e-12 times the largest.
inline SpdEigen spd_eigen(const Mat& k) {
  if (k.rows() != k.cols()) throw DimensionError("spd_eigen: matrix must be square");
  const Mat sym = 0.5 * (k + k.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) throw NotSPD("spd_eigen: eigensolver failed");
  const Vec& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (!(ev(0) > 1e-12 * top) || !(top > 0.0))
    throw NotSPD("spd_eigen: smallest eigenvalue " + std::to_string(ev(0)) +
                 " is not positive relative to " + std::to_string(top));
  return {ev, es.eigenvectors()};
}

namespace detail {

// X = V [ (V^T R V)_ij / (l_i + l_j) ] V^T
inline Mat kxxk_eigenbasis(const SpdEigen& e, const Mat& r) {
  if (r.rows() != e.values.size() || r.cols() != e.values.size())
    throw DimensionError("solve_kxxk: shape mismatch");
  Mat rt = e.vectors.transpose() * r * e.vectors;
  const Eigen::Index n = rt.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) rt(i, j) /= (e.values(i) + e.values(j));
  return e.vectors * rt * e.vectors.transpose();
}

}  // namespace detail

/// Solves K X + X K = R for symmetric R; X is symmetric.
inline SymMatrix solve_kxxk(const SpdEigen& k, const SymMatrix& r) {
  return SymMatrix(detail::kxxk_eigenbasis(k, r.mat()));
}
/// Solves K X + X K = R for skew R; X is skew.
inline SkewMatrix solve_kxxk(const SpdEigen& k, const SkewMatrix& r) {
  return SkewMatrix(detail::kxxk_eigenbasis(k, r.mat()));
}
inline SymMatrix solve_kxxk(const Mat& k, const SymMatrix& r) {
  return solve_kxxk(spd_eigen(k), r);
}
inline SkewMatrix solve_kxxk(const Mat& k, const SkewMatrix& r) {
  return solve_kxxk(spd_eigen(k), r);
}

/// Largest singular value.
inline double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

namespace detail {

// Real block-Schur form of a skew matrix: M = Z T Z^T with T block diagonal,
// each 2x2 block of the form [[0, mu], [-mu, 0]] and 1x1 blocks zero.
struct SkewSchur {
  Mat z;
  std::vector<Eigen::Index> block_start;  // first index of each 2x2 block
  std::vector<double> angles;             // mu for each 2x2 block
};

inline SkewSchur skew_schur(const Mat& m) {
  const Eigen::Index n = m.rows();
  SkewSchur out;
  if (n == 0) {
    out.z = Mat(0, 0);
    return out;
  }
  const Mat skew = 0.5 * (m - m.transpose());
  Eigen::RealSchur<Mat> schur(skew);
  const Mat& t = schur.matrixT();
  out.z = schur.matrixU();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      out.block_start.push_back(i);
      out.angles.push_back(0.5 * (t(i, i + 1) - t(i + 1, i)));
      i += 2;
    } else {
      i += 1;
    }
  }
  return out;
}

template <class BlockFn, class ScalarFn>
Mat apply_blockwise(const SkewSchur& s, Eigen::Index n, BlockFn block, ScalarFn scalar) {
  Mat ft = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) ft(i, i) = scalar();
  for (std::size_t b = 0; b < s.block_start.size(); ++b) {
    const Eigen::Index i = s.block_start[b];
    ft.block(i, i, 2, 2) = block(s.angles[b]);
  }
  return s.z * ft * s.z.transpose();
}

}  // namespace detail

/// Principal skew Y with sinh(Y) = M / 2. Requires ||M||_op < 2.
inline SkewMatrix skew_arcsinh_half(const SkewMatrix& m) {
  const double nrm = op_norm(m.mat());
  if (!(nrm < 2.0)) throw NormTooLarge(nrm);
  const Eigen::Index n = m.size();
  const auto s = detail::skew_schur(m.mat());
  const Mat y = detail::apply_blockwise(
      s, n,
      [](double mu) {
        const double th = std::asin(std::clamp(0.5 * mu, -1.0, 1.0));
        Eigen::Matrix2d b;
        b << 0.0, th, -th, 0.0;
        return b;
      },
      [] { return 0.0; });
  return SkewMatrix(y);
}

/// Matrix exponential of a skew matrix; the result is in SO(N).
inline Mat expm_skew(const SkewMatrix& y) {
  const Eigen::Index n = y.size();
  const auto s = detail::skew_schur(y.mat());
  return detail::apply_blockwise(
      s, n,
      [](double mu) {
        Eigen::Matrix2d b;
        b << std::cos(mu), std::sin(mu), -std::sin(mu), std::cos(mu);
        return b;
      },
      [] { return 1.0; });
}

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

/// Frobenius inner product trace(A^T B).
inline double frob_inner(const Mat& a, const Mat& b) { return (a.array() * b.array()).sum(); }

}  // namespace stiefelflow
