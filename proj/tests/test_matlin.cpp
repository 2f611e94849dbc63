#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace stiefelflow;

namespace {

Mat random_spd(Eigen::Index n, std::mt19937_64& rng) {
  const Mat a = oracle::gaussian(n, n, rng);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

}  // namespace

TEST(Matlin, KxxkSymMatchesKronecker) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Mat k = random_spd(n, rng);
    const Mat r = oracle::sym(n, rng);
    const Mat x = solve_kxxk(k, SymMatrix(r)).mat();
    const Mat ref = oracle::kron_sylvester(k, r);
    EXPECT_LE((x - ref).norm() / ref.norm(), 1e-12);
    EXPECT_LE((x - x.transpose()).norm(), 1e-13 * x.norm());
  }
}

TEST(Matlin, KxxkSkewMatchesKronecker) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Mat k = random_spd(n, rng);
    const Mat r = oracle::skew(n, rng);
    const Mat x = solve_kxxk(k, SkewMatrix(r)).mat();
    if (n == 1) {
      EXPECT_EQ(x(0, 0), 0.0);
      continue;
    }
    const Mat ref = oracle::kron_sylvester(k, r);
    EXPECT_LE((x - ref).norm() / ref.norm(), 1e-12);
    EXPECT_LE((x + x.transpose()).norm(), 1e-13 * x.norm());
  }
}

TEST(Matlin, KxxkDiagonalExample) {
  Mat k = Mat::Zero(2, 2);
  k.diagonal() << 1.0, 3.0;
  Mat r(2, 2);
  r << 2.0, 4.0, 4.0, 6.0;
  const Mat x = solve_kxxk(k, SymMatrix(r)).mat();
  EXPECT_NEAR(x(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(x(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(x(1, 1), 1.0, 1e-15);
}

TEST(Matlin, KxxkRejectsIndefinite) {
  Mat k = Mat::Identity(2, 2);
  k(1, 1) = -1.0;
  EXPECT_THROW(solve_kxxk(k, SymMatrix(Mat::Identity(2, 2))), NotSPD);
}

TEST(Matlin, KxxkRejectsShapeMismatch) {
  EXPECT_THROW(solve_kxxk(Mat::Identity(2, 2), SymMatrix(Mat::Identity(3, 3))), DimensionError);
}

TEST(Matlin, WrappersProject) {
  Mat a(2, 2);
  a << 1, 2, 4, 3;
  EXPECT_DOUBLE_EQ(SymMatrix(a).mat()(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(SkewMatrix(a).mat()(0, 1), -1.0);
  EXPECT_THROW(SpdDiag(Vec::Constant(2, -1.0)), NotSPD);
  EXPECT_THROW(SymMatrix(Mat::Zero(2, 3)), DimensionError);
}

TEST(Matlin, ArcsinhHalfPlaneRotation) {
  Mat j(2, 2);
  j << 0, 1, -1, 0;
  const SkewMatrix y = skew_arcsinh_half(SkewMatrix(2.0 * std::sin(0.3) * j));
  EXPECT_LE((y.mat() - 0.3 * j).norm(), 1e-15);
  // sinh(t J) = sin(t) J, so M = 2 sinh(0.3) J maps to asin(sinh(0.3)) J, not 0.3 J
  const SkewMatrix y2 = skew_arcsinh_half(SkewMatrix(2.0 * std::sinh(0.3) * j));
  EXPECT_LE((y2.mat() - std::asin(std::sinh(0.3)) * j).norm(), 1e-15);
}

TEST(Matlin, ArcsinhHalfInvertsSinh) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    Mat m = oracle::skew(n, rng);
    m *= 1.8 / oracle::op_norm_power(m) * (0.2 + 0.8 * (trial % 7) / 6.0);
    const Mat y = skew_arcsinh_half(SkewMatrix(m)).mat();
    const Mat e = oracle::expm(y), ei = oracle::expm(-y);
    EXPECT_LE((e - ei - m).norm(), 1e-12);  // 2 sinh(Y) = M
    EXPECT_LT(op_norm(y), M_PI / 2.0);
  }
}

TEST(Matlin, ArcsinhHalfNormLimit) {
  Mat j(2, 2);
  j << 0, 2, -2, 0;
  EXPECT_THROW(skew_arcsinh_half(SkewMatrix(j)), NormTooLarge);
  EXPECT_THROW(skew_arcsinh_half(SkewMatrix(1.01 * j)), NormTooLarge);
}

TEST(Matlin, ExpmSkewMatchesPade) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Mat y = oracle::skew(n, rng);
    const Mat e = expm_skew(SkewMatrix(y));
    EXPECT_LE((e - oracle::expm(y)).norm(), 1e-12 * std::max(1.0, y.norm()));
    EXPECT_LE((e * e.transpose() - Mat::Identity(n, n)).norm(), 1e-13);
  }
}

TEST(Matlin, OpNormMatchesPowerIteration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat a = oracle::gaussian(3 + trial % 3, 5, rng);
    EXPECT_NEAR(op_norm(a), oracle::op_norm_power(a, 4000), 1e-8);
  }
}

TEST(Matlin, CommutatorAndInner) {
  std::mt19937_64 rng(14);
  const Mat a = oracle::gaussian(4, 4, rng), b = oracle::gaussian(4, 4, rng);
  EXPECT_NEAR(commutator(a, b).trace(), 0.0, 1e-12);
  EXPECT_NEAR(frob_inner(a, b), (a.transpose() * b).trace(), 1e-12);
}
