#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace stiefelflow;

namespace {

std::vector<PencilSample> samples_of(const Mat& a) {
  return {make_pencil_sample(a, 1.0, default_powers())};
}

}  // namespace

TEST(Laxspec, PowerTracesOfDiagonal) {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 1.0, 2.0;
  const PencilSample s = make_pencil_sample(a, 0.5, {1, 2, 3});
  ASSERT_EQ(s.power_traces.size(), 3u);
  EXPECT_DOUBLE_EQ(s.power_traces[0], 3.0 / 2.0);
  EXPECT_DOUBLE_EQ(s.power_traces[1], 5.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.power_traces[2], 9.0 / 6.0);
  EXPECT_THROW(make_pencil_sample(a, 0.5, {1}), EmptySeries);
}

TEST(Laxspec, ConstantSeriesHasZeroDrift) {
  std::mt19937_64 rng(61);
  const Mat a = oracle::gaussian(4, 4, rng);
  const auto d = invariant_drift({samples_of(a), samples_of(a), samples_of(a)});
  for (const auto& x : d) EXPECT_EQ(x.drift, 0.0);
}

TEST(Laxspec, ConjugatedSeriesHasZeroDrift) {
  std::mt19937_64 rng(62);
  const Mat a = oracle::gaussian(4, 4, rng);
  std::vector<std::vector<PencilSample>> series;
  for (int i = 0; i < 5; ++i) {
    const Mat g = oracle::gaussian(4, 4, rng) + 4.0 * Mat::Identity(4, 4);
    series.push_back(samples_of(g * a * g.inverse()));
  }
  for (const auto& x : invariant_drift(series)) EXPECT_LE(x.drift, 1e-12);
}

TEST(Laxspec, ScaledSeriesDrift) {
  const Mat a = Mat::Identity(3, 3);
  const auto d = invariant_drift({samples_of(a), samples_of(1.1 * a)});
  EXPECT_NEAR(d[0].drift, 0.1 / 1.05, 1e-12);
}

TEST(Laxspec, ShortSeriesRejected) {
  EXPECT_THROW(invariant_drift({samples_of(Mat::Identity(2, 2))}), EmptySeries);
  EXPECT_THROW(invariant_drift({}), EmptySeries);
}

TEST(Laxspec, SpectrumDriftOfPermutedSpectra) {
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 3.0, -1.0, 2.0;
  Mat b = Mat::Zero(3, 3);
  b.diagonal() << 2.0, 3.0, -1.0;
  EXPECT_EQ(spectral_drift(spectrum(a), spectrum(b)), 0.0);
  b(0, 0) = 2.03;
  EXPECT_NEAR(spectral_drift(spectrum(a), spectrum(b)), 0.01, 1e-14);
}

TEST(Laxspec, ManakovPencilIsospectralUnderRigidFlow) {
  std::mt19937_64 rng(63);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 2.0));
  const Mat q = random_point(4, 4, rng).mat();
  const Mat m = random_skew(4, rng).mat();
  const Phase d = rigid_body_rhs(q, m, lambda);
  for (double s : default_pencil_params()) {
    const Mat l = manakov_pencil(SkewMatrix(m), lambda, s);
    // dL/dt = [L, U + s Lambda] with U = J^{-1}(M)
    const Mat u = solve_kxxk(lambda.mat(), SkewMatrix(m)).mat() + s * lambda.mat();
    EXPECT_LE((d.second - commutator(l, u)).norm(), 1e-12 * std::max(1.0, l.norm() * u.norm()));
  }
}

TEST(Laxspec, EllipsoidPencilSatisfiesLaxEquation) {
  std::mt19937_64 rng(64);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  const Vec q = random_point(1, 4, rng).mat().row(0).transpose();
  const Vec p = oracle::gaussian(4, 1, rng);
  const double e = 1e-5;
  for (double s : default_pencil_params()) {
    const EllipsoidPencil l0 = ellipsoid_pencil(q, p, lambda, s);
    const Phase d = ellipsoid_rhs(q, p, lambda);
    auto at = [&](double t) {
      Vec qt = q + t * d.first.col(0);
      const Vec pt = p + t * d.second.col(0);
      qt /= qt.norm();
      return ellipsoid_pencil(qt, pt, lambda, s).m;
    };
    const Mat dl = (at(e) - at(-e)) / (2.0 * e);
    const Mat rhs = commutator(l0.m, l0.u);
    EXPECT_LE((dl - rhs).norm(), 1e-6 * std::max(1.0, rhs.norm()));
  }
}

TEST(Laxspec, EllipsoidPencilChecks) {
  const Metric lambda = Metric::identity(3);
  Vec q = Vec::Zero(3);
  q(0) = 1.0;
  EXPECT_THROW(ellipsoid_pencil(q, q, lambda, 0.0), ZeroPencilParam);
  EXPECT_THROW(ellipsoid_pencil(2.0 * q, q, lambda, 0.5), ConstraintViolated);
}

TEST(Laxspec, EllipsoidDeltaIsNonPositive) {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 50; ++trial) {
    const Metric lambda(oracle::positive_diag(5, rng));
    const Vec q = random_point(1, 5, rng).mat().row(0).transpose();
    const Vec p = oracle::gaussian(5, 1, rng);
    EXPECT_LE(ellipsoid_terms(q, p, lambda).delta, 1e-12);  // Cauchy-Schwarz in the L^{-1} inner product
  }
}
