#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace stiefelflow;

namespace {

DiscretePair random_pair(Eigen::Index n, Eigen::Index N, const Metric& lambda, double h, std::mt19937_64& rng) {
  const Mat q = random_point(n, N, rng).mat();
  const Mat s = lambda.right(q * random_skew(N, rng).mat());
  return mv_initialize(q, s, lambda, h);
}

}  // namespace

TEST(Discrete, CircleDoublesAngle) {
  const Metric lambda = Metric::identity(2);
  const double th = 0.2;
  Mat a(1, 2), b(1, 2);
  a << 1.0, 0.0;
  b << std::cos(th), std::sin(th);
  const MvStepResult r = mv_step_detailed(DiscretePair(a, b), lambda);
  EXPECT_NEAR(r.pair.curr()(0, 0), std::cos(2 * th), 1e-13);
  EXPECT_NEAR(r.pair.curr()(0, 1), std::sin(2 * th), 1e-13);
  EXPECT_NEAR(r.multiplier.mat()(0, 0), 2.0 * std::cos(th), 1e-13);
  EXPECT_TRUE(r.from_seed);
}

TEST(Discrete, RestPairStaysAtRestForIdentityMetric) {
  const Mat q = random_point(2, 4, 5).mat();
  const DiscretePair next = mv_step(DiscretePair(q, q), Metric::identity(4));
  EXPECT_LE((next.curr() - q).norm(), 1e-13);
}

TEST(Discrete, StepSolvesDiscreteEquation) {
  std::mt19937_64 rng(51);
  for (auto [n, N] : {std::pair{1, 3}, {2, 4}, {2, 5}, {3, 3}}) {
    const Metric lambda(Vec::LinSpaced(N, 1.0, static_cast<double>(N)));
    const DiscretePair pair = random_pair(n, N, lambda, 0.05, rng);
    const MvStepResult r = mv_step_detailed(pair, lambda);
    const Mat lhs = lambda.right(r.pair.curr()) + lambda.right(pair.prev());
    EXPECT_LE((lhs - r.multiplier.mat() * pair.curr()).norm(), 1e-12);
    EXPECT_LE(orthonormality_residual(r.pair.curr()), 1e-11);
    EXPECT_LE(r.residual, 1e-11);
    EXPECT_EQ(r.pair.prev(), pair.curr());
  }
}

TEST(Discrete, SpatialMomentumConserved) {
  std::mt19937_64 rng(52);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  DiscretePair pair = random_pair(2, 4, lambda, 0.05, rng);
  const Mat m0 = discrete_body_momentum(pair, lambda).spatial.mat();
  for (int k = 0; k < 50; ++k) pair = mv_step(pair, lambda);
  EXPECT_LE((discrete_body_momentum(pair, lambda).spatial.mat() - m0).norm(), 1e-10);
}

TEST(Discrete, MomentaAreRelated) {
  std::mt19937_64 rng(53);
  const Metric lambda(Vec::LinSpaced(5, 1.0, 5.0));
  const DiscretePair pair = random_pair(2, 5, lambda, 0.1, rng);
  const DiscreteMomenta mom = discrete_body_momentum(pair, lambda);
  const Mat& qp = pair.prev();
  const Mat& qc = pair.curr();
  EXPECT_LE((mom.body.mat() - (qp.transpose() * qc * lambda.mat() - lambda.mat() * qc.transpose() * qp)).norm(), 1e-13);
  EXPECT_LE((mom.spatial.mat() - (qc * lambda.mat() * qp.transpose() - qp * lambda.mat() * qc.transpose())).norm(),
            1e-13);
}

TEST(Discrete, MomentumUpdateMatchesSquareStep) {
  std::mt19937_64 rng(54);
  const Metric lambda(Vec::LinSpaced(3, 1.0, 2.0));
  const DiscretePair p0 = random_pair(3, 3, lambda, 0.1, rng);
  const DiscretePair p1 = mv_step(p0, lambda);
  const Mat u = p0.prev().transpose() * p0.curr();
  const SkewMatrix m0 = discrete_body_momentum(p0, lambda).body;
  const SkewMatrix m1 = discrete_body_momentum(p1, lambda).body;
  EXPECT_LE((mv_momentum_update(m0, u, lambda).mat() - m1.mat()).norm(), 1e-11);
}

TEST(Discrete, PencilFactorizationAndIsospectrality) {
  std::mt19937_64 rng(55);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  DiscretePair pair = random_pair(2, 4, lambda, 0.1, rng);
  for (double s : default_pencil_params()) EXPECT_LE(mv_factorization_residual(pair, lambda, s), 1e-13);
  std::vector<Spectrum> ref;
  for (double s : default_pencil_params()) ref.push_back(spectrum(mv_pencil(pair, lambda, s).l));
  for (int k = 0; k < 20; ++k) pair = mv_step(pair, lambda);
  for (std::size_t j = 0; j < ref.size(); ++j) {
    const double s = default_pencil_params()[j];
    EXPECT_LE(spectral_drift(ref[j], spectrum(mv_pencil(pair, lambda, s).l)), 1e-10);
  }
}

TEST(Discrete, PencilConjugationIdentity) {
  // L_{k+1}(s) C_k(s) = C_k(s) L_k(s)
  std::mt19937_64 rng(56);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  const DiscretePair p0 = random_pair(2, 4, lambda, 0.1, rng);
  const DiscretePair p1 = mv_step(p0, lambda);
  for (double s : default_pencil_params()) {
    const MvPencil a = mv_pencil(p0, lambda, s), b = mv_pencil(p1, lambda, s);
    EXPECT_LE((b.l * a.c - a.c * a.l).norm(), 1e-11 * a.l.norm());
  }
}

TEST(Discrete, InitializationLimits) {
  std::mt19937_64 rng(57);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  const Mat q = random_point(2, 4, rng).mat();
  const Mat s = lambda.right(q * random_skew(4, rng).mat());
  const Mat body = body_momentum(q, s).m.mat();
  const Mat spatial = spatial_momentum(q, s).m.mat();
  const Mat offset = commutator(q.transpose() * q, lambda.mat());
  double prev_b = 0.0, prev_s = 0.0;
  for (double h : {1e-3, 1e-4, 1e-5}) {
    const DiscreteMomenta mom = discrete_body_momentum(mv_initialize(q, s, lambda, h), lambda);
    const double eb = ((mom.body.mat() - offset) / h - body).norm();
    const double es = (mom.spatial.mat() / h - spatial).norm();
    if (prev_b > 0.0) {
      EXPECT_LT(eb, 0.2 * prev_b);
      EXPECT_LT(es, 0.2 * prev_s);
    }
    prev_b = eb;
    prev_s = es;
  }
  EXPECT_LT(prev_b, 1e-3 * body.norm());
  EXPECT_THROW(mv_initialize(q, s, lambda, 0.0), ConfigError);
}

TEST(Discrete, IdentityMetricShadowsGeodesic) {
  std::mt19937_64 rng(58);
  const Metric lambda = Metric::identity(4);
  const Mat q = random_point(2, 4, rng).mat();
  const Mat s = q * random_skew(4, rng).mat();
  IntegratorOptions o;
  o.t_end = 0.5;
  o.step = 1e-4;
  const Mat ref = integrate([&](const Phase& y) { return geodesic_rhs(y.first, y.second, lambda); }, Phase{q, s}, o)
                      .back()
                      .first;
  std::vector<double> err;
  for (double h : {0.01, 0.005}) {
    const auto steps = static_cast<std::size_t>(std::llround(0.5 / h));
    const DiscreteRun run = mv_run(mv_initialize(q, s, lambda, h), lambda, steps - 1);
    err.push_back((run.points.back() - ref).norm());
  }
  const double order = std::log2(err[0] / err[1]);
  EXPECT_NEAR(order, 2.0, 0.3);
}

TEST(Discrete, PairValidation) {
  EXPECT_THROW(DiscretePair(Mat::Ones(1, 2), Mat::Ones(1, 2)), ConstraintViolated);
  EXPECT_THROW(DiscretePair(random_point(1, 3, 1).mat(), random_point(2, 3, 1).mat()), DimensionError);
  const Mat q = random_point(2, 4, 1).mat();
  EXPECT_THROW(mv_step(DiscretePair(q, q), Metric::identity(3)), DimensionError);
}

TEST(Discrete, NewtonFailureIsReported) {
  // No fallback starts and a single iteration from a poor seed cannot converge.
  std::mt19937_64 rng(59);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  const DiscretePair pair = random_pair(2, 4, lambda, 0.5, rng);
  NewtonOptions o;
  o.max_iterations = 1;
  o.fallback_starts = 0;
  o.tolerance = 1e-300;
  EXPECT_THROW(mv_step(pair, lambda, o), NewtonDiverged);
}
