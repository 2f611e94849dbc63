#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace stiefelflow;

namespace {

Rhs sphere_rhs(const Metric& lambda) {
  return [lambda](const Phase& y) {
    return Phase{y.second, sphere_variational_rhs(y.first.col(0), y.second.col(0), lambda)};
  };
}

Phase circle_start(Vec& q, Vec& v) {
  q = oracle::planar(0.0, 3);
  v = oracle::planar(M_PI / 2.0, 3);
  return {q, v};
}

double circle_error(double h, Method m = Method::rk4) {
  Vec q, v;
  const Phase y0 = circle_start(q, v);
  IntegratorOptions o;
  o.step = h;
  o.t_end = 1.0;
  o.method = m;
  const Trajectory t = integrate(sphere_rhs(Metric::identity(3)), y0, o);
  return (t.back().first.col(0) - oracle::great_circle(q, v, 1.0)).norm();
}

}  // namespace

TEST(Integrate, GreatCircleEndpoint) { EXPECT_LE(circle_error(1e-3), 1e-10); }

TEST(Integrate, Rk4ErrorRatioOnHalving) {
  const double e1 = circle_error(0.1), e2 = circle_error(0.05);
  EXPECT_GE(e1 / e2, 12.0);
  EXPECT_LE(e1 / e2, 20.0);
}

TEST(Integrate, SampleTimes) {
  Vec q, v;
  IntegratorOptions o;
  o.step = 0.3;
  o.t_end = 1.0;
  const Trajectory t = integrate(sphere_rhs(Metric::identity(3)), circle_start(q, v), o);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t.t.back(), 1.0);
  EXPECT_NEAR(t.t[3], 0.9, 1e-15);
  EXPECT_EQ(t.rhs_evaluations, 16u);
}

TEST(Integrate, AdaptiveMeetsTolerance) {
  const double e = circle_error(0.1, Method::rkf45);
  EXPECT_LE(e, 1e-8);
}

TEST(Integrate, AdaptiveStepUnderflow) {
  IntegratorOptions o;
  o.method = Method::rkf45;
  o.t_end = 2.0;
  o.step = 0.1;
  // y' = y^2 blows up at t = 1
  const Rhs f = [](const Phase& y) { return Phase{y.first.cwiseAbs2(), Mat::Zero(1, 1)}; };
  EXPECT_THROW(integrate(f, Phase{Mat::Ones(1, 1), Mat::Zero(1, 1)}, o), StepFailure);
}

TEST(Integrate, InvalidOptions) {
  IntegratorOptions o;
  o.step = 0.0;
  try {
    o.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "step");
  }
  o.step = 1.0;
  o.t_end = 0.5;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Integrate, CotangentProjectionRestoresConstraints) {
  std::mt19937_64 rng(41);
  const Metric lambda(Vec::LinSpaced(5, 1.0, 5.0));
  const Mat q = random_point(2, 5, rng).mat();
  const Mat s = lambda.right(q * random_skew(5, rng).mat());
  Phase y{q + 1e-4 * oracle::gaussian(2, 5, rng), s + 1e-4 * oracle::gaussian(2, 5, rng)};
  project_cotangent(y, lambda);
  EXPECT_LE(orthonormality_residual(y.first), 1e-14);
  EXPECT_LE(cotangent_residual(y.first, y.second, lambda), 1e-13);
}

TEST(Integrate, ProjectedGeodesicStaysOnManifold) {
  std::mt19937_64 rng(42);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  const Mat q = random_point(2, 4, rng).mat();
  const Mat s = lambda.right(q * random_skew(4, rng).mat());
  IntegratorOptions o;
  o.step = 0.05;
  o.t_end = 2.0;
  o.project = true;
  const Trajectory t =
      integrate([&](const Phase& y) { return geodesic_rhs(y.first, y.second, lambda); }, Phase{q, s}, o,
                cotangent_projector(lambda));
  for (const auto& y : t.states) EXPECT_LE(orthonormality_residual(y.first), 1e-13);
}
