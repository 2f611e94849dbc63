#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace stiefelflow;

namespace {

struct W0Point {
  Mat q;
  Mat p0;
  SkewMatrix mbar;
};

W0Point random_w0(Eigen::Index n, Eigen::Index N, std::mt19937_64& rng) {
  const Mat q = random_point(n, N, rng).mat();
  const Mat p0 = xi_reduce(q, oracle::gaussian(n, N, rng));
  return {q, p0, phi_to_cotangent(q, p0).m};
}

}  // namespace

TEST(Diagnostics, PullbackOfCanonicalForm) {
  std::mt19937_64 rng(71);
  for (auto [n, N] : {std::pair{1, 3}, {2, 4}, {2, 5}, {3, 3}}) {
    for (int trial = 0; trial < 25; ++trial) {
      const W0Point w = random_w0(n, N, rng);
      const SkewMatrix u1 = random_skew(N, rng), v1 = random_skew(N, rng);
      const SkewMatrix u2 = random_skew(N, rng), v2 = random_skew(N, rng);
      const double lhs = symplectic_form_W(w.q, w.p0, u1, v1, u2, v2);
      const CotangentVector x1 = phi_pushforward(w.mbar, u1, v1), x2 = phi_pushforward(w.mbar, u2, v2);
      const double rhs = symplectic_form_cotangent(w.q, w.mbar, x1.u, x1.z, x2.u, x2.z);
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(Diagnostics, FormsAreAntisymmetricAndBilinear) {
  std::mt19937_64 rng(72);
  const W0Point w = random_w0(2, 4, rng);
  const SkewMatrix u1 = random_skew(4, rng), v1 = random_skew(4, rng);
  const SkewMatrix u2 = random_skew(4, rng), v2 = random_skew(4, rng);
  const SkewMatrix u3 = random_skew(4, rng), v3 = random_skew(4, rng);
  const double a = symplectic_form_W(w.q, w.p0, u1, v1, u2, v2);
  EXPECT_NEAR(a, -symplectic_form_W(w.q, w.p0, u2, v2, u1, v1), 1e-12);
  EXPECT_NEAR(symplectic_form_W(w.q, w.p0, u1, v1, u1, v1), 0.0, 1e-12);
  const double sum = symplectic_form_W(w.q, w.p0, u1, v1, u2 + u3 * 2.0, v2 + v3 * 2.0);
  EXPECT_NEAR(sum, a + 2.0 * symplectic_form_W(w.q, w.p0, u1, v1, u3, v3), 1e-11);
  const double c = symplectic_form_cotangent(w.q, w.mbar, u1, v1, u2, v2);
  EXPECT_NEAR(c, -symplectic_form_cotangent(w.q, w.mbar, u2, v2, u1, v1), 1e-12);
}

TEST(Diagnostics, FormRequiresW0) {
  std::mt19937_64 rng(73);
  const Mat q = random_point(2, 4, rng).mat();
  const SkewMatrix u = random_skew(4, rng);
  EXPECT_THROW(symplectic_form_W(q, q, u, u, u, u), ConstraintViolated);
}

TEST(Diagnostics, FormIsNondegenerate) {
  std::mt19937_64 rng(74);
  const W0Point w = random_w0(2, 4, rng);
  for (int trial = 0; trial < 5; ++trial) {
    const SkewMatrix u = random_skew(4, rng), v = random_skew(4, rng);
    EXPECT_GT(w_nondegeneracy_probe(w.q, w.p0, u, v, rng), 1e-3);
  }
}

TEST(Diagnostics, PairingProbe) {
  std::mt19937_64 rng(75);
  const Mat q = random_point(2, 5, rng).mat();
  const Mat g = q.transpose() * q;
  EXPECT_GT(pairing_probe(q, random_skew(5, rng), 3), 1e-2);
  EXPECT_GT(pairing_probe(q, SkewMatrix(g * random_skew(5, rng).mat() * g), 3), 1e-2);
  // kernel directions pair to zero against everything
  const Mat qv = q * random_kernel_skew(q, rng).mat();
  EXPECT_LE(std::abs(frob_inner(qv, q * random_skew(5, rng).mat())), 1e-14);
}

TEST(Diagnostics, WkMembership) {
  std::mt19937_64 rng(76);
  const Mat q = random_point(2, 5, rng).mat();
  const SymMatrix k = random_sym(2, rng);
  const SkewMatrix body = random_skew(5, rng);
  const SkewMatrix m(q * body.mat() * q.transpose());
  const auto [rk, rm] = wk_membership(q, wk_point(q, k, m, body), k, m);
  EXPECT_LE(rk, 1e-13);
  EXPECT_LE(rm, 1e-13);
  const auto [rk2, rm2] = wk_membership(q, wk_point(q, k, random_skew(2, rng), body), k, m);
  EXPECT_LE(rk2, 1e-13);
  EXPECT_GT(rm2, 1e-3);
}

TEST(Diagnostics, HamiltonianVectorFieldIsCanonical) {
  // dH(X) = omega(X_H, X) along the curve Q exp(e U), Mbar + e Z.
  std::mt19937_64 rng(77);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  for (int trial = 0; trial < 5; ++trial) {
    const W0Point w = random_w0(2, 4, rng);
    const SkewMatrix u = random_skew(4, rng), z = random_skew(4, rng);
    auto h = [&](double e) {
      return flow_hamiltonian(w.q * oracle::expm(e * u.mat()), w.mbar + z * e, lambda);
    };
    const double e = 1e-3;
    const double d1 = (h(e) - h(-e)) / (2 * e), d2 = (h(e / 2) - h(-e / 2)) / e;
    const double dh = (4 * d2 - d1) / 3;
    const CotangentVector xh = hamiltonian_vector(w.q, w.mbar, lambda);
    const double om = symplectic_form_cotangent(w.q, w.mbar, xh.u, xh.z, u, z);
    EXPECT_NEAR(dh, om, 1e-7 * std::max(1.0, std::abs(om)));
  }
}

TEST(Diagnostics, MonitorDriftShrinksWithStep) {
  std::mt19937_64 rng(78);
  const Metric lambda(Vec::LinSpaced(4, 1.0, 4.0));
  const Mat q = random_point(2, 4, rng).mat();
  const Mat s = lambda.right(q * random_skew(4, rng).mat());
  auto energy_drift = [&](double h) {
    IntegratorOptions o;
    o.step = h;
    o.t_end = 2.0;
    const Trajectory t = integrate([&](const Phase& y) { return geodesic_rhs(y.first, y.second, lambda); },
                                   Phase{q, s}, o);
    const auto r = monitor_trajectory(t, lambda, FlowKind::cotangent);
    EXPECT_LE(find_report(r, "orthonormality").max_abs, 1e-4);
    return find_report(r, "energy").max_rel;
  };
  const double coarse = energy_drift(0.04), fine = energy_drift(0.02);
  EXPECT_GT(coarse, 4.0 * fine);
  EXPECT_THROW(monitor_trajectory(Trajectory{}, lambda, FlowKind::cotangent), EmptyTrajectory);
}

TEST(Diagnostics, BodyMomentumReportOnlyForIdentityMetric) {
  std::mt19937_64 rng(79);
  const Mat q = random_point(2, 4, rng).mat();
  const Mat s = q * random_skew(4, rng).mat();
  IntegratorOptions o;
  o.step = 0.01;
  o.t_end = 0.1;
  for (bool identity : {true, false}) {
    const Metric lambda = identity ? Metric::identity(4) : Metric(Vec::LinSpaced(4, 1.0, 4.0));
    const Trajectory t =
        integrate([&](const Phase& y) { return geodesic_rhs(y.first, y.second, lambda); }, Phase{q, lambda.right(s)}, o);
    const auto r = monitor_trajectory(t, lambda, FlowKind::cotangent);
    if (identity) {
      EXPECT_LE(find_report(r, "body_momentum").max_rel, 1e-10);
    } else {
      EXPECT_THROW(find_report(r, "body_momentum"), Error);
    }
  }
}
