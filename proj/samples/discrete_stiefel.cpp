// Discrete variational flow on V(2, 4): steps the implicit update, checks the
// discrete spatial momentum and the spectrum of the isospectral pencil.

#include <cstdio>

#include "stiefelflow/stiefelflow.hpp"

using namespace stiefelflow;

int main() {
  Vec d(4);
  d << 1.0, 2.0, 3.0, 4.0;
  const Metric lambda(d);
  auto rng = detail::make_rng(7);
  const Mat q = random_point(2, 4, rng).mat();
  const Mat s = lambda.right(q * random_skew(4, rng).mat());

  DiscretePair pair = mv_initialize(q, s, lambda, 0.01);
  const Mat m0 = discrete_body_momentum(pair, lambda).spatial.mat();
  const Spectrum spec0 = spectrum(mv_pencil(pair, lambda, 0.37).l);

  double m_drift = 0.0, spec_drift = 0.0, worst_residual = 0.0;
  for (int k = 0; k < 500; ++k) {
    const MvStepResult r = mv_step_detailed(pair, lambda);
    pair = r.pair;
    worst_residual = std::max(worst_residual, r.residual);
    m_drift = std::max(m_drift, (discrete_body_momentum(pair, lambda).spatial.mat() - m0).norm());
    spec_drift = std::max(spec_drift, spectral_drift(spec0, spectrum(mv_pencil(pair, lambda, 0.37).l)));
  }
  std::printf("worst Newton residual     %.3e\n", worst_residual);
  std::printf("spatial momentum drift    %.3e\n", m_drift);
  std::printf("pencil spectrum rel drift %.3e\n", spec_drift);
  return 0;
}
