// Integrates the geodesic flow on the unit sphere (n = 1, N = 3, Lambda = I)
// and compares against the closed-form great circle.

#include <cmath>
#include <cstdio>

#include "stiefelflow/stiefelflow.hpp"

using namespace stiefelflow;

int main() {
  const Metric lambda = Metric::identity(3);
  Mat q0(1, 3), v0(1, 3);
  q0 << 1.0, 0.0, 0.0;
  v0 << 0.0, 0.6, 0.8;

  IntegratorOptions opts;
  opts.step = 1e-3;
  opts.t_end = 1.0;
  const Trajectory traj = integrate(
      [&](const Phase& y) { return geodesic_rhs(y.first, y.second, lambda); }, Phase{q0, v0}, opts);

  const Mat exact = std::cos(1.0) * q0 + std::sin(1.0) * v0;
  std::printf("endpoint error   %.3e\n", (traj.back().first - exact).norm());
  for (const auto& r : monitor_trajectory(traj, lambda, FlowKind::cotangent))
    std::printf("%-18s max drift %.3e\n", r.name.c_str(), r.max_abs);
  return 0;
}
