#pragma once

// Scenario presets: seeded initial data, the flow to integrate, per-sample
// CSV scalars and the invariant checks that decide the exit status.

#include <cmath>
#include <string>
#include <vector>

#include "stiefelflow/cli/config.hpp"
#include "stiefelflow/diagnostics.hpp"
#include "stiefelflow/discrete.hpp"

namespace stiefelflow::cli {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline Check make_check(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance};
}

struct RunCounts {
  std::size_t steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t rejected_steps = 0;
  std::size_t newton_iterations = 0;
  std::size_t newton_fallbacks = 0;
};

struct RunOutput {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<DriftReport> drifts;
  std::vector<Check> checks;
  RunCounts counts;
  Mat final_position;
  double final_time = 0.0;
};

/// Seeded initial state. Column-vector pairs for n = 1 presets, (Q, S) for
/// general_vp and discrete_mv, (Q, P) for general_oc, (Q, M) for rigid_body
/// and (Q, P0) for mclachlan_scovel.
inline Phase initial_state(const ScenarioConfig& c) {
  auto rng = stiefelflow::detail::make_rng(c.seed);
  const Metric lambda = c.metric();
  const Eigen::Index n = c.n, N = c.N;
  switch (c.scenario) {
    case Scenario::sphere: {
      const Vec q = random_point(1, N, rng).mat().row(0).transpose();
      Vec v = stiefelflow::detail::gaussian(N, 1, rng);
      v -= q * q.dot(v);
      return {q, v / v.norm()};
    }
    case Scenario::ellipsoid: {
      const Vec q = random_point(1, N, rng).mat().row(0).transpose();
      return {q, stiefelflow::detail::gaussian(N, 1, rng)};
    }
    case Scenario::rigid_body: {
      const Mat q = random_point(N, N, rng).mat();
      return {q, random_skew(N, rng).mat()};
    }
    case Scenario::mclachlan_scovel: {
      const Mat q = random_point(N, N, rng).mat();
      return {q, q * random_skew(N, rng).mat()};
    }
    case Scenario::general_vp:
    case Scenario::discrete_mv: {
      const Mat q = random_point(n, N, rng).mat();
      return {q, lambda.right(q * random_skew(N, rng).mat())};
    }
    case Scenario::general_oc: {
      const Mat q = random_point(n, N, rng).mat();
      return {q, stiefelflow::detail::gaussian(n, N, rng)};
    }
  }
  throw ConfigError("scenario", "unhandled scenario");
}

inline FlowKind flow_kind(Scenario s) {
  switch (s) {
    case Scenario::sphere: return FlowKind::sphere;
    case Scenario::ellipsoid: return FlowKind::ellipsoid;
    case Scenario::rigid_body: return FlowKind::rigid;
    case Scenario::mclachlan_scovel: return FlowKind::mclachlan_scovel;
    case Scenario::general_vp: return FlowKind::cotangent;
    case Scenario::general_oc: return FlowKind::extremal;
    case Scenario::discrete_mv: return FlowKind::cotangent;
  }
  return FlowKind::cotangent;
}

inline Rhs make_rhs(Scenario s, const Metric& lambda) {
  switch (s) {
    case Scenario::sphere:
      return [lambda](const Phase& y) {
        return Phase{y.second, sphere_variational_rhs(y.first.col(0), y.second.col(0), lambda)};
      };
    case Scenario::ellipsoid:
      return [lambda](const Phase& y) { return ellipsoid_rhs(y.first.col(0), y.second.col(0), lambda); };
    case Scenario::rigid_body:
      return [lambda](const Phase& y) { return rigid_body_rhs(y.first, y.second, lambda); };
    case Scenario::mclachlan_scovel:
      // Intermediate RK stages sit slightly off the invariant set.
      return [lambda](const Phase& y) { return mclachlan_scovel_rhs(y.first, y.second, lambda, 1e-6); };
    case Scenario::general_vp:
    case Scenario::discrete_mv:
      return [lambda](const Phase& y) { return geodesic_rhs(y.first, y.second, lambda); };
    case Scenario::general_oc:
      return [lambda](const Phase& y) { return oc_rhs(y.first, y.second, lambda); };
  }
  throw ConfigError("scenario", "unhandled scenario");
}

inline Projector make_projector(Scenario s, const Metric& lambda) {
  switch (s) {
    case Scenario::sphere: return unit_vector_projector(true);
    case Scenario::ellipsoid: return unit_vector_projector(false);
    case Scenario::rigid_body: return rigid_projector();
    case Scenario::general_vp:
    case Scenario::discrete_mv: return cotangent_projector(lambda);
    case Scenario::mclachlan_scovel:
    case Scenario::general_oc: return frame_projector();
  }
  return {};
}

namespace detail {

inline std::vector<std::string> matrix_columns(const std::string& stem, Eigen::Index rows, Eigen::Index cols,
                                               bool vector) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      out.push_back(vector ? stem + "_" + std::to_string(i) : stem + "_" + std::to_string(i) + "_" + std::to_string(j));
  return out;
}

inline void append_row_major(std::vector<double>& row, const Mat& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
}

inline std::pair<std::string, std::string> state_stems(Scenario s) {
  switch (s) {
    case Scenario::sphere: return {"q", "qdot"};
    case Scenario::ellipsoid: return {"q", "p"};
    case Scenario::rigid_body: return {"Q", "M"};
    case Scenario::mclachlan_scovel: return {"Q", "P0"};
    case Scenario::general_vp: return {"Q", "S"};
    case Scenario::general_oc: return {"Q", "P"};
    case Scenario::discrete_mv: return {"Q", ""};
  }
  return {"x", "y"};
}

inline std::string pencil_column(const char* stem, double s, int k) {
  return std::string(stem) + "[" + stiefelflow::detail::param_tag(s) + "][k=" + std::to_string(k) + "]";
}

// Per-sample monitored scalars, in column order.
inline std::vector<std::string> scalar_columns(const ScenarioConfig& c) {
  std::vector<std::string> cols{"energy", "orthonormality"};
  auto pencil = [&](const char* stem) {
    for (double s : c.lax_params)
      for (int k : c.powers) cols.push_back(pencil_column(stem, s, k));
  };
  switch (c.scenario) {
    case Scenario::sphere: cols.push_back("tangency"); break;
    case Scenario::ellipsoid:
      cols.push_back("p_dot_q");
      pencil("pencil_trace");
      break;
    case Scenario::rigid_body:
    case Scenario::mclachlan_scovel:
      cols.push_back("momentum_skewness");
      cols.push_back("spatial_momentum_norm");
      pencil("manakov_trace");
      break;
    case Scenario::general_vp:
      cols.push_back("tangency");
      cols.push_back("spatial_momentum_norm");
      break;
    case Scenario::general_oc:
      cols.push_back("k_norm");
      cols.push_back("spatial_momentum_norm");
      break;
    case Scenario::discrete_mv:
      cols.push_back("newton_residual");
      cols.push_back("spatial_momentum_norm");
      pencil("mv_trace");
      break;
  }
  return cols;
}

inline void append_traces(std::vector<double>& row, const Mat& pencil, double s, const std::vector<int>& powers) {
  for (double v : make_pencil_sample(pencil, s, powers).power_traces) row.push_back(v);
}

inline void append_scalars(std::vector<double>& row, const ScenarioConfig& c, const Metric& lambda,
                           const Phase& y) {
  switch (c.scenario) {
    case Scenario::sphere: {
      const Vec q = y.first.col(0), v = y.second.col(0);
      row.push_back(0.5 * v.dot(lambda.diag().cwiseProduct(v)));
      row.push_back(std::abs(q.squaredNorm() - 1.0));
      row.push_back(std::abs(q.dot(v)));
      break;
    }
    case Scenario::ellipsoid: {
      const Vec q = y.first.col(0), p = y.second.col(0);
      const EllipsoidTerms t = ellipsoid_terms(q, p, lambda);
      row.push_back(kinetic_energy(Mat((-t.u.mat() * q).transpose()), lambda));
      row.push_back(std::abs(q.squaredNorm() - 1.0));
      row.push_back(p.dot(q));
      for (double s : c.lax_params) append_traces(row, ellipsoid_pencil(q / q.norm(), p, lambda, s).m, s, c.powers);
      break;
    }
    case Scenario::rigid_body:
    case Scenario::mclachlan_scovel: {
      const Mat& q = y.first;
      const Mat body = c.scenario == Scenario::rigid_body ? y.second : Mat(q.transpose() * y.second);
      const SkewMatrix bm(body);
      const SkewMatrix u = solve_kxxk(lambda.mat(), bm);
      row.push_back(0.5 * frob_inner(lambda.right(u.mat()), u.mat()));
      row.push_back(orthonormality_residual(q));
      row.push_back((body + body.transpose()).norm());
      row.push_back((q * bm.mat() * q.transpose()).norm());
      for (double s : c.lax_params) append_traces(row, manakov_pencil(bm, lambda, s), s, c.powers);
      break;
    }
    case Scenario::general_vp: {
      const Mat& q = y.first;
      const Mat& s = y.second;
      row.push_back(kinetic_energy(lambda.right_inv(s), lambda));
      row.push_back(orthonormality_residual(q));
      row.push_back(cotangent_residual(q, s, lambda));
      row.push_back(spatial_momentum(q, s).m.mat().norm());
      break;
    }
    case Scenario::general_oc: {
      const Mat& q = y.first;
      const Mat& p = y.second;
      row.push_back(kinetic_energy(jq_solve(q, p, lambda).tangent(), lambda));
      row.push_back(orthonormality_residual(q));
      const Mat pq = p * q.transpose();
      row.push_back((pq + pq.transpose()).norm());
      row.push_back((pq - pq.transpose()).norm());
      break;
    }
    case Scenario::discrete_mv: break;  // rows are built by the discrete runner
  }
}

inline const DriftReport* maybe_report(const std::vector<DriftReport>& r, const std::string& name) {
  for (const auto& d : r)
    if (d.name == name) return &d;
  return nullptr;
}

inline std::vector<Check> continuous_checks(const ScenarioConfig& c, const std::vector<DriftReport>& drifts,
                                            const Phase& y0, const Phase& y_end, double t_end) {
  std::vector<Check> out;
  const bool proj = c.project;
  out.push_back(make_check("orthonormality", find_report(drifts, "orthonormality").max_abs, proj ? 1e-12 : 1e-8));
  out.push_back(make_check("energy_relative_drift", find_report(drifts, "energy").max_rel, 1e-8));
  for (const auto& d : drifts) {
    if (d.name == "tangency") out.push_back(make_check("tangency", d.max_abs, 1e-8));
    if (d.name == "spatial_momentum") out.push_back(make_check("spatial_momentum_drift", d.max_abs, 1e-8));
    if (d.name == "body_momentum") out.push_back(make_check("body_momentum_drift", d.max_abs, 1e-8));
    if (d.name == "PQt_entrywise") out.push_back(make_check("PQt_entrywise_drift", d.max_abs, 1e-8));
    if (d.name == "k") out.push_back(make_check("k_drift", d.max_abs, 1e-8));
    if (d.name == "p_dot_q") out.push_back(make_check("p_dot_q_drift", d.max_abs, 1e-8));
    if (d.name == "momentum_skewness")
      out.push_back(make_check("momentum_skewness", d.max_abs, c.scenario == Scenario::mclachlan_scovel ? 1e-9 : 1e-8));
    if (d.name.rfind("manakov_spectrum", 0) == 0) out.push_back(make_check(d.name + "_relative_drift", d.max_rel, 1e-7));
    if (d.name.rfind("pencil_trace", 0) == 0) out.push_back(make_check(d.name + "_relative_drift", d.max_rel, 1e-7));
  }
  if (c.scenario == Scenario::sphere && c.metric().is_identity()) {
    const Vec q0 = y0.first.col(0), v0 = y0.second.col(0);
    const double w = v0.norm();
    const Vec exact = std::cos(w * t_end) * q0 + std::sin(w * t_end) * v0 / w;
    out.push_back(make_check("great_circle_endpoint_error", (y_end.first.col(0) - exact).norm(), 1e-6));
  }
  return out;
}

}  // namespace detail

inline RunOutput run_continuous(const ScenarioConfig& c) {
  const Metric lambda = c.metric();
  const Phase y0 = initial_state(c);
  const Trajectory traj = integrate(make_rhs(c.scenario, lambda), y0, c.integrator(), make_projector(c.scenario, lambda));

  RunOutput out;
  const auto [s1, s2] = detail::state_stems(c.scenario);
  const bool vec = c.scenario == Scenario::sphere || c.scenario == Scenario::ellipsoid;
  out.columns.push_back("t");
  const Mat a = vec ? Mat(y0.first.transpose()) : y0.first;
  const Mat b = vec ? Mat(y0.second.transpose()) : y0.second;
  for (auto& s : detail::matrix_columns(s1, a.rows(), a.cols(), vec)) out.columns.push_back(s);
  for (auto& s : detail::matrix_columns(s2, b.rows(), b.cols(), vec)) out.columns.push_back(s);
  for (auto& s : detail::scalar_columns(c)) out.columns.push_back(s);

  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::vector<double> row{traj.t[i]};
    detail::append_row_major(row, traj.states[i].first);
    detail::append_row_major(row, traj.states[i].second);
    detail::append_scalars(row, c, lambda, traj.states[i]);
    out.rows.push_back(std::move(row));
  }

  MonitorOptions mo;
  mo.pencil_params = c.lax_params;
  mo.powers = c.powers;
  out.drifts = monitor_trajectory(traj, lambda, flow_kind(c.scenario), mo);
  out.checks = detail::continuous_checks(c, out.drifts, y0, traj.back(), traj.t.back());
  out.counts.steps = traj.size() - 1;
  out.counts.rhs_evaluations = traj.rhs_evaluations;
  out.counts.rejected_steps = traj.rejected_steps;
  out.final_position = traj.back().first;
  out.final_time = traj.t.back();
  return out;
}

/// Number of discrete steps so that Q_K sits at time K h closest to t_end.
inline std::size_t discrete_point_count(const ScenarioConfig& c) {
  return static_cast<std::size_t>(std::llround(c.t_end / c.step));
}

inline RunOutput run_discrete(const ScenarioConfig& c) {
  const Metric lambda = c.metric();
  const Phase y0 = initial_state(c);
  const double h = c.step;
  DiscretePair pair = mv_initialize(y0.first, y0.second, lambda, h);
  const std::size_t K = discrete_point_count(c);

  RunOutput out;
  out.columns.push_back("t");
  for (auto& s : detail::matrix_columns("Q", c.n, c.N, false)) out.columns.push_back(s);
  for (auto& s : detail::scalar_columns(c)) out.columns.push_back(s);

  std::vector<Spectrum> spec0;
  for (double s : c.lax_params) spec0.push_back(spectrum(mv_pencil(pair, lambda, s).l));

  std::vector<double> times, ortho, resid;
  std::vector<Mat> m_series;
  std::vector<double> spec_drift(c.lax_params.size(), 0.0), spec_t(c.lax_params.size(), 0.0);

  auto record = [&](const DiscretePair& p, double t, double newton_res) {
    const DiscreteMomenta mom = discrete_body_momentum(p, lambda);
    std::vector<double> row{t};
    detail::append_row_major(row, p.curr());
    const Mat qdot = (p.curr() - p.prev()) / h;
    row.push_back(kinetic_energy(qdot, lambda));
    row.push_back(orthonormality_residual(p.curr()));
    row.push_back(newton_res);
    row.push_back(mom.spatial.mat().norm());
    for (std::size_t j = 0; j < c.lax_params.size(); ++j) {
      const Mat l = mv_pencil(p, lambda, c.lax_params[j]).l;
      detail::append_traces(row, l, c.lax_params[j], c.powers);
      const double d = spectral_drift(spec0[j], spectrum(l));
      if (d > spec_drift[j]) {
        spec_drift[j] = d;
        spec_t[j] = t;
      }
    }
    out.rows.push_back(std::move(row));
    times.push_back(t);
    ortho.push_back(orthonormality_residual(p.curr()));
    resid.push_back(newton_res);
    m_series.push_back(mom.spatial.mat());
  };

  record(pair, h, 0.0);
  for (std::size_t k = 1; k < K; ++k) {
    MvStepResult r = [&] {
      try {
        return mv_step_detailed(pair, lambda);
      } catch (const NewtonDiverged& e) {
        throw NewtonDiverged(e.residual(), e.iterations(), static_cast<long>(k));
      }
    }();
    out.counts.newton_iterations += static_cast<std::size_t>(r.iterations);
    if (!r.from_seed) ++out.counts.newton_fallbacks;
    pair = std::move(r.pair);
    record(pair, static_cast<double>(k + 1) * h, r.residual);
  }

  out.drifts.push_back(stiefelflow::detail::residual_drift("orthonormality", times, ortho));
  out.drifts.push_back(stiefelflow::detail::residual_drift("newton_residual", times, resid));
  out.drifts.push_back(stiefelflow::detail::value_drift("spatial_momentum", times, m_series));
  for (std::size_t j = 0; j < c.lax_params.size(); ++j) {
    DriftReport r{"mv_spectrum[" + stiefelflow::detail::param_tag(c.lax_params[j]) + "]", {}, 0.0, spec_drift[j], spec_t[j]};
    const Spectrum& s0 = spec0[j];
    double radius = 0.0;
    for (const auto& z : s0) {
      r.initial.push_back(z.real());
      r.initial.push_back(z.imag());
      radius = std::max(radius, std::abs(z));
    }
    r.max_abs = spec_drift[j] * radius;
    out.drifts.push_back(std::move(r));
  }

  out.checks.push_back(make_check("newton_residual", find_report(out.drifts, "newton_residual").max_abs, 1e-11));
  out.checks.push_back(make_check("orthonormality", find_report(out.drifts, "orthonormality").max_abs, 1e-11));
  out.checks.push_back(make_check("spatial_momentum_drift", find_report(out.drifts, "spatial_momentum").max_abs, 1e-10));
  for (const auto& d : out.drifts)
    if (d.name.rfind("mv_spectrum", 0) == 0) out.checks.push_back(make_check(d.name + "_relative_drift", d.max_rel, 1e-9));

  out.counts.steps = K - 1;
  out.final_position = pair.curr();
  out.final_time = static_cast<double>(K) * h;
  return out;
}

inline RunOutput run_scenario(const ScenarioConfig& c) {
  validate(c);
  return c.scenario == Scenario::discrete_mv ? run_discrete(c) : run_continuous(c);
}

}  // namespace stiefelflow::cli
