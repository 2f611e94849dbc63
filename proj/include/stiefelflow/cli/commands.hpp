#pragma once

// The run, check and sweep subcommands.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "stiefelflow/cli/report.hpp"

namespace stiefelflow::cli {

namespace fs = std::filesystem;

struct CommandOptions {
  fs::path out_dir;
  bool quiet = false;
};

inline void write_wallclock(const fs::path& path, double seconds) {
  std::ofstream f(path);
  f << format_double(seconds) << '\n';
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void print_checks(std::ostream& os, const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    os << (c.pass ? "  ok    " : "  FAIL  ") << c.name << " = " << format_double(c.value) << " (bound "
       << c.tolerance << ")\n";
  }
}

/// Integrates the configured scenario, writes <scenario>.csv and
/// <scenario>.json and returns 0 iff every check passes.
inline int command_run(const ScenarioConfig& cfg, const CommandOptions& opts) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutput out = run_scenario(cfg);
  const double wall = seconds_since(t0);
  fs::create_directories(opts.out_dir);
  const std::string stem = to_string(cfg.scenario);
  write_csv(opts.out_dir / (stem + ".csv"), out);
  write_json(opts.out_dir / (stem + ".json"), run_report_json(cfg, out));
  write_wallclock(opts.out_dir / (stem + ".wallclock"), wall);
  const bool ok = all_pass(out.checks);
  if (!opts.quiet) {
    std::cout << stem << ": " << out.counts.steps << " steps, " << out.rows.size() << " samples, " << wall
              << " s wall clock\n";
    print_checks(std::cout, out.checks);
    std::cout << (ok ? "all checks passed\n" : "some checks failed\n");
  }
  return ok ? 0 : 1;
}

// ---- static identity suite ------------------------------------------------

namespace detail {

/// Dense solve of K X + X K = R through (I (x) K + K^T (x) I) vec(X) = vec(R).
inline Mat kron_solve(const Mat& k, const Mat& r) {
  const Eigen::Index n = k.rows();
  Mat big = Mat::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    big.block(j * n, j * n, n, n) += k;
    for (Eigen::Index i = 0; i < n; ++i) big.block(j * n, i * n, n, n) += k(i, j) * Mat::Identity(n, n);
  }
  const Vec x = big.partialPivLu().solve(Eigen::Map<const Vec>(r.data(), r.size()));
  return Eigen::Map<const Mat>(x.data(), n, n);
}

inline Check make_lower_check(std::string name, double value, double lower) {
  return {std::move(name), value, lower, std::isfinite(value) && value >= lower};
}

inline double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

// Central difference of f at 0 along one direction, Richardson-extrapolated
// from steps e and e/2.
template <class F>
double richardson_derivative(F f, double e) {
  const double d1 = (f(e) - f(-e)) / (2.0 * e);
  const double d2 = (f(0.5 * e) - f(-0.5 * e)) / e;
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace detail

/// Algebraic identities evaluated on seeded random instances at the configured
/// (n, N, Lambda). No time integration.
inline std::vector<Check> identity_suite(const ScenarioConfig& cfg, int samples = 20) {
  auto rng = stiefelflow::detail::make_rng(cfg.seed);
  const Metric lambda = cfg.metric();
  const Eigen::Index n = cfg.n, N = cfg.N;
  double kx_sym = 0, kx_skew = 0, jq_tan = 0, jq_mom = 0, m_round = 0, m_inv_round = 0, phi_round = 0,
         xi_idem = 0, mbar_cross = 0, pullback = 0, hamilton = 0, rigid_mom = 0, rigid_orth = 0, a_zero = 0,
         mv_fact = 0, mv_update = 0, mv_spatial = 0, ell_a = 0;
  double probe = std::numeric_limits<double>::infinity();

  for (int s = 0; s < samples; ++s) {
    const Mat q = random_point(n, N, rng).mat();
    const GramFactor gram(q, lambda);

    const SymMatrix rs = random_sym(n, rng);
    kx_sym = std::max(kx_sym, detail::rel(solve_kxxk(gram.eigen(), rs).mat(), detail::kron_solve(gram.k(), rs.mat())));
    const SkewMatrix rk = random_skew(n, rng);
    kx_skew = std::max(kx_skew, detail::rel(solve_kxxk(gram.eigen(), rk).mat(), detail::kron_solve(gram.k(), rk.mat())));

    const SkewMatrix u = random_skew(N, rng);
    const Mat s_tan = lambda.right(q * u.mat());
    const ControlRep back = jq_solve(q, s_tan, lambda, gram);
    jq_tan = std::max(jq_tan, detail::rel(back.tangent(), q * u.mat()));
    jq_mom = std::max(jq_mom, detail::rel(jq_apply(q, back.u, lambda).m.mat(), jq_apply(q, u, lambda).m.mat()));

    const Mat p0 = map_S_to_P0(q, s_tan, lambda);
    m_round = std::max(m_round, detail::rel(map_P0_to_S(q, p0, lambda), s_tan));
    const SkewMatrix mb = random_skew(N, rng);
    const Mat p0b = phi_inverse(q, MBar{mb});
    m_inv_round = std::max(m_inv_round, detail::rel(map_S_to_P0(q, map_P0_to_S(q, p0b, lambda), lambda), p0b));
    phi_round = std::max(phi_round, detail::rel(phi_inverse(q, phi_to_cotangent(q, p0b)), p0b));
    const Mat p = stiefelflow::detail::gaussian(n, N, rng);
    xi_idem = std::max(xi_idem, detail::rel(xi_reduce(q, xi_reduce(q, p)), xi_reduce(q, p)));
    mbar_cross = std::max(mbar_cross, detail::rel(phi_to_cotangent(q, p0).m.mat(), mbar_from_cotangent(q, s_tan).m.mat()));

    const MBar mbar = phi_to_cotangent(q, p0b);
    const SkewMatrix u1 = random_skew(N, rng), v1 = random_skew(N, rng);
    const SkewMatrix u2 = random_skew(N, rng), v2 = random_skew(N, rng);
    const auto x1 = phi_pushforward(mbar.m, u1, v1), x2 = phi_pushforward(mbar.m, u2, v2);
    pullback = std::max(pullback, std::abs(symplectic_form_W(q, p0b, u1, v1, u2, v2) -
                                           symplectic_form_cotangent(q, mbar.m, x1.u, x1.z, x2.u, x2.z)));

    const auto xh = hamiltonian_vector(q, mbar.m, lambda);
    const double dh = detail::richardson_derivative(
        [&](double e) {
          return flow_hamiltonian(q * expm_skew(u2 * e), SkewMatrix(mbar.m.mat() + e * v2.mat()), lambda);
        },
        1e-3);
    const double w = symplectic_form_cotangent(q, mbar.m, xh.u, xh.z, u2, v2);
    hamilton = std::max(hamilton, std::abs(dh - w) / std::max(1.0, std::abs(w)));

    probe = std::min(probe, pairing_probe(q, SkewMatrix(q.transpose() * q * random_skew(N, rng).mat() * q.transpose() * q), rng));

    const Mat qs = random_point(N, N, rng).mat();
    SkewMatrix mr = random_skew(N, rng);
    mr = mr * (1.8 / op_norm(mr.mat()));
    const Mat pr = reconstruct_P_rigid(qs, mr);
    rigid_mom = std::max(rigid_mom, (qs.transpose() * pr - pr.transpose() * qs - mr.mat()).norm());
    rigid_orth = std::max(rigid_orth, orthonormality_residual(pr));
    a_zero = std::max(a_zero, extremal_a_term(qs, random_skew(N, rng), lambda).norm());

    const DiscretePair pair = mv_initialize(q, lambda.right(q * random_skew(N, rng).mat()) * 0.1, lambda, 0.1);
    mv_fact = std::max(mv_fact, mv_factorization_residual(pair, lambda, 0.37));
    const MvStepResult step = mv_step_detailed(pair, lambda);
    const DiscreteMomenta m0 = discrete_body_momentum(pair, lambda);
    const DiscreteMomenta m1 = discrete_body_momentum(step.pair, lambda);
    const Mat uk = pair.prev().transpose() * pair.curr();
    mv_update = std::max(mv_update, detail::rel(mv_momentum_update(m0.body, uk, lambda).mat(), m1.body.mat()));
    mv_spatial = std::max(mv_spatial, (m1.spatial.mat() - m0.spatial.mat()).norm());

    const Vec eq = random_point(1, N, rng).mat().row(0).transpose();
    const Vec ep = stiefelflow::detail::gaussian(N, 1, rng);
    const EllipsoidTerms et = ellipsoid_terms(eq, ep, lambda);
    const Mat ulu = et.u.mat() * lambda.left(et.u.mat());
    ell_a = std::max(ell_a, detail::rel(et.a, commutator(eq * eq.transpose(), ulu)));
  }

  return {
      make_check("kxxk_symmetric_vs_dense", kx_sym, 1e-12),
      make_check("kxxk_skew_vs_dense", kx_skew, 1e-12),
      make_check("jq_solve_tangent_roundtrip", jq_tan, 1e-11),
      make_check("jq_solve_momentum_roundtrip", jq_mom, 1e-11),
      make_check("variational_to_costate_roundtrip", m_round, 1e-11),
      make_check("costate_to_variational_roundtrip", m_inv_round, 1e-11),
      make_check("cotangent_map_roundtrip", phi_round, 1e-11),
      make_check("costate_shift_idempotent", xi_idem, 1e-11),
      make_check("mbar_cross_formula", mbar_cross, 1e-11),
      make_check("symplectic_pullback", pullback, 1e-10),
      make_check("hamiltonian_vector_field", hamilton, 1e-9),
      detail::make_lower_check("pairing_nondegeneracy_lower_bound", probe, 1e-6),
      make_check("rigid_reconstruction_momentum", rigid_mom, 1e-9),
      make_check("rigid_reconstruction_orthogonality", rigid_orth, 1e-11),
      make_check("square_frame_a_term_zero", a_zero, 1e-13),
      make_check("mv_pencil_factorization", mv_fact, 1e-11),
      make_check("mv_momentum_update", mv_update, 1e-12),
      make_check("mv_spatial_momentum_step", mv_spatial, 1e-10),
      make_check("ellipsoid_a_formula", ell_a, 1e-12),
  };
}

inline int command_check(const ScenarioConfig& cfg, const CommandOptions& opts) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Check> checks = identity_suite(cfg);
  const double wall = seconds_since(t0);
  Json j;
  j["config"] = to_json(cfg);
  j["drifts"] = Json::array();
  j["checks"] = checks_json(checks);
  Json timing;
  timing["identity_samples"] = 20;
  j["timing"] = timing;
  fs::create_directories(opts.out_dir);
  write_json(opts.out_dir / "check.json", j);
  write_wallclock(opts.out_dir / "check.wallclock", wall);
  const bool ok = all_pass(checks);
  if (!opts.quiet) {
    print_checks(std::cout, checks);
    std::cout << (ok ? "all identities hold\n" : "some identities failed\n");
  }
  return ok ? 0 : 1;
}

// ---- sweep ---------------------------------------------------------------

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

inline GridAxis parse_grid_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("grid", "expected KEY=v1,v2,..., got '" + text + "'");
  GridAxis a{detail::trim(text.substr(0, eq)), detail::split(text.substr(eq + 1), ',')};
  if (a.key.empty()) throw ConfigError("grid", "missing key in '" + text + "'");
  if (a.values.empty()) throw ConfigError("grid", "no values for '" + a.key + "'");
  return a;
}

/// Cartesian product of the axes, first axis varying slowest.
inline std::vector<std::vector<std::pair<std::string, std::string>>> grid_points(const std::vector<GridAxis>& axes) {
  if (axes.empty()) throw ConfigError("grid", "parameter grid is empty");
  std::vector<std::vector<std::pair<std::string, std::string>>> pts{{}};
  for (const auto& ax : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& p : pts)
      for (const auto& v : ax.values) {
        auto q = p;
        q.emplace_back(ax.key, v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

/// Endpoint error of a run against an independent reference:
///   sphere with Lambda = I   analytic great circle,
///   discrete_mv              continuous geodesic, RK4 at h / 100,
///   otherwise                the same flow under RK4 at h / 8.
inline double endpoint_error(const ScenarioConfig& cfg, const RunOutput& out) {
  const Metric lambda = cfg.metric();
  const Phase y0 = initial_state(cfg);
  if (cfg.scenario == Scenario::sphere && lambda.is_identity()) {
    const Vec q0 = y0.first.col(0), v0 = y0.second.col(0);
    const double w = v0.norm(), t = out.final_time;
    const Vec exact = std::cos(w * t) * q0 + std::sin(w * t) * v0 / w;
    return (out.final_position.col(0) - exact).norm();
  }
  IntegratorOptions ref;
  ref.method = Method::rk4;
  ref.t_end = out.final_time;
  const Scenario flow = cfg.scenario == Scenario::discrete_mv ? Scenario::general_vp : cfg.scenario;
  ref.step = cfg.scenario == Scenario::discrete_mv ? cfg.step / 100.0 : cfg.step / 8.0;
  const Trajectory t = integrate(make_rhs(flow, lambda), y0, ref);
  return (out.final_position - t.back().first).norm();
}

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> overrides;
  ScenarioConfig config;
  bool ok = false;
  std::string error;
  RunOutput output;
  double endpoint_error = 0.0;
};

inline double expected_order(const ScenarioConfig& c) {
  if (c.scenario == Scenario::discrete_mv) return 2.0;
  return c.method == Method::rk4 ? 4.0 : 0.0;
}

/// Runs every grid point (concurrently), writes per-point files under
/// <out>/sweep and an aggregate sweep.json. When the grid varies only the
/// step, order estimates log(e1 / e2) / log(h1 / h2) between consecutive
/// step sizes are reported and checked against the nominal order +- 0.3.
inline int command_sweep(const ScenarioConfig& base, const std::vector<std::string>& grid_specs,
                         const CommandOptions& opts) {
  std::vector<GridAxis> axes;
  for (const auto& s : grid_specs) axes.push_back(parse_grid_axis(s));
  const auto pts = grid_points(axes);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<SweepPoint> points(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    points[i].index = i;
    points[i].overrides = pts[i];
    points[i].config = base;
    for (const auto& [k, v] : pts[i]) apply_setting(points[i].config, k, v);
    validate(points[i].config);
  }

  std::vector<std::future<void>> tasks;
  for (auto& p : points) {
    tasks.push_back(std::async(std::launch::async, [&p] {
      try {
        p.output = run_scenario(p.config);
        p.endpoint_error = endpoint_error(p.config, p.output);
        p.ok = true;
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }));
  }
  for (auto& t : tasks) t.get();
  const double wall = seconds_since(t0);

  const fs::path dir = opts.out_dir / "sweep";
  fs::create_directories(dir);
  Json jpoints = Json::array(), jdrifts = Json::array(), failed = Json::array();
  std::vector<Check> checks;
  RunCounts total;
  for (const auto& p : points) {
    Json jp;
    jp["index"] = p.index;
    Json ov;
    for (const auto& [k, v] : p.overrides) ov[k] = v;
    jp["overrides"] = ov;
    jp["ok"] = p.ok;
    if (!p.ok) {
      jp["error"] = p.error;
      failed.push_back(p.index);
    } else {
      const std::string stem = "point_" + std::to_string(p.index);
      write_csv(dir / (stem + ".csv"), p.output);
      write_json(dir / (stem + ".json"), run_report_json(p.config, p.output));
      jp["endpoint_error"] = p.endpoint_error;
      jp["all_checks_pass"] = all_pass(p.output.checks);
      for (const auto& c : p.output.checks) {
        Check cc = c;
        cc.name = stem + "." + c.name;
        checks.push_back(cc);
      }
      Json jd;
      jd["index"] = p.index;
      Json arr = Json::array();
      for (const auto& d : p.output.drifts) arr.push_back(to_json(d));
      jd["drifts"] = arr;
      jdrifts.push_back(jd);
      total.steps += p.output.counts.steps;
      total.rhs_evaluations += p.output.counts.rhs_evaluations;
      total.rejected_steps += p.output.counts.rejected_steps;
      total.newton_iterations += p.output.counts.newton_iterations;
      total.newton_fallbacks += p.output.counts.newton_fallbacks;
    }
    jpoints.push_back(jp);
  }

  Json orders = Json::array();
  const bool step_only = axes.size() == 1 && axes[0].key == "step";
  if (step_only && failed.empty()) {
    std::vector<const SweepPoint*> sorted;
    for (const auto& p : points) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->config.step > b->config.step; });
    const double nominal = expected_order(base);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const auto* a = sorted[i];
      const auto* b = sorted[i + 1];
      const double ord = std::log(a->endpoint_error / b->endpoint_error) / std::log(a->config.step / b->config.step);
      Json jo;
      jo["h_coarse"] = a->config.step;
      jo["h_fine"] = b->config.step;
      jo["order"] = ord;
      orders.push_back(jo);
      if (nominal > 0.0)
        checks.push_back(make_check("order[" + stiefelflow::detail::param_tag(a->config.step) + "->" +
                                        stiefelflow::detail::param_tag(b->config.step) + "]_deviation_from_" +
                                        stiefelflow::detail::param_tag(nominal),
                                    std::abs(ord - nominal), 0.3));
    }
  }

  Json j;
  j["config"] = to_json(base);
  Json jg = Json::array();
  for (const auto& ax : axes) {
    Json a;
    a["key"] = ax.key;
    a["values"] = ax.values;
    jg.push_back(a);
  }
  j["grid"] = jg;
  j["points"] = jpoints;
  j["orders"] = orders;
  j["failed"] = failed;
  j["drifts"] = jdrifts;
  j["checks"] = checks_json(checks);
  j["timing"] = to_json(total);
  write_json(opts.out_dir / "sweep.json", j);
  write_wallclock(opts.out_dir / "sweep.wallclock", wall);

  const bool ok = failed.empty() && all_pass(checks);
  if (!opts.quiet) {
    for (const auto& p : points) {
      std::cout << "point " << p.index << ":";
      for (const auto& [k, v] : p.overrides) std::cout << ' ' << k << '=' << v;
      if (p.ok)
        std::cout << "  endpoint error " << format_double(p.endpoint_error) << '\n';
      else
        std::cout << "  FAILED: " << p.error << '\n';
    }
    for (const auto& o : orders)
      std::cout << "order " << o["h_coarse"].get<double>() << " -> " << o["h_fine"].get<double>() << ": "
                << o["order"].get<double>() << '\n';
    print_checks(std::cout, checks);
    std::cout << wall << " s wall clock\n";
  }
  return ok ? 0 : 1;
}

}  // namespace stiefelflow::cli
