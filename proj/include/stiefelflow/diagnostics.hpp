#pragma once

// Conservation monitors over trajectories, constraint residuals and
// numerical probes of the symplectic structure on W^0 and T*V(n, N).

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "stiefelflow/integrate.hpp"
#include "stiefelflow/laxspec.hpp"

namespace stiefelflow {

struct DriftReport {
  std::string name;
  std::vector<double> initial;
  double max_abs = 0.0;
  double max_rel = 0.0;
  double t_at_max = 0.0;
};

/// Which flow produced a trajectory, i.e. how to read (first, second).
enum class FlowKind {
  cotangent,         // (Q, S)
  extremal,          // (Q, P)
  rigid,             // (Q, M), n = N
  mclachlan_scovel,  // (Q, P0), n = N
  ellipsoid,         // (q, p) column vectors
  sphere,            // (q, qdot) column vectors
};

struct MonitorOptions {
  std::vector<double> pencil_params = default_pencil_params();
  std::vector<int> powers = default_powers();
};

namespace detail {

inline std::vector<double> flatten(const Mat& a) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) v.push_back(a(i, j));
  return v;
}

// Drift ||x(t) - x(0)||_F; relative drift divides by max(||x(0)||_F, floor).
inline DriftReport value_drift(std::string name, const std::vector<double>& t,
                               const std::vector<Mat>& x, double floor = 1e-30) {
  DriftReport r{std::move(name), flatten(x.front()), 0.0, 0.0, t.front()};
  const double scale = std::max(x.front().norm(), floor);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - x.front()).norm();
    if (d > r.max_abs) {
      r.max_abs = d;
      r.t_at_max = t[i];
    }
  }
  r.max_rel = r.max_abs / scale;
  return r;
}

// Largest value of a nonnegative residual; absolute and relative coincide.
inline DriftReport residual_drift(std::string name, const std::vector<double>& t,
                                  const std::vector<double>& res) {
  DriftReport r{std::move(name), {res.front()}, 0.0, 0.0, t.front()};
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i] > r.max_abs) {
      r.max_abs = res[i];
      r.t_at_max = t[i];
    }
  }
  r.max_rel = r.max_abs;
  return r;
}

inline DriftReport scalar_drift(std::string name, const std::vector<double>& t,
                                const std::vector<double>& v) {
  std::vector<Mat> x;
  x.reserve(v.size());
  for (double s : v) x.push_back(Mat::Constant(1, 1, s));
  return value_drift(std::move(name), t, x);
}

inline std::string param_tag(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", s);
  return buf;
}

inline void spectral_reports(std::vector<DriftReport>& out, const std::string& prefix,
                             const std::vector<double>& t, const std::vector<Mat>& pencils_by_time,
                             double param) {
  const Spectrum ref = spectrum(pencils_by_time.front());
  DriftReport r{prefix + "[" + param_tag(param) + "]", {}, 0.0, 0.0, t.front()};
  double radius = 0.0;
  for (const auto& z : ref) {
    r.initial.push_back(z.real());
    r.initial.push_back(z.imag());
    radius = std::max(radius, std::abs(z));
  }
  for (std::size_t i = 0; i < pencils_by_time.size(); ++i) {
    const double rel = spectral_drift(ref, spectrum(pencils_by_time[i]));
    if (rel * radius > r.max_abs) {
      r.max_abs = rel * radius;
      r.max_rel = rel;
      r.t_at_max = t[i];
    }
  }
  out.push_back(std::move(r));
}

}  // namespace detail

/// Conservation and constraint reports for a completed trajectory.
///
///   all flows       orthonormality residual ||Q Q^T - I||, kinetic energy
///   cotangent       tangency residual, spatial momentum S Q^T - Q S^T,
///                   body momentum when Lambda = I
///   extremal        P Q^T entrywise, k, m, body momentum when Lambda = I
///   rigid, MS       spatial momentum, spectra of M + s Lambda^2
///   ellipsoid       p.q, power traces of the pencil M(s)
///   sphere          q.qdot
inline std::vector<DriftReport> monitor_trajectory(const Trajectory& traj, const Metric& lambda,
                                                   FlowKind kind, const MonitorOptions& opts = {}) {
  if (traj.empty()) throw EmptyTrajectory();
  const auto& t = traj.t;
  const std::size_t T = traj.size();
  std::vector<DriftReport> out;
  std::vector<double> ortho(T), energy(T);
  const bool bi_invariant = lambda.is_identity();

  switch (kind) {
    case FlowKind::cotangent: {
      std::vector<double> tang(T);
      std::vector<Mat> m(T), body(T);
      for (std::size_t i = 0; i < T; ++i) {
        const Mat& q = traj.states[i].first;
        const Mat& s = traj.states[i].second;
        ortho[i] = orthonormality_residual(q);
        energy[i] = kinetic_energy(lambda.right_inv(s), lambda);
        tang[i] = cotangent_residual(q, s, lambda);
        m[i] = spatial_momentum(q, s).m.mat();
        body[i] = body_momentum(q, s).m.mat();
      }
      out.push_back(detail::residual_drift("orthonormality", t, ortho));
      out.push_back(detail::scalar_drift("energy", t, energy));
      out.push_back(detail::residual_drift("tangency", t, tang));
      out.push_back(detail::value_drift("spatial_momentum", t, m));
      if (bi_invariant) out.push_back(detail::value_drift("body_momentum", t, body));
      break;
    }
    case FlowKind::extremal: {
      std::vector<Mat> pq(T), k(T), m(T), body(T);
      for (std::size_t i = 0; i < T; ++i) {
        const Mat& q = traj.states[i].first;
        const Mat& p = traj.states[i].second;
        ortho[i] = orthonormality_residual(q);
        const ControlRep c = jq_solve(q, p, lambda);
        energy[i] = kinetic_energy(c.tangent(), lambda);
        pq[i] = p * q.transpose();
        k[i] = pq[i] + pq[i].transpose();
        m[i] = pq[i] - pq[i].transpose();
        body[i] = body_momentum(q, p).m.mat();
      }
      out.push_back(detail::residual_drift("orthonormality", t, ortho));
      out.push_back(detail::scalar_drift("energy", t, energy));
      {
        // entrywise maximum rather than Frobenius
        DriftReport r{"PQt_entrywise", detail::flatten(pq.front()), 0.0, 0.0, t.front()};
        for (std::size_t i = 0; i < T; ++i) {
          const double d = (pq[i] - pq.front()).cwiseAbs().maxCoeff();
          if (d > r.max_abs) {
            r.max_abs = d;
            r.t_at_max = t[i];
          }
        }
        r.max_rel = r.max_abs / std::max(pq.front().cwiseAbs().maxCoeff(), 1e-30);
        out.push_back(std::move(r));
      }
      out.push_back(detail::value_drift("k", t, k));
      out.push_back(detail::value_drift("spatial_momentum", t, m));
      if (bi_invariant) out.push_back(detail::value_drift("body_momentum", t, body));
      break;
    }
    case FlowKind::rigid:
    case FlowKind::mclachlan_scovel: {
      std::vector<Mat> m(T);
      std::vector<double> sres(T);
      std::vector<std::vector<Mat>> pencils(opts.pencil_params.size(), std::vector<Mat>(T));
      for (std::size_t i = 0; i < T; ++i) {
        const Mat& q = traj.states[i].first;
        Mat body;
        if (kind == FlowKind::rigid) {
          body = traj.states[i].second;
          sres[i] = (body + body.transpose()).norm();
        } else {
          body = q.transpose() * traj.states[i].second;
          sres[i] = ms_skew_residual(q, traj.states[i].second);
        }
        const SkewMatrix bm(body);
        ortho[i] = orthonormality_residual(q);
        const SkewMatrix u = solve_kxxk(lambda.mat(), bm);
        energy[i] = 0.5 * frob_inner(lambda.right(u.mat()), u.mat());
        m[i] = q * bm.mat() * q.transpose();
        for (std::size_t j = 0; j < opts.pencil_params.size(); ++j)
          pencils[j][i] = manakov_pencil(bm, lambda, opts.pencil_params[j]);
      }
      out.push_back(detail::residual_drift("orthonormality", t, ortho));
      out.push_back(detail::scalar_drift("energy", t, energy));
      out.push_back(detail::residual_drift("momentum_skewness", t, sres));
      out.push_back(detail::value_drift("spatial_momentum", t, m));
      for (std::size_t j = 0; j < opts.pencil_params.size(); ++j)
        detail::spectral_reports(out, "manakov_spectrum", t, pencils[j], opts.pencil_params[j]);
      break;
    }
    case FlowKind::ellipsoid: {
      std::vector<double> pq(T);
      std::vector<std::vector<std::vector<double>>> traces(
          opts.pencil_params.size(), std::vector<std::vector<double>>(opts.powers.size(),
                                                                      std::vector<double>(T)));
      for (std::size_t i = 0; i < T; ++i) {
        const Vec q = traj.states[i].first.col(0);
        const Vec p = traj.states[i].second.col(0);
        ortho[i] = std::abs(q.squaredNorm() - 1.0);
        const EllipsoidTerms et = ellipsoid_terms(q, p, lambda);
        const Mat qdot = (-et.u.mat() * q).transpose();
        energy[i] = kinetic_energy(qdot, lambda);
        pq[i] = p.dot(q);
        const Vec qn = q / q.norm();
        for (std::size_t j = 0; j < opts.pencil_params.size(); ++j) {
          const auto pen = ellipsoid_pencil(qn, p, lambda, opts.pencil_params[j]);
          const auto smp = make_pencil_sample(pen.m, opts.pencil_params[j], opts.powers);
          for (std::size_t k = 0; k < opts.powers.size(); ++k) traces[j][k][i] = smp.power_traces[k];
        }
      }
      out.push_back(detail::residual_drift("orthonormality", t, ortho));
      out.push_back(detail::scalar_drift("energy", t, energy));
      out.push_back(detail::scalar_drift("p_dot_q", t, pq));
      for (std::size_t j = 0; j < opts.pencil_params.size(); ++j)
        for (std::size_t k = 0; k < opts.powers.size(); ++k)
          out.push_back(detail::scalar_drift("pencil_trace[" + detail::param_tag(opts.pencil_params[j]) +
                                                 "][k=" + std::to_string(opts.powers[k]) + "]",
                                             t, traces[j][k]));
      break;
    }
    case FlowKind::sphere: {
      std::vector<double> tang(T);
      for (std::size_t i = 0; i < T; ++i) {
        const Vec q = traj.states[i].first.col(0);
        const Vec v = traj.states[i].second.col(0);
        ortho[i] = std::abs(q.squaredNorm() - 1.0);
        tang[i] = std::abs(q.dot(v));
        energy[i] = 0.5 * v.dot(lambda.diag().cwiseProduct(v));
      }
      out.push_back(detail::residual_drift("orthonormality", t, ortho));
      out.push_back(detail::scalar_drift("energy", t, energy));
      out.push_back(detail::residual_drift("tangency", t, tang));
      break;
    }
  }
  return out;
}

inline const DriftReport& find_report(const std::vector<DriftReport>& reports, const std::string& name) {
  for (const auto& r : reports)
    if (r.name == name) return r;
  throw Error("no drift report named " + name);
}

// ---- symplectic structure ---------------------------------------------

/// Omega(X1, X2) on W^0 at (Q, P0) for X_i = (Q U_i, P0 U_i + Q V_i):
/// <Q U1, P0 U2 + Q V2> - <Q U2, P0 U1 + Q V1>.
inline double symplectic_form_W(const Mat& q, const Mat& p0, const SkewMatrix& u1,
                                const SkewMatrix& v1, const SkewMatrix& u2, const SkewMatrix& v2) {
  check_pair_shape(q, p0, "symplectic_form_W");
  const double res = k_residual(q, p0);
  if (!(res <= 1e-10)) throw ConstraintViolated("symplectic_form_W requires (Q, P0) in W^0", res);
  const Mat qu1 = q * u1.mat(), qu2 = q * u2.mat();
  return frob_inner(qu1, p0 * u2.mat() + q * v2.mat()) - frob_inner(qu2, p0 * u1.mat() + q * v1.mat());
}

/// Canonical two-form on T*V(n, N) in the (Q, Mbar) trivialization:
/// <Q Z2, Q U1> - <Q Z1, Q U2> + <Mbar, U1 Q^T Q U2 - U2 Q^T Q U1>.
inline double symplectic_form_cotangent(const Mat& q, const SkewMatrix& mbar, const SkewMatrix& u1,
                                        const SkewMatrix& z1, const SkewMatrix& u2,
                                        const SkewMatrix& z2) {
  const Mat qtq = q.transpose() * q;
  const Mat qu1 = q * u1.mat(), qu2 = q * u2.mat();
  return frob_inner(q * z2.mat(), qu1) - frob_inner(q * z1.mat(), qu2) +
         frob_inner(mbar.mat(), u1.mat() * qtq * u2.mat() - u2.mat() * qtq * u1.mat());
}

/// Image under Phi of the W^0 tangent vector (Q U, P0 U + Q V): the
/// cotangent-side coordinates (U, Z) with Z = [Mbar, U] + V.
struct CotangentVector {
  SkewMatrix u;
  SkewMatrix z;
};

inline CotangentVector phi_pushforward(const SkewMatrix& mbar, const SkewMatrix& u,
                                       const SkewMatrix& v) {
  return {u, SkewMatrix(commutator(mbar.mat(), u.mat()) + v.mat())};
}

/// Largest |Omega(X1, X2)| / (|X1| |X2| + eps) over `samples` random X2 at
/// (Q, P0) in W^0. Positive values certify that X1 is not in the kernel.
inline double w_nondegeneracy_probe(const Mat& q, const Mat& p0, const SkewMatrix& u1,
                                    const SkewMatrix& v1, std::mt19937_64& rng,
                                    int samples = 200) {
  const Eigen::Index N = q.cols();
  const double n1 = std::hypot((q * u1.mat()).norm(), (p0 * u1.mat() + q * v1.mat()).norm());
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const SkewMatrix u2 = random_skew(N, rng), v2 = random_skew(N, rng);
    const double n2 = std::hypot((q * u2.mat()).norm(), (p0 * u2.mat() + q * v2.mat()).norm());
    const double w = symplectic_form_W(q, p0, u1, v1, u2, v2);
    best = std::max(best, std::abs(w) / (n1 * n2 + 1e-30));
  }
  return best;
}

/// max over `samples` random skew U of |<Q M, Q U>| / (||Q M|| ||Q U|| + 1e-30).
inline double pairing_probe(const Mat& q, const SkewMatrix& m, std::mt19937_64& rng,
                            int samples = 200) {
  if (m.size() != q.cols()) throw DimensionError("pairing_probe: M must be N x N");
  const Mat qm = q * m.mat();
  const double nm = qm.norm();
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Mat qu = q * random_skew(q.cols(), rng).mat();
    best = std::max(best, std::abs(frob_inner(qm, qu)) / (nm * qu.norm() + 1e-30));
  }
  return best;
}

inline double pairing_probe(const Mat& q, const SkewMatrix& m, std::uint64_t seed = 0) {
  auto rng = detail::make_rng(seed);
  return pairing_probe(q, m, rng);
}

/// (||P Q^T + Q P^T - k||_F, ||P Q^T - Q P^T - m||_F)
inline std::pair<double, double> wk_membership(const Mat& q, const Mat& p, const SymMatrix& k_ref,
                                               const SkewMatrix& m_ref) {
  check_pair_shape(q, p, "wk_membership");
  const Mat pq = p * q.transpose();
  return {(pq + pq.transpose() - k_ref.mat()).norm(), (pq - pq.transpose() - m_ref.mat()).norm()};
}

/// P = (k - m) Q / 2 + Q M. Lies on W^k for any skew M, and on W^k_m when
/// Q M Q^T = m.
inline Mat wk_point(const Mat& q, const SymMatrix& k, const SkewMatrix& m, const SkewMatrix& body) {
  return 0.5 * (k.mat() - m.mat()) * q + q * body.mat();
}

/// Flow Hamiltonian on T*V(n, N) at (Q, Mbar) with P0 = Q Mbar:
/// H = <P0, Q U*> - <<Q U*, Q U*>> / 2, U* the optimal control.
inline double flow_hamiltonian(const Mat& q, const SkewMatrix& mbar, const Metric& lambda) {
  const Mat p0 = q * mbar.mat();
  const Mat qu = jq_solve(q, p0, lambda).tangent();
  return frob_inner(p0, qu) - 0.5 * metric_inner(qu, qu, lambda);
}

/// Hamiltonian vector field in (U, Z) coordinates: U = U*, Z = [Mbar, U*] - A.
inline CotangentVector hamiltonian_vector(const Mat& q, const SkewMatrix& mbar,
                                          const Metric& lambda) {
  const ControlRep c = jq_solve(q, q * mbar.mat(), lambda);
  const Mat a = extremal_a_term(q, c.u, lambda);
  return phi_pushforward(mbar, c.u, SkewMatrix(-a));
}

}  // namespace stiefelflow
