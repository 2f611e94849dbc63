#pragma once

// Lax pencils of the two integrable limiting cases and drift tracking of
// their spectral invariants:
//   rigid body (n = N):  M + s Lambda^2
//   ellipsoid (n = 1):   M(s) = M + s Lambda + q q^T Delta / (s c),
//                        U(s) = U - s Lambda^{-1} / c,   c = q^T Lambda^{-1} q.

#include <complex>
#include <limits>
#include <vector>

#include "stiefelflow/flows.hpp"

namespace stiefelflow {

using Spectrum = std::vector<std::complex<double>>;

inline const std::vector<double>& default_pencil_params() {
  static const std::vector<double> v{-0.37, -0.1, 0.1, 0.37, 0.73};
  return v;
}

inline const std::vector<int>& default_powers() {
  static const std::vector<int> v{1, 2, 3, 4};
  return v;
}

inline Mat manakov_pencil(const SkewMatrix& m, const Metric& lambda, double pencil_param) {
  if (m.size() != lambda.size()) throw DimensionError("manakov_pencil: M must be N x N");
  return m.mat() + pencil_param * Mat(lambda.diag().cwiseAbs2().asDiagonal());
}

struct EllipsoidPencil {
  Mat m;
  Mat u;
};

inline EllipsoidPencil ellipsoid_pencil(const Vec& q, const Vec& p, const Metric& lambda,
                                        double pencil_param) {
  if (pencil_param == 0.0) throw ZeroPencilParam();
  const double r = std::abs(q.squaredNorm() - 1.0);
  if (!(r <= 1e-10)) throw ConstraintViolated("|q| != 1", r);
  const EllipsoidTerms t = ellipsoid_terms(q, p, lambda);
  const double s = pencil_param;
  EllipsoidPencil out;
  out.m = t.body.mat() + s * lambda.mat() + (q * q.transpose()) * (t.delta / (s * t.c));
  out.u = t.u.mat() - (s / t.c) * lambda.inv_mat();
  return out;
}

/// Pencil matrix at one parameter with its normalized power traces
/// tr(M^k) / (2k).
struct PencilSample {
  double pencil_param = 0.0;
  Mat matrix;
  std::vector<double> power_traces;
};

inline PencilSample make_pencil_sample(const Mat& matrix, double pencil_param,
                                       const std::vector<int>& powers = default_powers()) {
  if (powers.size() < 2) throw EmptySeries("pencil sample needs at least two powers");
  if (!matrix.allFinite()) throw Error("pencil matrix is not finite");
  PencilSample s{pencil_param, matrix, {}};
  int top = 0;
  for (int k : powers) top = std::max(top, k);
  std::vector<double> tr(static_cast<std::size_t>(top) + 1, 0.0);
  Mat pw = Mat::Identity(matrix.rows(), matrix.cols());
  for (int k = 1; k <= top; ++k) {
    pw = pw * matrix;
    tr[static_cast<std::size_t>(k)] = pw.trace() / (2.0 * k);
  }
  for (int k : powers) {
    if (k < 1) throw Error("powers must be positive");
    s.power_traces.push_back(tr[static_cast<std::size_t>(k)]);
  }
  return s;
}

struct InvariantDrift {
  double pencil_param = 0.0;
  std::size_t index = 0;  // position in the powers list
  double drift = 0.0;     // (max - min) / max(|mean|, 1e-30)
};

/// series[t][j] is the sample at time t for the j-th pencil parameter.
inline std::vector<InvariantDrift> invariant_drift(
    const std::vector<std::vector<PencilSample>>& series) {
  if (series.size() < 2) throw EmptySeries("invariant_drift needs at least two time samples");
  const auto& first = series.front();
  std::vector<InvariantDrift> out;
  for (std::size_t j = 0; j < first.size(); ++j) {
    for (std::size_t k = 0; k < first[j].power_traces.size(); ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      double sum = 0.0;
      for (const auto& row : series) {
        if (row.size() != first.size() || row[j].power_traces.size() != first[j].power_traces.size())
          throw DimensionError("invariant_drift: ragged series");
        const double v = row[j].power_traces[k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
      const double mean = sum / static_cast<double>(series.size());
      out.push_back({first[j].pencil_param, k, (hi - lo) / std::max(std::abs(mean), 1e-30)});
    }
  }
  return out;
}

inline Spectrum spectrum(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");
  const auto ev = es.eigenvalues();
  Spectrum s(ev.data(), ev.data() + ev.size());
  std::sort(s.begin(), s.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return s;
}

/// Largest distance between matched eigenvalues, divided by the spectral
/// radius of `reference`. Eigenvalues are matched greedily by nearest
/// distance, which is robust to reordering of complex pairs.
inline double spectral_drift(const Spectrum& reference, const Spectrum& current) {
  if (reference.size() != current.size()) throw DimensionError("spectral_drift: size mismatch");
  std::vector<bool> used(current.size(), false);
  double worst = 0.0;
  double radius = 0.0;
  for (const auto& z : reference) {
    radius = std::max(radius, std::abs(z));
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(current[i] - z);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst / std::max(radius, 1e-30);
}

}  // namespace stiefelflow
