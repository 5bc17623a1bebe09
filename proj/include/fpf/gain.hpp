#pragma once

#include "fpf/model.hpp"

namespace fpf {

// Basis for the Galerkin gain solve. functions[l] is psi_l, gradients[l] its
// gradient; consistency of the two is the caller's contract (tests check by
// finite differences).
struct BasisSet {
  std::vector<std::function<double(const Vec&)>> functions;
  std::vector<std::function<Vec(const Vec&)>> gradients;

  int size() const { return static_cast<int>(functions.size()); }
};

inline BasisSet coordinate_basis(int d) {
  BasisSet basis;
  for (int k = 0; k < d; ++k) {
    basis.functions.push_back([k](const Vec& x) { return x(k); });
    basis.gradients.push_back([k, d](const Vec& x) {
      (void)x;
      Vec g = Vec::Zero(d);
      g(k) = 1.0;
      return g;
    });
  }
  return basis;
}

// Coordinates plus pairwise quadratics x_k*x_l (k <= l).
inline BasisSet quadratic_basis(int d) {
  BasisSet basis = coordinate_basis(d);
  for (int k = 0; k < d; ++k) {
    for (int l = k; l < d; ++l) {
      basis.functions.push_back([k, l](const Vec& x) { return x(k) * x(l); });
      basis.gradients.push_back([k, l, d](const Vec& x) {
        Vec g = Vec::Zero(d);
        g(k) += x(l);
        g(l) += x(k);
        return g;
      });
    }
  }
  return basis;
}

enum class GainMethod { kConstant, kGalerkin };

struct GainConfig {
  GainMethod method = GainMethod::kConstant;
  BasisSet basis;  // galerkin only; empty selects quadratic_basis(d)
};

// Evaluable gain matrix. Constant kind stores the d x s matrix directly;
// galerkin kind stores per-basis coefficient rows (L x s) and the basis.
struct GainApproximation {
  GainMethod kind = GainMethod::kConstant;
  Mat constant_matrix;
  Mat coefficients;
  BasisSet basis;
};

namespace gaindetail {

// Observation spread about hhat, angular-wrapped and scaled by 1/sigma_W.
// Filters and gain share this convention: the gain absorbs one factor of
// 1/sigma_W and the scaled innovation supplies the other, which realizes the
// unit-noise form the filter equations are derived in.
inline Mat centered_scaled(const Mat& H, const Vec& hhat,
                           const ObservationModel& obs) {
  Mat D(H.rows(), H.cols());
  for (int j = 0; j < obs.dim_obs; ++j) {
    const double inv = 1.0 / obs.noise_scale(j);
    if (obs.is_angular(j)) {
      for (int i = 0; i < H.rows(); ++i) {
        D(i, j) = wrap_angle(H(i, j) - hhat(j)) * inv;
      }
    } else {
      D.col(j) = (H.col(j).array() - hhat(j)) * inv;
    }
  }
  return D;
}

inline GainApproximation constant_from(const ParticleEnsemble& ens,
                                       const Mat& spread) {
  GainApproximation g;
  g.kind = GainMethod::kConstant;
  g.constant_matrix =
      ens.states.transpose() * spread / static_cast<double>(ens.N());
  return g;
}

inline GainApproximation galerkin_from(const ParticleEnsemble& ens,
                                       const Mat& spread, const BasisSet& basis) {
  const int N = ens.N();
  const int L = basis.size();
  require(L >= 1, "galerkin gain: empty basis");
  require(N >= L, "galerkin gain: need at least as many particles as basis functions");

  // A_kl = (1/N) sum_i grad psi_l . grad psi_k ; b_j^k = (1/N) sum_i spread_ij psi_k
  Mat A = Mat::Zero(L, L);
  Mat Psi(N, L);
  for (int i = 0; i < N; ++i) {
    const Vec x = ens.states.row(i).transpose();
    Mat G(L, ens.dim());
    for (int l = 0; l < L; ++l) {
      G.row(l) = basis.gradients[l](x).transpose();
      Psi(i, l) = basis.functions[l](x);
    }
    A += G * G.transpose();
  }
  A /= static_cast<double>(N);
  Mat B = Psi.transpose() * spread / static_cast<double>(N);

  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  double cond = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  if (cond > 1e12) {
    // Sampled Gram matrices go singular for degenerate ensembles; nudge the
    // spectrum and retry before giving up.
    const double lambda = 1e-8 * A.trace() / L;
    A += lambda * Mat::Identity(L, L);
    es.compute(A);
    lo = es.eigenvalues().minCoeff();
    hi = es.eigenvalues().maxCoeff();
    cond = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    if (cond > 1e12) {
      throw std::runtime_error(
          "galerkin gain: basis Gram matrix is singular even after "
          "regularization (condition estimate " +
          str(cond) + ")");
    }
  }

  GainApproximation g;
  g.kind = GainMethod::kGalerkin;
  g.coefficients = A.ldlt().solve(B);
  g.basis = basis;
  return g;
}

}  // namespace gaindetail

// Least-squares-optimal constant gain: column j is
// (1/N) sum_i X^i (h_j(X^i) - hhat_j), the ensemble form of Sigma H^T.
inline GainApproximation constant_gain(const ParticleEnsemble& ens,
                                       const ObservationModel& obs) {
  require(ens.N() >= 2, "constant gain: need N >= 2");
  const Mat H = observe_all(ens, obs);
  const Vec hhat = prediction_from_rows(H, obs);
  return gaindetail::constant_from(ens, gaindetail::centered_scaled(H, hhat, obs));
}

// Weak-form Galerkin solve of the gain BVP: A kappa_j = b_j per observation
// coordinate, both sides estimated as ensemble averages.
inline GainApproximation galerkin_gain(const ParticleEnsemble& ens,
                                       const ObservationModel& obs,
                                       const BasisSet& basis) {
  const Mat H = observe_all(ens, obs);
  const Vec hhat = prediction_from_rows(H, obs);
  return gaindetail::galerkin_from(ens, gaindetail::centered_scaled(H, hhat, obs),
                                   basis);
}

inline Mat evaluate_gain(const GainApproximation& gain, const Vec& x) {
  if (gain.kind == GainMethod::kConstant) return gain.constant_matrix;
  const int d = static_cast<int>(x.size());
  const int s = static_cast<int>(gain.coefficients.cols());
  Mat K = Mat::Zero(d, s);
  for (int l = 0; l < gain.basis.size(); ++l) {
    K += gain.basis.gradients[l](x) * gain.coefficients.row(l);
  }
  return K;
}

// Shared entry point for filter steps; reuses precomputed h rows and hhat.
inline GainApproximation compute_gain_from(const ParticleEnsemble& ens,
                                           const ObservationModel& obs,
                                           const Mat& H, const Vec& hhat,
                                           const GainConfig& config) {
  const Mat spread = gaindetail::centered_scaled(H, hhat, obs);
  if (config.method == GainMethod::kConstant) {
    return gaindetail::constant_from(ens, spread);
  }
  return gaindetail::galerkin_from(
      ens, spread, config.basis.size() ? config.basis : quadratic_basis(ens.dim()));
}

inline GainApproximation compute_gain(const ParticleEnsemble& ens,
                                      const ObservationModel& obs,
                                      const GainConfig& config) {
  const Mat H = observe_all(ens, obs);
  return compute_gain_from(ens, obs, H, prediction_from_rows(H, obs), config);
}

}  // namespace fpf
