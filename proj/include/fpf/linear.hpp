#pragma once

#include "fpf/pda.hpp"

namespace fpf {

// dX = A X dt + diag(process_noise) dB,  dZ^m = 1[A_t=m] H X dt + diag(observation_noise) dW^m.
// Unit noise scales give the exact textbook forms; other scales are handled
// by the same 1/sigma_W observation scaling the nonlinear stack uses.
struct LinearModel {
  Mat A;
  Mat H;
  Vec process_noise;
  Vec observation_noise;

  int dim() const { return static_cast<int>(A.rows()); }
  int obs_dim() const { return static_cast<int>(H.rows()); }
  // H in scaled observation coordinates.
  Mat scaled_H() const {
    return observation_noise.cwiseInverse().asDiagonal() * H;
  }
};

inline void validate(const LinearModel& lm) {
  require(lm.A.rows() >= 1 && lm.A.rows() == lm.A.cols(), "linear model: A must be square");
  require(lm.H.cols() == lm.A.rows(), "linear model: H column count mismatch");
  require(lm.H.rows() >= 1 && lm.H.cwiseAbs().maxCoeff() > 0.0,
          "linear model: H must be nonzero");
  require(static_cast<int>(lm.process_noise.size()) == lm.dim(),
          "linear model: process_noise size mismatch");
  require(static_cast<int>(lm.observation_noise.size()) == lm.obs_dim(),
          "linear model: observation_noise size mismatch");
  require(lm.observation_noise.minCoeff() > 0.0,
          "linear model: observation_noise must be > 0");
}

struct GaussianBelief {
  Vec mean;
  Mat cov;
};

inline void validate(const GaussianBelief& g) {
  const int d = static_cast<int>(g.mean.size());
  require(g.cov.rows() == d && g.cov.cols() == d, "gaussian belief: shape mismatch");
  require((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "gaussian belief: covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(g.cov);
  require(es.eigenvalues().minCoeff() >= -1e-10,
          "gaussian belief: covariance must be PSD");
}

// Exact gain in the linear Gaussian case: K = Sigma H'.
inline Mat kalman_gain_gaussian(const GaussianBelief& belief, const Mat& H) {
  validate(belief);
  require(H.cols() == belief.cov.rows(), "kalman gain: H shape mismatch");
  return belief.cov * H.transpose();
}

// Euler step of the exact conditional-moment ODEs under PDA:
//   d mu    = A mu dt + Sigma H'( sum_m B^m (dZ^m - H mu dt) )
//   dSigma/dt = A Sigma + Sigma A' + Q - sum_m (B^m)^2 Sigma H' H Sigma
// in scaled observation coordinates, Q = diag(process_noise^2). Sigma is
// symmetrized after the step.
inline GaussianBelief moment_oracle_step(const GaussianBelief& belief,
                                         const LinearModel& lm,
                                         const AssociationBelief& beta,
                                         const std::vector<Vec>& dz_all,
                                         double dt) {
  validate(belief);
  validate(lm);
  validate(beta);
  require(dt > 0.0, "moment oracle: dt must be > 0");
  require(static_cast<int>(dz_all.size()) == beta.M,
          "moment oracle: need one increment per observation");

  const Mat Hs = lm.scaled_H();
  const Vec inv = lm.observation_noise.cwiseInverse();

  Vec weighted = Vec::Zero(lm.obs_dim());  // sum_m B^m (dz~^m - Hs mu dt)
  double sumsq = 0.0;
  const Vec pred = Hs * belief.mean * dt;
  for (int m = 1; m <= beta.M; ++m) {
    weighted += beta.beta(m) * (dz_all[m - 1].cwiseProduct(inv) - pred);
    sumsq += sq(beta.beta(m));
  }

  const Mat Q = lm.process_noise.cwiseAbs2().asDiagonal();
  const Mat SH = belief.cov * Hs.transpose();

  GaussianBelief next;
  next.mean = belief.mean + lm.A * belief.mean * dt + SH * weighted;
  Mat dSigma = lm.A * belief.cov + belief.cov * lm.A.transpose() + Q -
               sumsq * SH * SH.transpose();
  next.cov = belief.cov + dSigma * dt;
  next.cov = 0.5 * (next.cov + next.cov.transpose());
  return next;
}

// Continuous-time PDAF in the reference stack: Kalman gain Sigma H', beta-
// weighted innovation mixing for the mean, and the exact covariance law. In
// this continuous-time setting that is precisely the moment-ODE step, so the
// two entry points share one implementation by construction.
inline GaussianBelief classical_pdaf_step(const GaussianBelief& belief,
                                          const LinearModel& lm,
                                          const AssociationBelief& beta,
                                          const std::vector<Vec>& dz_all,
                                          double dt) {
  return moment_oracle_step(belief, lm, beta, dz_all, dt);
}

// Linear PDA-FPF with moments replaced by their sample estimates:
//   X^i <- X^i + A X^i dt + noise
//          + Sigma_N H' sum_m B^m ( dZ^m - H [ (B^m/2) X^i + (1 - B^m/2) mu_N ] dt )
// using the N-1 denominator for Sigma_N, in scaled observation coordinates.
inline ParticleEnsemble linear_pda_fpf_step(const ParticleEnsemble& ens,
                                            const LinearModel& lm,
                                            const AssociationBelief& beta,
                                            const std::vector<Vec>& dz_all,
                                            double dt, const NoiseFn& noise) {
  validate(lm);
  validate(beta);
  require(ens.N() >= 2, "linear pda-fpf: need N >= 2");
  require(ens.dim() == lm.dim(), "linear pda-fpf: dimension mismatch");
  require(dt > 0.0, "linear pda-fpf: dt must be > 0");
  require(static_cast<int>(dz_all.size()) == beta.M,
          "linear pda-fpf: need one increment per observation");

  const int N = ens.N();
  const Vec mu = ens.states.colwise().mean().transpose();
  const Mat centered = ens.states.rowwise() - mu.transpose();
  const Mat Sigma = centered.transpose() * centered / static_cast<double>(N - 1);

  const Mat Hs = lm.scaled_H();
  const Vec inv = lm.observation_noise.cwiseInverse();
  const Mat K = Sigma * Hs.transpose();
  const double rt = std::sqrt(dt);

  std::vector<Vec> dz_scaled(beta.M);
  for (int m = 0; m < beta.M; ++m) dz_scaled[m] = dz_all[m].cwiseProduct(inv);

  ParticleEnsemble next;
  next.states.resize(N, ens.dim());
  const Vec hmu = Hs * mu;
  for (int i = 0; i < N; ++i) {
    const Vec x = ens.states.row(i).transpose();
    const Vec hx = Hs * x;
    Vec xn = x + lm.A * x * dt + rt * lm.process_noise.cwiseProduct(noise(i));
    for (int m = 1; m <= beta.M; ++m) {
      const double b = beta.beta(m);
      if (b == 0.0) continue;
      const Vec pred = 0.5 * b * hx + (1.0 - 0.5 * b) * hmu;
      xn += b * (K * (dz_scaled[m - 1] - pred * dt));
    }
    next.states.row(i) = xn.transpose();
  }
  return next;
}

// Association filter in the linear Gaussian case: the continuous filter with
// hhat = H mu. Callers supply H and dz in scaled (unit-noise) coordinates.
inline AssociationBelief linear_beta_step(const AssociationBelief& beta,
                                          const Vec& mu, const Mat& H,
                                          const std::vector<Vec>& dz_all,
                                          double q, double dt,
                                          BetaDiagnostics* diag = nullptr) {
  return beta_step_continuous(beta, H * mu, dz_all, q, dt, diag);
}

}  // namespace fpf
