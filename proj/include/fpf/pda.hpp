#pragma once

#include "fpf/filter.hpp"

namespace fpf {

// Posterior over the single-target association hypotheses. beta(0) is the
// all-clutter hypothesis, beta(m) for m in 1..M says observation m came from
// the target. Lives on the simplex.
struct AssociationBelief {
  Vec beta;  // length M + 1
  int M = 0;
};

inline void validate(const AssociationBelief& b) {
  require(b.M >= 1, "association belief: M must be >= 1");
  require(static_cast<int>(b.beta.size()) == b.M + 1,
          "association belief: beta must have length M + 1");
  require(b.beta.minCoeff() >= -1e-9 && b.beta.maxCoeff() <= 1.0 + 1e-9,
          "association belief: entries must lie in [0, 1]");
  require(std::abs(b.beta.sum() - 1.0) <= 1e-6,
          "association belief: probabilities must sum to 1");
}

inline AssociationBelief beta_init(int M) {
  require(M >= 1, "beta_init: M must be >= 1");
  AssociationBelief b;
  b.M = M;
  b.beta = Vec::Constant(M + 1, 1.0 / (M + 1));
  return b;
}

// Pre-clamp numbers from a belief update, for simplex-invariant testing.
// raw_sum should stay within O(dt^2) of 1 for the continuous filter and is
// exactly 1 for the discrete one.
struct BetaDiagnostics {
  double raw_sum = 0.0;
  double min_raw = 0.0;
  double max_raw = 0.0;
  bool underflow_fallback = false;
};

namespace pdadetail {

inline AssociationBelief clamp_normalize(int M, Vec raw, BetaDiagnostics* diag) {
  if (diag) {
    diag->raw_sum = raw.sum();
    diag->min_raw = raw.minCoeff();
    diag->max_raw = raw.maxCoeff();
  }
  raw = raw.cwiseMax(0.0).cwiseMin(1.0);
  const double total = raw.sum();
  if (total <= 0.0) {
    throw std::runtime_error("association belief collapsed: all hypotheses clamped to 0");
  }
  AssociationBelief out;
  out.M = M;
  out.beta = raw / total;
  return out;
}

}  // namespace pdadetail

// Euler step of the exact association-probability SDE, unit-noise convention
// (callers feed hhat and dz pre-scaled by 1/sigma_W):
//   dB^m = q[1-(M+1)B^m]dt + B^m hhat'(dZ^m - sum_j B^j dZ^j)
//          + B^m |hhat|^2 (sum_j (B^j)^2 - B^m) dt             m = 1..M
//   dB^0 = q[1-(M+1)B^0]dt - B^0 hhat' sum_j B^j dZ^j + B^0 |hhat|^2 sum_j (B^j)^2 dt
// The raw increments sum to zero analytically; clamping to the simplex only
// corrects the O(dt^2) Euler residue.
inline AssociationBelief beta_step_continuous(const AssociationBelief& belief,
                                              const Vec& hhat,
                                              const std::vector<Vec>& dz_all,
                                              double q, double dt,
                                              BetaDiagnostics* diag = nullptr) {
  validate(belief);
  require(dt > 0.0, "beta_step_continuous: dt must be > 0");
  require(q >= 0.0, "beta_step_continuous: q must be >= 0");
  const int M = belief.M;
  require(static_cast<int>(dz_all.size()) == M,
          "beta_step_continuous: need one increment per observation");
  for (const Vec& dz : dz_all) {
    require(dz.size() == hhat.size(),
            "beta_step_continuous: observation dimension mismatch");
  }

  const Vec& b = belief.beta;
  Vec mixed = Vec::Zero(hhat.size());  // sum_j B^j dZ^j
  double sumsq = 0.0;                  // sum_j (B^j)^2
  for (int j = 1; j <= M; ++j) {
    mixed += b(j) * dz_all[j - 1];
    sumsq += sq(b(j));
  }
  const double hh = hhat.squaredNorm();

  Vec raw(M + 1);
  raw(0) = b(0) + q * (1.0 - (M + 1) * b(0)) * dt - b(0) * hhat.dot(mixed) +
           b(0) * hh * sumsq * dt;
  for (int m = 1; m <= M; ++m) {
    raw(m) = b(m) + q * (1.0 - (M + 1) * b(m)) * dt +
             b(m) * hhat.dot(dz_all[m - 1] - mixed) +
             b(m) * hh * (sumsq - b(m)) * dt;
  }
  return pdadetail::clamp_normalize(M, raw, diag);
}

// Clutter spatial density assumed by the discrete-time association update.
// kGaussian matches the white-noise clutter increment model; kUniform models
// clutter uniform over a coverage region of the given volume, measured in
// 1/sigma_W-scaled observation-rate units.
struct ClutterDensity {
  enum class Kind { kGaussian, kUniform } kind = Kind::kGaussian;
  double volume = 1.0;  // kUniform only
};

namespace pdadetail {

// Bayes update of the association belief from precomputed observation rows.
// Works in log space with likelihood ratios against the all-clutter
// hypothesis, so the normalizing Gaussian constants cancel.
inline AssociationBelief beta_bayes_from(const AssociationBelief& prior,
                                         const Mat& H,  // N x s rows h(X^i)
                                         const ObservationModel& obs,
                                         const std::vector<Vec>& dz_all,
                                         double dt, const ClutterDensity& clutter,
                                         BetaDiagnostics* diag) {
  const int M = prior.M;
  const int N = static_cast<int>(H.rows());
  const int s = obs.dim_obs;

  double clutter_const = 0.0;
  if (clutter.kind == ClutterDensity::Kind::kUniform) {
    require(clutter.volume > 0.0, "discrete beta: uniform clutter volume must be > 0");
    // Ratio of the Gaussian normalizer to the uniform density 1/(V dt^s).
    clutter_const = std::log(clutter.volume) + s * std::log(dt) -
                    0.5 * s * std::log(2.0 * M_PI * dt);
  }

  std::vector<double> scores(M + 1);
  scores[0] = prior.beta(0) > 0.0 ? std::log(prior.beta(0))
                                  : -std::numeric_limits<double>::infinity();
  std::vector<double> expo(N);
  for (int m = 1; m <= M; ++m) {
    const Vec& dz = dz_all[m - 1];
    for (int i = 0; i < N; ++i) {
      const Vec r = increment_residual(obs, dz, H.row(i).transpose(), dt)
                        .cwiseQuotient(obs.noise_scale);
      expo[i] = -r.squaredNorm() / (2.0 * dt);
    }
    double ll = logsumexp(expo) - std::log(static_cast<double>(N));
    if (clutter.kind == ClutterDensity::Kind::kGaussian) {
      ll += dz.cwiseQuotient(obs.noise_scale).squaredNorm() / (2.0 * dt);
    } else {
      ll += clutter_const;
    }
    scores[m] = prior.beta(m) > 0.0 ? std::log(prior.beta(m)) + ll
                                    : -std::numeric_limits<double>::infinity();
  }

  const double norm = logsumexp(scores);
  if (!std::isfinite(norm)) {
    // Unreachable for finite inputs thanks to the log-domain ratios; kept as
    // a guarded fallback to the prior.
    if (diag) diag->underflow_fallback = true;
    AssociationBelief out = prior;
    return out;
  }
  Vec raw(M + 1);
  for (int m = 0; m <= M; ++m) raw(m) = std::exp(scores[m] - norm);
  if (diag) {
    diag->raw_sum = raw.sum();
    diag->min_raw = raw.minCoeff();
    diag->max_raw = raw.maxCoeff();
  }
  AssociationBelief out;
  out.M = M;
  out.beta = raw / raw.sum();  // pin the sum to 1 exactly
  return out;
}

}  // namespace pdadetail

// Discrete-time Bayes update: posterior ~ prior x likelihood, target
// likelihood the particle-averaged Gaussian transition density, clutter per
// the configured density. Measurement update only; the Markov-chain prior
// relaxation is composed by pda_fpf_step when this filter is selected there.
inline AssociationBelief beta_step_discrete(const AssociationBelief& belief,
                                            const ParticleEnsemble& ensemble,
                                            const ObservationModel& obs,
                                            const std::vector<Vec>& dz_all,
                                            double dt,
                                            const ClutterDensity& clutter,
                                            BetaDiagnostics* diag = nullptr) {
  validate(belief);
  require(dt > 0.0, "beta_step_discrete: dt must be > 0");
  require(ensemble.N() >= 1, "beta_step_discrete: empty ensemble");
  require(static_cast<int>(dz_all.size()) == belief.M,
          "beta_step_discrete: need one increment per observation");
  const Mat H = observe_all(ensemble, obs);
  return pdadetail::beta_bayes_from(belief, H, obs, dz_all, dt, clutter, diag);
}

enum class BetaFilterKind { kContinuous, kDiscrete };

struct PdaFpfState {
  ParticleEnsemble ensemble;
  AssociationBelief belief;
  double time = 0.0;
};

struct PdaConfig {
  BetaFilterKind beta_filter = BetaFilterKind::kContinuous;
  GainConfig gain;
  ClutterDensity clutter_density;  // discrete beta filter only
};

// One step of the PDA feedback particle filter:
//   X^i <- X^i + a dt + noise + sum_m B^m K dI^{i,m}
//   dI^{i,m} = dZ^m - [ (B^m/2) h(X^i) + (1 - B^m/2) hhat ] dt
// hhat, the gain, h(X^i), and the association weights are all pre-step
// values; the belief is advanced afterwards from the same pre-step ensemble.
// Only frame.observations is consumed, never frame.truth_assignment.
inline PdaFpfState pda_fpf_step(const PdaFpfState& state, const DynamicsModel& dyn,
                                const ObservationModel& obs,
                                const ObservationFrame& frame,
                                const PdaConfig& config, double q,
                                const NoiseFn& noise) {
  validate(state.belief);
  const int M = state.belief.M;
  require(static_cast<int>(frame.observations.size()) == M,
          "pda_fpf_step: frame observation count does not match belief");
  const ParticleEnsemble& ens = state.ensemble;
  require(ens.N() >= 2, "pda_fpf_step: need N >= 2");
  require(ens.dim() == dyn.dim_state, "pda_fpf_step: state dimension mismatch");
  const double dt = frame.time - state.time;
  require(dt > 0.0, "pda_fpf_step: frame time must be ahead of state time");

  const Mat H = observe_all(ens, obs);
  const Vec hhat = prediction_from_rows(H, obs);
  const GainApproximation gain =
      compute_gain_from(ens, obs, H, hhat, config.gain);
  const bool constant = gain.kind == GainMethod::kConstant;
  const Vec& b = state.belief.beta;
  const double rt = std::sqrt(dt);

  PdaFpfState next;
  next.time = state.time + dt;
  next.ensemble.states.resize(ens.N(), ens.dim());
  for (int i = 0; i < ens.N(); ++i) {
    const Vec x = ens.states.row(i).transpose();
    const Vec di = obs_diff(obs, H.row(i).transpose(), hhat);
    const Mat K = constant ? gain.constant_matrix : evaluate_gain(gain, x);
    Vec xn = x + dyn.drift(x) * dt + rt * dyn.diffusion_scale.cwiseProduct(noise(i));
    for (int m = 1; m <= M; ++m) {
      if (b(m) == 0.0) continue;
      const Vec pred = hhat + 0.5 * b(m) * di;
      const Vec residual =
          increment_residual(obs, frame.observations[m - 1], pred, dt)
              .cwiseQuotient(obs.noise_scale);
      xn += b(m) * (K * residual);
    }
    if (!all_finite(xn)) {
      throw std::runtime_error("pda_fpf_step: particle " + str(i) +
                               " became non-finite at t=" + str(state.time));
    }
    next.ensemble.states.row(i) = xn.transpose();
  }

  if (config.beta_filter == BetaFilterKind::kContinuous) {
    std::vector<Vec> dz_scaled(M);
    for (int m = 0; m < M; ++m) {
      dz_scaled[m] = frame.observations[m].cwiseQuotient(obs.noise_scale);
    }
    next.belief = beta_step_continuous(
        state.belief, hhat.cwiseQuotient(obs.noise_scale), dz_scaled, q, dt);
  } else {
    // Markov-chain relaxation toward uniform, then the Bayes update.
    Vec predicted = state.belief.beta;
    for (int m = 0; m <= M; ++m) {
      predicted(m) += q * (1.0 - (M + 1) * predicted(m)) * dt;
    }
    AssociationBelief prior;
    prior.M = M;
    predicted = predicted.cwiseMax(0.0).cwiseMin(1.0);
    prior.beta = predicted / predicted.sum();
    next.belief = pdadetail::beta_bayes_from(prior, H, obs, frame.observations,
                                             dt, config.clutter_density, nullptr);
  }
  return next;
}

}  // namespace fpf
