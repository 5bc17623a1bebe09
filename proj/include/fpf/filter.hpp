#pragma once

#include "fpf/gain.hpp"

namespace fpf {

struct FpfState {
  ParticleEnsemble ensemble;
  double time = 0.0;
};

// One Euler step of the feedback particle filter, association-free:
//   X^i <- X^i + a(X^i)dt + sigma_B sqrt(dt) xi^i + K(X^i) dI^i
//   dI^i = dz - (1/2)(h(X^i) + hhat) dt, all in the 1/sigma_W-scaled
// observation convention. hhat, the gain, and the h(X^i) in the innovation
// are all read from the pre-step ensemble.
inline FpfState fpf_step(const FpfState& state, const DynamicsModel& dyn,
                         const ObservationModel& obs, const Vec& dz, double dt,
                         const GainConfig& gain_config, const NoiseFn& noise) {
  require(dt > 0.0, "fpf_step: dt must be > 0");
  require(static_cast<int>(dz.size()) == obs.dim_obs,
          "fpf_step: observation increment has wrong dimension");
  const ParticleEnsemble& ens = state.ensemble;
  require(ens.N() >= 2, "fpf_step: need N >= 2");
  require(ens.dim() == dyn.dim_state, "fpf_step: state dimension mismatch");

  const Mat H = observe_all(ens, obs);
  const Vec hhat = prediction_from_rows(H, obs);
  const GainApproximation gain = compute_gain_from(ens, obs, H, hhat, gain_config);
  const bool constant = gain.kind == GainMethod::kConstant;
  const double rt = std::sqrt(dt);

  FpfState next;
  next.time = state.time + dt;
  next.ensemble.states.resize(ens.N(), ens.dim());
  for (int i = 0; i < ens.N(); ++i) {
    const Vec x = ens.states.row(i).transpose();
    // Innovation prediction: hhat + (1/2)(h(X^i) - hhat), the difference
    // angle-wrapped so bearings blend on the short arc.
    const Vec pred = hhat + 0.5 * obs_diff(obs, H.row(i).transpose(), hhat);
    const Vec residual = increment_residual(obs, dz, pred, dt)
                             .cwiseQuotient(obs.noise_scale);
    const Mat K = constant ? gain.constant_matrix : evaluate_gain(gain, x);
    Vec xn = x + dyn.drift(x) * dt +
             rt * dyn.diffusion_scale.cwiseProduct(noise(i)) + K * residual;
    if (!all_finite(xn)) {
      throw std::runtime_error("fpf_step: particle " + str(i) +
                               " became non-finite at t=" + str(state.time));
    }
    next.ensemble.states.row(i) = xn.transpose();
  }
  return next;
}

}  // namespace fpf
