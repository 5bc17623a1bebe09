#pragma once

#include "fpf/pda.hpp"

#include <algorithm>

namespace fpf {

// Posterior over full observation-to-target assignments: pi(g) is the
// probability that slot m holds target perms[g][m] for every m. Support is
// exactly the M! permutations, enumerated in lexicographic order.
struct JointBelief {
  Vec pi;
  int M = 0;
  std::vector<std::vector<int>> perms;
};

inline JointBelief joint_init(int M) {
  require(M >= 1, "joint_init: M must be >= 1");
  require(M <= 8, "joint_init: exact permutation table capped at M = 8");
  JointBelief j;
  j.M = M;
  std::vector<int> p(M);
  for (int m = 0; m < M; ++m) p[m] = m;
  do {
    j.perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  j.pi = Vec::Constant(static_cast<int>(j.perms.size()),
                       1.0 / static_cast<double>(j.perms.size()));
  return j;
}

inline void validate(const JointBelief& j) {
  require(j.M >= 1, "joint belief: M must be >= 1");
  require(j.pi.size() == static_cast<Eigen::Index>(j.perms.size()),
          "joint belief: pi / permutation table size mismatch");
  std::size_t fact = 1;
  for (int m = 2; m <= j.M; ++m) fact *= m;
  require(j.perms.size() == fact, "joint belief: permutation support incomplete");
  require(j.pi.minCoeff() >= -1e-9 && j.pi.maxCoeff() <= 1.0 + 1e-9,
          "joint belief: entries must lie in [0, 1]");
  require(std::abs(j.pi.sum() - 1.0) <= 1e-6, "joint belief: must sum to 1");
}

struct PiDiagnostics {
  double raw_sum = 0.0;
  double min_raw = 0.0;
  double max_raw = 0.0;
};

namespace jpdadetail {

inline JointBelief clamp_normalize(const JointBelief& like, Vec raw,
                                   PiDiagnostics* diag) {
  if (diag) {
    diag->raw_sum = raw.sum();
    diag->min_raw = raw.minCoeff();
    diag->max_raw = raw.maxCoeff();
  }
  raw = raw.cwiseMax(0.0).cwiseMin(1.0);
  const double total = raw.sum();
  if (total <= 0.0) {
    throw std::runtime_error("joint belief collapsed: all permutations clamped to 0");
  }
  JointBelief out = like;
  out.pi = raw / total;
  return out;
}

// Observation-space difference a - b with optional wrap/scale convention.
inline Vec diff(const Vec& a, const Vec& b, const ObservationModel* obs) {
  if (!obs) return a - b;
  return obs_diff(*obs, a, b).cwiseQuotient(obs->noise_scale);
}

inline Vec residual(const Vec& dz, const Vec& pred, double dt,
                    const ObservationModel* obs) {
  if (!obs) return dz - pred * dt;
  return increment_residual(*obs, dz, pred, dt).cwiseQuotient(obs->noise_scale);
}

}  // namespace jpdadetail

// Marginal association probabilities: beta(m, n) = P{slot m holds target n}
// = sum of pi over permutations with perm[m] = n. Rows and columns are both
// stochastic since the support is permutations.
inline Mat marginalize_beta(const JointBelief& joint) {
  validate(joint);
  Mat beta = Mat::Zero(joint.M, joint.M);
  for (std::size_t g = 0; g < joint.perms.size(); ++g) {
    for (int m = 0; m < joint.M; ++m) {
      beta(m, joint.perms[g][m]) += joint.pi(static_cast<int>(g));
    }
  }
  return beta;
}

// Exact two-target filter for pi1 = P{identity assignment}:
//   dpi1 = -q(pi1 - pi2)dt + pi1 pi2 htilde'(dZ1 - dZ2)
//          - (pi1 - pi2) pi1 pi2 |htilde|^2 dt,   htilde = hhat1 - hhat2,
// with pi2 = 1 - pi1 maintained exactly. Inputs are raw observation-space
// quantities when obs is given (wrap + 1/sigma_W applied here), already
// unit-scaled otherwise.
inline JointBelief joint_pi_step_two_target(const JointBelief& joint,
                                            const Vec& hhat1, const Vec& hhat2,
                                            const Vec& dz1, const Vec& dz2,
                                            double q, double dt,
                                            const ObservationModel* obs = nullptr,
                                            PiDiagnostics* diag = nullptr) {
  validate(joint);
  require(joint.M == 2, "two-target pi step: M must be 2");
  require(dt > 0.0, "two-target pi step: dt must be > 0");
  const double pi1 = joint.pi(0);
  const double pi2 = joint.pi(1);
  const Vec htilde = jpdadetail::diff(hhat1, hhat2, obs);
  // dZ1 - dZ2 wraps with the increment period: both increments are defined
  // modulo 2*pi*dt on angular coordinates, and the wrapped difference is what
  // stays consistent with the wrapped htilde near the branch cut.
  Vec dzd = dz1 - dz2;
  if (obs) {
    for (int j = 0; j < obs->dim_obs; ++j) {
      if (obs->is_angular(j)) dzd(j) = wrap_period(dzd(j), 2.0 * M_PI * dt);
      dzd(j) /= obs->noise_scale(j);
    }
  }
  const double delta = -q * (pi1 - pi2) * dt + pi1 * pi2 * htilde.dot(dzd) -
                       (pi1 - pi2) * pi1 * pi2 * htilde.squaredNorm() * dt;
  double raw = pi1 + delta;
  if (diag) {
    diag->raw_sum = 1.0;  // pi2 = 1 - pi1 by construction
    diag->min_raw = std::min(raw, 1.0 - raw);
    diag->max_raw = std::max(raw, 1.0 - raw);
  }
  JointBelief out = joint;
  const double clamped = std::min(1.0, std::max(0.0, raw));
  out.pi(0) = clamped;
  out.pi(1) = 1.0 - clamped;
  return out;
}

// Euler step of the joint association filter over all M! permutations, in the
// combined innovation form
//   dpi(g) = q[1 - M! pi(g)]dt + pi(g) sum_m (hhat^{g(m)} - Htilde^m)'(dZ^m - Htilde^m dt)
// with Htilde^m the pi-weighted prediction for slot m, computed from the
// current marginals. Restricted to M = 2 this reproduces the two-target
// filter exactly.
inline JointBelief joint_pi_step_general(const JointBelief& joint,
                                         const std::vector<Vec>& hhats,
                                         const std::vector<Vec>& dz_all,
                                         double q, double dt,
                                         const ObservationModel* obs = nullptr,
                                         PiDiagnostics* diag = nullptr) {
  validate(joint);
  require(dt > 0.0, "joint pi step: dt must be > 0");
  const int M = joint.M;
  require(static_cast<int>(hhats.size()) == M,
          "joint pi step: need one prediction per target");
  require(static_cast<int>(dz_all.size()) == M,
          "joint pi step: need one increment per slot");
  const int s = static_cast<int>(hhats[0].size());
  const Mat beta = marginalize_beta(joint);

  // Slot predictions. Angular coordinates take the weighted circular mean;
  // the marginal rows are probability vectors, so the weights are proper.
  std::vector<Vec> slot_pred(M, Vec::Zero(s));
  for (int m = 0; m < M; ++m) {
    for (int j = 0; j < s; ++j) {
      if (obs && obs->is_angular(j)) {
        std::vector<double> angles(M), weights(M);
        for (int n = 0; n < M; ++n) {
          angles[n] = hhats[n](j);
          weights[n] = beta(m, n);
        }
        slot_pred[m](j) = circular_mean_weighted(angles, weights);
      } else {
        double acc = 0.0;
        for (int n = 0; n < M; ++n) acc += beta(m, n) * hhats[n](j);
        slot_pred[m](j) = acc;
      }
    }
  }

  std::vector<Vec> slot_residual(M);
  for (int m = 0; m < M; ++m) {
    slot_residual[m] = jpdadetail::residual(dz_all[m], slot_pred[m], dt, obs);
  }

  const std::size_t G = joint.perms.size();
  const double fact = static_cast<double>(G);
  Vec raw(static_cast<int>(G));
  for (std::size_t g = 0; g < G; ++g) {
    double inc = 0.0;
    for (int m = 0; m < M; ++m) {
      const Vec dh = jpdadetail::diff(hhats[joint.perms[g][m]], slot_pred[m], obs);
      inc += dh.dot(slot_residual[m]);
    }
    const double p = joint.pi(static_cast<int>(g));
    raw(static_cast<int>(g)) = p + q * (1.0 - fact * p) * dt + p * inc;
  }
  return jpdadetail::clamp_normalize(joint, raw, diag);
}

// Stateless association weights from per-step increment likelihoods:
//   pi(g) ~ prod_m (1/N) sum_i exp(-|dZ^m - h(X^{i, g(m)}) dt|^2 / (2 dt)),
// evaluated in log space (noise-scaled, wrapped residuals) and normalized
// over permutations. Equals the Bayes posterior from a uniform prior, which
// matches frames whose slot order is redrawn independently every step.
inline JointBelief joint_pi_discrete_heuristic(
    const std::vector<ParticleEnsemble>& ensembles, const ObservationModel& obs,
    const std::vector<Vec>& dz_all, double dt) {
  const int M = static_cast<int>(ensembles.size());
  require(M >= 1, "pi heuristic: need at least one ensemble");
  require(static_cast<int>(dz_all.size()) == M,
          "pi heuristic: need one increment per slot");
  require(dt > 0.0, "pi heuristic: dt must be > 0");

  // ll(m, n): log particle-averaged likelihood of slot m under target n.
  Mat ll(M, M);
  std::vector<Mat> H(M);
  for (int n = 0; n < M; ++n) H[n] = observe_all(ensembles[n], obs);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < M; ++n) {
      const int N = ensembles[n].N();
      std::vector<double> expo(N);
      for (int i = 0; i < N; ++i) {
        const Vec r =
            increment_residual(obs, dz_all[m], H[n].row(i).transpose(), dt)
                .cwiseQuotient(obs.noise_scale);
        expo[i] = -0.5 * r.squaredNorm() / dt;
      }
      ll(m, n) = logsumexp(expo) - std::log(static_cast<double>(N));
    }
  }

  JointBelief out = joint_init(M);
  std::vector<double> scores(out.perms.size());
  for (std::size_t g = 0; g < out.perms.size(); ++g) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += ll(m, out.perms[g][m]);
    scores[g] = acc;
  }
  const double norm = logsumexp(scores);
  for (std::size_t g = 0; g < out.perms.size(); ++g) {
    out.pi(static_cast<int>(g)) = std::exp(scores[g] - norm);
  }
  out.pi /= out.pi.sum();
  return out;
}

enum class PiFilterKind { kContinuous, kDiscreteHeuristic };

struct MultiTargetState {
  std::vector<ParticleEnsemble> targets;
  JointBelief joint;
  double time = 0.0;
};

struct JpdaConfig {
  PiFilterKind pi_filter = PiFilterKind::kContinuous;
  GainConfig gain;
};

// One JPDA-FPF step. Order per the joint filter derivation: advance pi from
// the pre-step per-target predictions, marginalize, then update each target's
// particle bank with its marginal column as per-slot weights:
//   X^{i,n} <- X^{i,n} + a_n dt + noise
//              + sum_m beta(m,n) K_n dI^{i,m,n}
//   dI^{i,m,n} = dZ^m - [ (beta(m,n)/2) h(X^{i,n}) + (1 - beta(m,n)/2) hhat^n ] dt.
// Columns of beta are used as-is (they need not sum to 1).
inline MultiTargetState jpda_fpf_step(
    const MultiTargetState& state, const std::vector<DynamicsModel>& dynamics,
    const ObservationModel& obs, const ObservationFrame& frame,
    const JpdaConfig& config, double q,
    const std::function<Vec(int, int)>& noise) {
  validate(state.joint);
  const int M = state.joint.M;
  require(static_cast<int>(state.targets.size()) == M,
          "jpda_fpf_step: one particle bank per target required");
  require(static_cast<int>(dynamics.size()) == M,
          "jpda_fpf_step: one dynamics model per target required");
  require(static_cast<int>(frame.observations.size()) == M,
          "jpda_fpf_step: frame observation count mismatch");
  const double dt = frame.time - state.time;
  require(dt > 0.0, "jpda_fpf_step: frame time must be ahead of state time");

  std::vector<Mat> H(M);
  std::vector<Vec> hhat(M);
  std::vector<GainApproximation> gain(M);
  for (int n = 0; n < M; ++n) {
    require(state.targets[n].N() >= 2, "jpda_fpf_step: need N >= 2");
    H[n] = observe_all(state.targets[n], obs);
    hhat[n] = prediction_from_rows(H[n], obs);
    gain[n] = compute_gain_from(state.targets[n], obs, H[n], hhat[n], config.gain);
  }

  MultiTargetState next;
  next.time = state.time + dt;
  if (config.pi_filter == PiFilterKind::kDiscreteHeuristic) {
    next.joint = joint_pi_discrete_heuristic(state.targets, obs,
                                             frame.observations, dt);
  } else if (M == 2) {
    next.joint = joint_pi_step_two_target(state.joint, hhat[0], hhat[1],
                                          frame.observations[0],
                                          frame.observations[1], q, dt, &obs);
  } else {
    next.joint = joint_pi_step_general(state.joint, hhat, frame.observations, q,
                                       dt, &obs);
  }
  const Mat beta = marginalize_beta(next.joint);

  next.targets.resize(M);
  const double rt = std::sqrt(dt);
  for (int n = 0; n < M; ++n) {
    const ParticleEnsemble& ens = state.targets[n];
    const bool constant = gain[n].kind == GainMethod::kConstant;
    next.targets[n].states.resize(ens.N(), ens.dim());
    for (int i = 0; i < ens.N(); ++i) {
      const Vec x = ens.states.row(i).transpose();
      const Vec di = obs_diff(obs, H[n].row(i).transpose(), hhat[n]);
      const Mat K = constant ? gain[n].constant_matrix : evaluate_gain(gain[n], x);
      Vec xn = x + dynamics[n].drift(x) * dt +
               rt * dynamics[n].diffusion_scale.cwiseProduct(noise(n, i));
      for (int m = 0; m < M; ++m) {
        const double w = beta(m, n);
        if (w == 0.0) continue;
        const Vec pred = hhat[n] + 0.5 * w * di;
        const Vec residual =
            increment_residual(obs, frame.observations[m], pred, dt)
                .cwiseQuotient(obs.noise_scale);
        xn += w * (K * residual);
      }
      if (!all_finite(xn)) {
        throw std::runtime_error("jpda_fpf_step: target " + str(n) +
                                 " particle " + str(i) +
                                 " became non-finite at t=" + str(state.time));
      }
      next.targets[n].states.row(i) = xn.transpose();
    }
  }
  return next;
}

}  // namespace fpf
