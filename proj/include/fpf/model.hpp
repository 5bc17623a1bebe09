#pragma once

#include "fpf/angles.hpp"
#include "fpf/common.hpp"
#include "fpf/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fpf {

// dX = a(X)dt + diag(diffusion_scale) dB
struct DynamicsModel {
  int dim_state = 0;
  std::function<Vec(const Vec&)> drift;
  Vec diffusion_scale;
};

// dZ = h(X)dt + diag(noise_scale) dW. angular[j] marks circle-valued
// coordinates (bearings): their means are circular and their differences
// wrap.
struct ObservationModel {
  int dim_obs = 0;
  std::function<Vec(const Vec&)> map;
  Vec noise_scale;
  std::vector<bool> angular;  // empty = none angular

  bool is_angular(int j) const {
    return j < static_cast<int>(angular.size()) && angular[j];
  }
};

enum class ClutterKind { kUniformDisk, kGaussianWhitenoise };

struct ClutterModel {
  ClutterKind kind = ClutterKind::kGaussianWhitenoise;
  double radius = 0.0;  // uniform-disk only
  int count = 0;        // clutter observations per frame
};

struct InitialBelief {
  Vec mean;
  Mat cov;
};

// Full experiment description. Multi-target scenarios are clutter-free with
// exactly one observation slot per target; single-target scenarios have
// M = 1 + clutter count.
struct ScenarioModel {
  std::string name;
  std::vector<DynamicsModel> dynamics;  // one per target
  ObservationModel observation;
  ClutterModel clutter;
  int n_targets = 1;
  int M = 1;
  double horizon = 1.0;
  double dt = 0.01;
  double q = 0.0;
  std::vector<Vec> initial_truth;
  std::vector<InitialBelief> initial_ensemble;
  // When set, ground truth follows this deterministic schedule instead of
  // integrating the dynamics (the dynamics stay in place as the filter's
  // model). Used by the track-coalescence scenario.
  std::function<Vec(int, double)> scripted_truth;
};

// One time step's observation increments over [time - dt, time]; the stamp is
// the right endpoint of the increment interval, so filter steps recover dt as
// frame.time - state.time. truth_assignment maps slot -> originating target
// (-1 for clutter); it exists for metrics and tests only. No filter operation
// accepts it.
struct ObservationFrame {
  double time = 0.0;
  std::vector<Vec> observations;
  std::vector<int> truth_assignment;
};

struct ParticleEnsemble {
  Mat states;  // N x d, one row per particle

  int N() const { return static_cast<int>(states.rows()); }
  int dim() const { return static_cast<int>(states.cols()); }
};

inline void validate(const DynamicsModel& dyn) {
  require(dyn.dim_state >= 1, "dynamics: dim_state must be >= 1");
  require(static_cast<int>(dyn.diffusion_scale.size()) == dyn.dim_state,
          "dynamics: diffusion_scale size mismatch");
  require(dyn.diffusion_scale.minCoeff() >= 0.0,
          "dynamics: diffusion_scale entries must be >= 0");
  require(static_cast<bool>(dyn.drift), "dynamics: drift not set");
}

inline void validate(const ObservationModel& obs) {
  require(obs.dim_obs >= 1, "observation: dim_obs must be >= 1");
  require(static_cast<int>(obs.noise_scale.size()) == obs.dim_obs,
          "observation: noise_scale size mismatch");
  require(obs.noise_scale.minCoeff() > 0.0,
          "observation: noise_scale must be > 0");
  require(static_cast<bool>(obs.map), "observation: map not set");
}

inline void validate(const ScenarioModel& sc) {
  require(sc.n_targets >= 1, "scenario: n_targets must be >= 1");
  require(static_cast<int>(sc.dynamics.size()) == sc.n_targets,
          "scenario: one dynamics model per target required");
  for (const auto& dyn : sc.dynamics) validate(dyn);
  validate(sc.observation);
  require(sc.dt > 0.0, "scenario: dt must be > 0");
  require(sc.horizon >= sc.dt, "scenario: horizon must be >= dt");
  require(sc.q >= 0.0, "scenario: q must be >= 0");
  require(static_cast<int>(sc.initial_truth.size()) == sc.n_targets,
          "scenario: initial_truth size mismatch");
  require(static_cast<int>(sc.initial_ensemble.size()) == sc.n_targets,
          "scenario: initial_ensemble size mismatch");
  if (sc.n_targets == 1) {
    require(sc.M == 1 + sc.clutter.count,
            "scenario: single target needs M = 1 + clutter count");
  } else {
    require(sc.clutter.count == 0,
            "scenario: multi-target scenarios are clutter-free");
    require(sc.M == sc.n_targets,
            "scenario: multi-target needs one observation per target");
  }
  if (sc.clutter.count > 0 && sc.clutter.kind == ClutterKind::kUniformDisk) {
    require(sc.clutter.radius > 0.0, "scenario: uniform-disk radius must be > 0");
  }
}

inline int n_steps(const ScenarioModel& sc) {
  return static_cast<int>(std::llround(sc.horizon / sc.dt));
}

// h evaluated on every particle; rows follow ensemble order.
inline Mat observe_all(const ParticleEnsemble& ens, const ObservationModel& obs) {
  Mat H(ens.N(), obs.dim_obs);
  for (int i = 0; i < ens.N(); ++i) {
    Vec hi = obs.map(ens.states.row(i).transpose());
    require(static_cast<int>(hi.size()) == obs.dim_obs,
            "observation map output has wrong dimension");
    H.row(i) = hi.transpose();
  }
  return H;
}

inline Vec prediction_from_rows(const Mat& H, const ObservationModel& obs) {
  const int s = static_cast<int>(H.cols());
  Vec hhat(s);
  for (int j = 0; j < s; ++j) {
    if (obs.is_angular(j)) {
      std::vector<double> col(H.rows());
      for (int i = 0; i < H.rows(); ++i) col[i] = H(i, j);
      hhat(j) = circular_mean(col);
    } else {
      hhat(j) = H.col(j).mean();
    }
  }
  return hhat;
}

// hhat: coordinate-wise ensemble mean of h, circular on angular coordinates.
inline Vec ensemble_prediction(const ParticleEnsemble& ens,
                               const ObservationModel& obs) {
  require(ens.N() >= 1, "ensemble_prediction: empty ensemble");
  return prediction_from_rows(observe_all(ens, obs), obs);
}

// a - b in observation space; angular coordinates wrap to (-pi, pi].
inline Vec obs_diff(const ObservationModel& obs, const Vec& a, const Vec& b) {
  Vec d = a - b;
  for (int j = 0; j < obs.dim_obs; ++j) {
    if (obs.is_angular(j)) d(j) = wrap_angle(d(j));
  }
  return d;
}

// dz - pred*dt; angular coordinates wrap with period 2*pi*dt since the
// increment of an angle observation is only defined modulo that.
inline Vec increment_residual(const ObservationModel& obs, const Vec& dz,
                              const Vec& pred, double dt) {
  Vec r = dz - pred * dt;
  for (int j = 0; j < obs.dim_obs; ++j) {
    if (obs.is_angular(j)) r(j) = wrap_period(r(j), 2.0 * M_PI * dt);
  }
  return r;
}

inline ParticleEnsemble sample_ensemble(const InitialBelief& init, int N,
                                        RngStream& rng) {
  const int d = static_cast<int>(init.mean.size());
  require(init.cov.rows() == d && init.cov.cols() == d,
          "initial belief: covariance shape mismatch");
  Eigen::LLT<Mat> llt(init.cov);
  Mat L;
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
  } else {
    // Semi-definite covariance: symmetric square root.
    Eigen::SelfAdjointEigenSolver<Mat> es(init.cov);
    require(es.eigenvalues().minCoeff() > -1e-10,
            "initial belief: covariance not PSD");
    L = es.eigenvectors() *
        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  ParticleEnsemble ens;
  ens.states.resize(N, d);
  for (int i = 0; i < N; ++i) {
    ens.states.row(i) = (init.mean + L * rng.normal_vec(d)).transpose();
  }
  return ens;
}

inline std::vector<std::vector<Vec>> simulate_truth(const ScenarioModel& sc,
                                                    std::uint64_t seed) {
  validate(sc);
  const int K = n_steps(sc);
  std::vector<std::vector<Vec>> paths(sc.n_targets);
  for (int n = 0; n < sc.n_targets; ++n) {
    paths[n].resize(K + 1);
    paths[n][0] = sc.scripted_truth ? sc.scripted_truth(n, 0.0)
                                    : sc.initial_truth[n];
  }
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < sc.n_targets; ++n) {
      if (sc.scripted_truth) {
        paths[n][k + 1] = sc.scripted_truth(n, (k + 1) * sc.dt);
        continue;
      }
      const auto& dyn = sc.dynamics[n];
      const Vec& x = paths[n][k];
      Vec a = dyn.drift(x);
      if (!all_finite(a)) {
        throw std::runtime_error("simulate_truth: non-finite drift for target " +
                                 str(n) + " at t=" + str(k * sc.dt) +
                                 ", state=[" + str(x.transpose()) + "]");
      }
      RngStream rs(seed, Stream::kTruth, static_cast<std::uint64_t>(k),
                   static_cast<std::uint64_t>(n));
      Vec xi = rs.normal_vec(dyn.dim_state);
      paths[n][k + 1] =
          x + a * sc.dt +
          std::sqrt(sc.dt) * dyn.diffusion_scale.cwiseProduct(xi);
    }
  }
  return paths;
}

namespace modeldetail {

// Uniform sample in the unit ball of dimension s (rejection; fine for small s).
inline Vec unit_ball(int s, RngStream& rng) {
  Vec v(s);
  for (;;) {
    for (int j = 0; j < s; ++j) v(j) = 2.0 * rng.uniform() - 1.0;
    if (v.squaredNorm() <= 1.0) return v;
  }
}

}  // namespace modeldetail

// One observation frame at the given time. Slot order carries no information:
// the target slot (single-target) or the slot permutation (multi-target) is
// drawn fresh each call.
inline ObservationFrame generate_frame(const ScenarioModel& sc,
                                       const std::vector<Vec>& truth_states,
                                       RngStream& rng, double time = 0.0) {
  require(static_cast<int>(truth_states.size()) == sc.n_targets,
          "generate_frame: one truth state per target required");
  for (const Vec& x : truth_states) {
    require(all_finite(x), "generate_frame: non-finite truth state");
  }
  const auto& obs = sc.observation;
  const double rt = std::sqrt(sc.dt);
  ObservationFrame frame;
  frame.time = time;
  frame.observations.resize(sc.M);
  frame.truth_assignment.assign(sc.M, -1);

  if (sc.n_targets == 1) {
    const int target_slot = rng.uniform_int(sc.M);
    frame.truth_assignment[target_slot] = 0;
    const Vec h = obs.map(truth_states[0]);
    for (int m = 0; m < sc.M; ++m) {
      Vec value;
      if (m == target_slot) {
        value = h;
      } else if (sc.clutter.kind == ClutterKind::kUniformDisk) {
        value = h + sc.clutter.radius * modeldetail::unit_ball(obs.dim_obs, rng);
      } else {
        value = Vec::Zero(obs.dim_obs);  // white-noise clutter: pure noise
      }
      frame.observations[m] =
          value * sc.dt + rt * obs.noise_scale.cwiseProduct(
                                   rng.normal_vec(obs.dim_obs));
    }
    return frame;
  }

  // Multi-target, clutter-free: a uniformly random permutation of the target
  // observations (Fisher-Yates).
  std::vector<int> perm(sc.M);
  for (int m = 0; m < sc.M; ++m) perm[m] = m;
  for (int m = sc.M - 1; m > 0; --m) {
    std::swap(perm[m], perm[rng.uniform_int(m + 1)]);
  }
  for (int m = 0; m < sc.M; ++m) {
    const int n = perm[m];
    frame.truth_assignment[m] = n;
    frame.observations[m] =
        obs.map(truth_states[n]) * sc.dt +
        rt * obs.noise_scale.cwiseProduct(rng.normal_vec(obs.dim_obs));
  }
  return frame;
}

// Bearing map for a bank of fixed 2d sensors: coordinate j is the
// four-quadrant angle from sensor j to the target's planar position, read
// from state coordinates (ix, iy). Output in (-pi, pi]; all coordinates
// angular. noise_scale defaults to 1 per sensor; callers override.
inline ObservationModel bearing_observation_model(
    const std::vector<Eigen::Vector2d>& sensors, int dim_state = 4, int ix = 0,
    int iy = 2) {
  require(!sensors.empty(), "bearing model: need at least one sensor");
  require(ix >= 0 && iy >= 0 && ix < dim_state && iy < dim_state && ix != iy,
          "bearing model: bad position coordinate indices");
  ObservationModel obs;
  obs.dim_obs = static_cast<int>(sensors.size());
  obs.noise_scale = Vec::Ones(obs.dim_obs);
  obs.angular.assign(sensors.size(), true);
  obs.map = [sensors, dim_state, ix, iy](const Vec& x) {
    require(static_cast<int>(x.size()) == dim_state,
            "bearing model: state dimension mismatch");
    Vec h(static_cast<int>(sensors.size()));
    for (std::size_t j = 0; j < sensors.size(); ++j) {
      const double dx = x(ix) - sensors[j](0);
      const double dy = x(iy) - sensors[j](1);
      if (dx == 0.0 && dy == 0.0) {
        throw std::runtime_error("bearing undefined: target at sensor " +
                                 str(j));
      }
      h(static_cast<int>(j)) = std::atan2(dy, dx);
    }
    return h;
  };
  return obs;
}

}  // namespace fpf
