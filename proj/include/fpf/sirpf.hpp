#pragma once

#include "fpf/pda.hpp"

namespace fpf {

struct WeightedEnsemble {
  Mat states;  // N x d
  Vec weights; // sums to 1

  int N() const { return static_cast<int>(states.rows()); }
  int dim() const { return static_cast<int>(states.cols()); }
};

inline void validate(const WeightedEnsemble& we) {
  require(we.N() >= 1, "weighted ensemble: empty");
  require(we.weights.size() == we.states.rows(),
          "weighted ensemble: weight count mismatch");
  require(we.weights.minCoeff() >= 0.0, "weighted ensemble: negative weight");
  require(std::abs(we.weights.sum() - 1.0) <= 1e-6,
          "weighted ensemble: weights must sum to 1");
}

inline double effective_sample_size(const Vec& weights) {
  require(weights.size() >= 1, "ess: empty weights");
  const double ss = weights.squaredNorm();
  require(ss > 0.0, "ess: all weights zero");
  return 1.0 / ss;
}

inline Vec weighted_mean(const WeightedEnsemble& we) {
  return we.states.transpose() * we.weights;
}

struct SirConfig {
  // Single-target-in-clutter runs keep the all-clutter mixture component;
  // clutter-free multi-target banks drop it.
  bool clutter_channel = true;
  ClutterDensity clutter_density;
  double resample_threshold = 0.5;  // resample when ESS < threshold * N
};

struct SirDiagnostics {
  double ess_before_resample = 0.0;
  bool resampled = false;
  bool degenerate_reset = false;
};

// Bootstrap SIR step with association-marginalized weights: propagate by
// Euler-Maruyama, multiply each weight by a uniform-prior mixture of the
// per-slot likelihood ratios (log domain), normalize, and systematically
// resample below the ESS threshold. resample_u is the single uniform draw the
// systematic resampler consumes.
inline WeightedEnsemble sir_step(const WeightedEnsemble& we,
                                 const DynamicsModel& dyn,
                                 const ObservationModel& obs,
                                 const ObservationFrame& frame, double dt,
                                 const SirConfig& config, const NoiseFn& noise,
                                 double resample_u,
                                 SirDiagnostics* diag = nullptr) {
  validate(we);
  require(dt > 0.0, "sir_step: dt must be > 0");
  require(we.dim() == dyn.dim_state, "sir_step: state dimension mismatch");
  require(!frame.observations.empty(), "sir_step: empty frame");
  require(resample_u >= 0.0 && resample_u < 1.0,
          "sir_step: resample_u must lie in [0, 1)");
  const int N = we.N();
  const int M = static_cast<int>(frame.observations.size());
  const double rt = std::sqrt(dt);

  WeightedEnsemble next;
  next.states.resize(N, we.dim());
  for (int i = 0; i < N; ++i) {
    const Vec x = we.states.row(i).transpose();
    next.states.row(i) =
        (x + dyn.drift(x) * dt + rt * dyn.diffusion_scale.cwiseProduct(noise(i)))
            .transpose();
  }

  double clutter_const = 0.0;
  if (config.clutter_channel &&
      config.clutter_density.kind == ClutterDensity::Kind::kUniform) {
    require(config.clutter_density.volume > 0.0,
            "sir_step: uniform clutter volume must be > 0");
    clutter_const = std::log(config.clutter_density.volume) +
                    obs.dim_obs * std::log(dt) -
                    0.5 * obs.dim_obs * std::log(2.0 * M_PI * dt);
  }

  // Per-slot likelihood ratio of "slot m is the target" against "slot m is
  // clutter"; the mixture's uniform association prior is a constant and
  // cancels in the normalization.
  Vec logw(N);
  std::vector<double> terms;
  for (int i = 0; i < N; ++i) {
    const Vec x = next.states.row(i).transpose();
    const Vec hx = obs.map(x);
    terms.clear();
    for (int m = 0; m < M; ++m) {
      const Vec& dz = frame.observations[m];
      const Vec r = increment_residual(obs, dz, hx, dt).cwiseQuotient(obs.noise_scale);
      double t = -r.squaredNorm() / (2.0 * dt);
      if (config.clutter_channel) {
        if (config.clutter_density.kind == ClutterDensity::Kind::kGaussian) {
          t += dz.cwiseQuotient(obs.noise_scale).squaredNorm() / (2.0 * dt);
        } else {
          t += clutter_const;
        }
      }
      terms.push_back(t);
    }
    if (config.clutter_channel) terms.push_back(0.0);  // all-clutter hypothesis
    const double base = we.weights(i) > 0.0
                            ? std::log(we.weights(i))
                            : -std::numeric_limits<double>::infinity();
    logw(i) = base + logsumexp(terms);
  }

  const double peak = logw.maxCoeff();
  if (!std::isfinite(peak)) {
    // Total degeneracy; restart from uniform weights rather than dividing by 0.
    next.weights = Vec::Constant(N, 1.0 / N);
    if (diag) {
      diag->degenerate_reset = true;
      diag->ess_before_resample = static_cast<double>(N);
    }
    return next;
  }
  next.weights = (logw.array() - peak).exp();
  next.weights /= next.weights.sum();

  const double ess = effective_sample_size(next.weights);
  if (diag) diag->ess_before_resample = ess;
  if (ess >= config.resample_threshold * N) return next;

  // Systematic resampling: one stratified sweep with offset resample_u.
  if (diag) diag->resampled = true;
  Mat resampled(N, we.dim());
  double cum = next.weights(0);
  int src = 0;
  for (int k = 0; k < N; ++k) {
    const double pos = (resample_u + k) / N;
    while (pos > cum && src + 1 < N) cum += next.weights(++src);
    resampled.row(k) = next.states.row(src);
  }
  next.states = std::move(resampled);
  next.weights = Vec::Constant(N, 1.0 / N);
  return next;
}

}  // namespace fpf
