#include "fpf/sirpf.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace {

fpf::DynamicsModel still_dynamics() {
  fpf::DynamicsModel dyn;
  dyn.dim_state = 1;
  dyn.drift = [](const fpf::Vec& x) { return fpf::Vec::Zero(x.size()); };
  dyn.diffusion_scale = fpf::Vec::Zero(1);
  return dyn;
}

fpf::ObservationModel identity_obs() {
  fpf::ObservationModel obs;
  obs.dim_obs = 1;
  obs.map = [](const fpf::Vec& x) { return x; };
  obs.noise_scale = fpf::Vec::Ones(1);
  return obs;
}

fpf::ObservationFrame frame_with(std::vector<double> values, double time) {
  fpf::ObservationFrame frame;
  frame.time = time;
  for (double v : values) frame.observations.push_back(fpf::Vec::Constant(1, v));
  frame.truth_assignment.assign(values.size(), -1);
  return frame;
}

fpf::WeightedEnsemble two_particles(double x0, double x1) {
  fpf::WeightedEnsemble we;
  we.states.resize(2, 1);
  we.states << x0, x1;
  we.weights = fpf::Vec::Constant(2, 0.5);
  return we;
}

const fpf::NoiseFn kNoNoise = [](int) { return fpf::Vec::Zero(1); };

TEST(WeightedEnsemble, EffectiveSampleSizeHandValues) {
  fpf::Vec w(2);
  w << 0.75, 0.25;
  EXPECT_DOUBLE_EQ(fpf::effective_sample_size(w), 1.6);
  EXPECT_DOUBLE_EQ(fpf::effective_sample_size(fpf::Vec::Constant(5, 0.2)), 5.0);
  EXPECT_THROW(fpf::effective_sample_size(fpf::Vec::Zero(3)),
               std::invalid_argument);
}

TEST(WeightedEnsemble, WeightedMeanHandValue) {
  fpf::WeightedEnsemble we = two_particles(0.0, 2.0);
  we.weights << 0.25, 0.75;
  EXPECT_DOUBLE_EQ(fpf::weighted_mean(we)(0), 1.5);
}

TEST(WeightedEnsemble, ValidateRejectsBrokenWeights) {
  fpf::WeightedEnsemble we = two_particles(0.0, 1.0);
  we.weights << -0.1, 1.1;
  EXPECT_THROW(fpf::validate(we), std::invalid_argument);
  we.weights << 0.3, 0.3;
  EXPECT_THROW(fpf::validate(we), std::invalid_argument);
  we.weights = fpf::Vec::Constant(3, 1.0 / 3.0);
  EXPECT_THROW(fpf::validate(we), std::invalid_argument);
}

TEST(SirStep, GaussianClutterWeightHandValue) {
  // States {0, 10}, dz = 0.1, dt = 0.01: particle 0 has residual 0.1 (log
  // term -0.5), particle 1 has residual 0; the gaussian clutter ratio adds
  // |dz|^2/(2dt) = 0.5 to each and the all-clutter hypothesis adds a unit
  // term, so w1 = (e^0.5 + 1) / (3 + e^0.5).
  fpf::WeightedEnsemble we = two_particles(0.0, 10.0);
  fpf::SirConfig config;
  config.clutter_channel = true;
  config.clutter_density.kind = fpf::ClutterDensity::Kind::kGaussian;
  fpf::SirDiagnostics diag;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), identity_obs(), frame_with({0.1}, 0.01),
                    0.01, config, kNoNoise, 0.0, &diag);
  EXPECT_NEAR(next.weights(1), 0.5697741629282956, 1e-12);
  EXPECT_NEAR(next.weights(0) + next.weights(1), 1.0, 1e-15);
  EXPECT_NEAR(diag.ess_before_resample, 1.9617964944538488, 1e-12);
  EXPECT_FALSE(diag.resampled);
  EXPECT_FALSE(diag.degenerate_reset);
  EXPECT_DOUBLE_EQ(next.states(1, 0), 10.0);
}

TEST(SirStep, UniformClutterWeightHandValue) {
  // Same setup with an assumed uniform clutter density of volume 4; the
  // clutter ratio becomes the constant log V + log dt - log sqrt(2 pi dt).
  fpf::WeightedEnsemble we = two_particles(0.0, 10.0);
  fpf::SirConfig config;
  config.clutter_channel = true;
  config.clutter_density.kind = fpf::ClutterDensity::Kind::kUniform;
  config.clutter_density.volume = 4.0;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), identity_obs(), frame_with({0.1}, 0.01),
                    0.01, config, kNoNoise, 0.0);
  EXPECT_NEAR(next.weights(1), 0.5139136657262188, 1e-12);
}

TEST(SirStep, UniformClutterRequiresPositiveVolume) {
  fpf::WeightedEnsemble we = two_particles(0.0, 1.0);
  fpf::SirConfig config;
  config.clutter_channel = true;
  config.clutter_density.kind = fpf::ClutterDensity::Kind::kUniform;
  config.clutter_density.volume = 0.0;
  EXPECT_THROW(fpf::sir_step(we, still_dynamics(), identity_obs(),
                             frame_with({0.1}, 0.01), 0.01, config, kNoNoise, 0.0),
               std::invalid_argument);
}

TEST(SirStep, PropagationFollowsTheDynamics) {
  fpf::DynamicsModel dyn = still_dynamics();
  dyn.drift = [](const fpf::Vec& x) { return fpf::Vec(-x); };
  dyn.diffusion_scale = fpf::Vec::Constant(1, 2.0);
  fpf::WeightedEnsemble we = two_particles(1.0, -1.0);
  fpf::SirConfig config;
  config.clutter_channel = false;
  const double dt = 0.04;
  const fpf::NoiseFn noise = [](int i) {
    return fpf::Vec::Constant(1, i == 0 ? 0.5 : -0.25);
  };
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, dyn, identity_obs(), frame_with({0.0}, dt), dt, config,
                    noise, 0.0);
  EXPECT_NEAR(next.states(0, 0), 1.0 - 1.0 * dt + std::sqrt(dt) * 2.0 * 0.5, 1e-15);
  EXPECT_NEAR(next.states(1, 0), -1.0 + 1.0 * dt - std::sqrt(dt) * 2.0 * 0.25, 1e-15);
}

TEST(SirStep, SystematicResampleCopiesTheDominantParticle) {
  // Flat likelihood (constant observation map, clutter channel off) keeps the
  // prior weights; ESS of (0.97, 0.01, 0.01, 0.01) is ~1.06, far below the
  // threshold, and offset u = 0 lands every stratum inside the first weight.
  fpf::WeightedEnsemble we;
  we.states.resize(4, 1);
  we.states << 0.0, 1.0, 2.0, 3.0;
  we.weights = fpf::Vec(4);
  we.weights << 0.97, 0.01, 0.01, 0.01;
  fpf::ObservationModel obs = identity_obs();
  obs.map = [](const fpf::Vec&) { return fpf::Vec::Zero(1); };
  fpf::SirConfig config;
  config.clutter_channel = false;
  config.resample_threshold = 1.0;
  fpf::SirDiagnostics diag;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), obs, frame_with({0.0}, 0.01), 0.01,
                    config, kNoNoise, 0.0, &diag);
  EXPECT_TRUE(diag.resampled);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(next.states(k, 0), 0.0);
    EXPECT_DOUBLE_EQ(next.weights(k), 0.25);
  }
}

TEST(SirStep, StrataSpreadAcrossEqualWeights) {
  // Post-update weights (0.5, 0.5, 0, 0) with u = 0: strata at 0, 0.25, 0.5,
  // 0.75; the first three stay at source 0 (0.5 is not > 0.5) and the last
  // crosses to source 1.
  fpf::WeightedEnsemble we;
  we.states.resize(4, 1);
  we.states << 0.0, 1.0, 2.0, 3.0;
  we.weights = fpf::Vec(4);
  we.weights << 0.5, 0.5, 0.0, 0.0;
  fpf::ObservationModel obs = identity_obs();
  obs.map = [](const fpf::Vec&) { return fpf::Vec::Zero(1); };
  fpf::SirConfig config;
  config.clutter_channel = false;
  config.resample_threshold = 1.0;
  fpf::SirDiagnostics diag;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), obs, frame_with({0.0}, 0.01), 0.01,
                    config, kNoNoise, 0.0, &diag);
  EXPECT_TRUE(diag.resampled);
  EXPECT_DOUBLE_EQ(next.states(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(next.states(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(next.states(2, 0), 0.0);
  EXPECT_DOUBLE_EQ(next.states(3, 0), 1.0);
}

TEST(SirStep, UniformWeightsSitExactlyOnTheThreshold) {
  // ESS == threshold * N does not resample; the trigger is strict.
  fpf::WeightedEnsemble we;
  we.states.resize(4, 1);
  we.states << 0.0, 1.0, 2.0, 3.0;
  we.weights = fpf::Vec::Constant(4, 0.25);
  fpf::ObservationModel obs = identity_obs();
  obs.map = [](const fpf::Vec&) { return fpf::Vec::Zero(1); };
  fpf::SirConfig config;
  config.clutter_channel = false;
  config.resample_threshold = 1.0;
  fpf::SirDiagnostics diag;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), obs, frame_with({0.0}, 0.01), 0.01,
                    config, kNoNoise, 0.0, &diag);
  EXPECT_FALSE(diag.resampled);
  EXPECT_DOUBLE_EQ(diag.ess_before_resample, 4.0);
  EXPECT_DOUBLE_EQ(next.states(3, 0), 3.0);
}

TEST(SirStep, TotalDegeneracyResetsToUniformWeights) {
  // Residuals overflow to -inf log weights for every particle; without the
  // all-clutter floor the step restarts from uniform weights instead of
  // dividing by zero.
  fpf::WeightedEnsemble we = two_particles(1e165, -1e165);
  fpf::SirConfig config;
  config.clutter_channel = false;
  fpf::SirDiagnostics diag;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), identity_obs(), frame_with({0.1}, 0.01),
                    0.01, config, kNoNoise, 0.0, &diag);
  EXPECT_TRUE(diag.degenerate_reset);
  EXPECT_FALSE(diag.resampled);
  EXPECT_DOUBLE_EQ(next.weights(0), 0.5);
  EXPECT_DOUBLE_EQ(next.weights(1), 0.5);
}

TEST(SirStep, AllClutterChannelFloorsTheDegeneracy) {
  // Same overflow with the clutter channel on: the all-clutter hypothesis
  // keeps every log weight finite, so the prior weights survive.
  fpf::WeightedEnsemble we = two_particles(1e165, -1e165);
  fpf::SirConfig config;
  config.clutter_channel = true;
  config.clutter_density.kind = fpf::ClutterDensity::Kind::kGaussian;
  fpf::SirDiagnostics diag;
  const fpf::WeightedEnsemble next =
      fpf::sir_step(we, still_dynamics(), identity_obs(), frame_with({0.1}, 0.01),
                    0.01, config, kNoNoise, 0.0, &diag);
  EXPECT_FALSE(diag.degenerate_reset);
  EXPECT_NEAR(next.weights(0), 0.5, 1e-12);
  EXPECT_NEAR(next.weights(1), 0.5, 1e-12);
}

TEST(SirStep, RejectsBadInputs) {
  fpf::WeightedEnsemble we = two_particles(0.0, 1.0);
  fpf::SirConfig config;
  config.clutter_channel = false;
  EXPECT_THROW(fpf::sir_step(we, still_dynamics(), identity_obs(),
                             frame_with({0.1}, 0.01), 0.01, config, kNoNoise, 1.0),
               std::invalid_argument);
  EXPECT_THROW(fpf::sir_step(we, still_dynamics(), identity_obs(),
                             frame_with({0.1}, 0.01), 0.01, config, kNoNoise, -0.1),
               std::invalid_argument);
  EXPECT_THROW(fpf::sir_step(we, still_dynamics(), identity_obs(),
                             frame_with({}, 0.01), 0.01, config, kNoNoise, 0.0),
               std::invalid_argument);
  EXPECT_THROW(fpf::sir_step(we, still_dynamics(), identity_obs(),
                             frame_with({0.1}, 0.01), 0.0, config, kNoNoise, 0.0),
               std::invalid_argument);
}

}  // namespace
