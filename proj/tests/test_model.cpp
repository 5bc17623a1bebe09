#include "fpf/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

fpf::DynamicsModel dyn1(double sigma, std::function<fpf::Vec(const fpf::Vec&)> drift =
                                          nullptr) {
  fpf::DynamicsModel d;
  d.dim_state = 1;
  d.drift = drift ? std::move(drift)
                  : [](const fpf::Vec&) { return fpf::Vec::Zero(1); };
  d.diffusion_scale = fpf::Vec::Constant(1, sigma);
  return d;
}

fpf::ObservationModel position_obs(double sigma_w) {
  fpf::ObservationModel o;
  o.dim_obs = 1;
  o.map = [](const fpf::Vec& x) { return x.head(1); };
  o.noise_scale = fpf::Vec::Constant(1, sigma_w);
  return o;
}

fpf::ObservationModel angle_obs() {
  fpf::ObservationModel o = position_obs(1.0);
  o.angular = {true};
  return o;
}

fpf::ScenarioModel base_scenario() {
  fpf::ScenarioModel sc;
  sc.name = "unit";
  sc.dynamics = {dyn1(1.0)};
  sc.observation = position_obs(1.0);
  sc.n_targets = 1;
  sc.M = 1;
  sc.horizon = 0.1;
  sc.dt = 0.01;
  sc.q = 0.0;
  sc.initial_truth = {fpf::Vec::Constant(1, 6.0)};
  sc.initial_ensemble = {{fpf::Vec::Zero(1), fpf::Mat::Identity(1, 1)}};
  return sc;
}

TEST(Model, ValidateRejectsBadComponents) {
  fpf::DynamicsModel bad_dim = dyn1(1.0);
  bad_dim.dim_state = 0;
  EXPECT_THROW(fpf::validate(bad_dim), std::invalid_argument);

  fpf::DynamicsModel bad_scale = dyn1(1.0);
  bad_scale.diffusion_scale = fpf::Vec::Zero(2);
  EXPECT_THROW(fpf::validate(bad_scale), std::invalid_argument);

  fpf::ObservationModel bad_noise = position_obs(0.0);
  EXPECT_THROW(fpf::validate(bad_noise), std::invalid_argument);

  fpf::ScenarioModel bad_dt = base_scenario();
  bad_dt.dt = 0.0;
  EXPECT_THROW(fpf::validate(bad_dt), std::invalid_argument);

  EXPECT_NO_THROW(fpf::validate(base_scenario()));
}

TEST(Model, NStepsRoundsTheHorizonQuotient) {
  fpf::ScenarioModel sc = base_scenario();
  sc.horizon = 1.0;
  sc.dt = 0.01;
  EXPECT_EQ(fpf::n_steps(sc), 100);
  sc.horizon = 0.9999999999;
  EXPECT_EQ(fpf::n_steps(sc), 100);
}

TEST(Model, PredictionAveragesPlainCoordinates) {
  fpf::ParticleEnsemble ens;
  ens.states.resize(3, 1);
  ens.states << 1.0, 2.0, 3.0;
  const fpf::Vec hhat = fpf::ensemble_prediction(ens, position_obs(1.0));
  EXPECT_DOUBLE_EQ(hhat(0), 2.0);
}

TEST(Model, PredictionUsesCircularMeanOnAngularCoordinates) {
  fpf::ParticleEnsemble ens;
  ens.states.resize(2, 1);
  ens.states << M_PI - 0.1, -M_PI + 0.1;
  const fpf::Vec hhat = fpf::ensemble_prediction(ens, angle_obs());
  // Plain averaging would give ~0; the circular mean stays at the cut.
  EXPECT_NEAR(std::abs(hhat(0)), M_PI, 1e-9);
}

TEST(Model, ObsDiffWrapsAngularCoordinates) {
  const fpf::ObservationModel obs = angle_obs();
  const fpf::Vec a = fpf::Vec::Constant(1, M_PI - 0.1);
  const fpf::Vec b = fpf::Vec::Constant(1, -M_PI + 0.1);
  EXPECT_NEAR(fpf::obs_diff(obs, a, b)(0), -0.2, 1e-12);
  EXPECT_NEAR(fpf::obs_diff(position_obs(1.0), a, b)(0), 2.0 * M_PI - 0.2,
              1e-12);
}

TEST(Model, IncrementResidualWrapsWithTheScaledPeriod) {
  const fpf::ObservationModel obs = angle_obs();
  const double dt = 0.01;
  const fpf::Vec pred = fpf::Vec::Constant(1, 0.4);
  // An increment displaced by a full period 2*pi*dt must leave no residual.
  const fpf::Vec dz = fpf::Vec::Constant(1, 0.4 * dt + 2.0 * M_PI * dt);
  EXPECT_NEAR(fpf::increment_residual(obs, dz, pred, dt)(0), 0.0, 1e-12);
  const fpf::Vec dz_plain = fpf::Vec::Constant(1, 0.4 * dt + 0.003);
  EXPECT_NEAR(fpf::increment_residual(obs, dz_plain, pred, dt)(0), 0.003,
              1e-12);
}

TEST(Model, SimulateTruthIsDeterministicInTheSeed) {
  const fpf::ScenarioModel sc = base_scenario();
  const auto a = fpf::simulate_truth(sc, 42);
  const auto b = fpf::simulate_truth(sc, 42);
  const auto c = fpf::simulate_truth(sc, 43);
  ASSERT_EQ(a[0].size(), 11u);
  for (std::size_t k = 0; k < a[0].size(); ++k) {
    EXPECT_EQ(a[0][k](0), b[0][k](0));
  }
  EXPECT_NE(a[0].back()(0), c[0].back()(0));
}

TEST(Model, SimulateTruthWithoutDiffusionFollowsEuler) {
  fpf::ScenarioModel sc = base_scenario();
  sc.dynamics = {dyn1(0.0, [](const fpf::Vec&) {
    return fpf::Vec::Constant(1, 2.0);
  })};
  sc.horizon = 1.0;
  sc.dt = 0.1;
  const auto path = fpf::simulate_truth(sc, 1);
  EXPECT_NEAR(path[0].back()(0), 6.0 + 2.0, 1e-12);
}

TEST(Model, ScriptedTruthOverridesTheDynamics) {
  fpf::ScenarioModel sc = base_scenario();
  sc.scripted_truth = [](int, double t) { return fpf::Vec::Constant(1, t); };
  const auto path = fpf::simulate_truth(sc, 7);
  for (std::size_t k = 0; k < path[0].size(); ++k) {
    EXPECT_DOUBLE_EQ(path[0][k](0), k * sc.dt);
  }
}

TEST(Model, FrameTargetSlotIsUniform) {
  fpf::ScenarioModel sc = base_scenario();
  sc.M = 4;
  sc.clutter.kind = fpf::ClutterKind::kUniformDisk;
  sc.clutter.radius = 2.0;
  sc.clutter.count = 3;
  const std::vector<fpf::Vec> truth = {fpf::Vec::Constant(1, 6.0)};
  std::vector<int> hits(4, 0);
  const int n = 4000;
  for (int k = 0; k < n; ++k) {
    fpf::RngStream rng(9, fpf::Stream::kFrame, k);
    const fpf::ObservationFrame f = fpf::generate_frame(sc, truth, rng, 0.01);
    EXPECT_DOUBLE_EQ(f.time, 0.01);
    int target_slots = 0;
    for (int m = 0; m < sc.M; ++m) {
      if (f.truth_assignment[m] == 0) {
        ++hits[m];
        ++target_slots;
      } else {
        EXPECT_EQ(f.truth_assignment[m], -1);
      }
    }
    EXPECT_EQ(target_slots, 1);
  }
  for (int m = 0; m < 4; ++m) EXPECT_NEAR(hits[m], n / 4, 150);
}

TEST(Model, UniformDiskClutterStaysInsideTheDisk) {
  fpf::ScenarioModel sc = base_scenario();
  sc.M = 4;
  sc.dt = 1.0;
  sc.horizon = 1.0;
  sc.observation = position_obs(1e-12);  // make the additive noise negligible
  sc.clutter.kind = fpf::ClutterKind::kUniformDisk;
  sc.clutter.radius = 2.0;
  sc.clutter.count = 3;
  const std::vector<fpf::Vec> truth = {fpf::Vec::Constant(1, 6.0)};
  for (int k = 0; k < 200; ++k) {
    fpf::RngStream rng(10, fpf::Stream::kFrame, k);
    const fpf::ObservationFrame f = fpf::generate_frame(sc, truth, rng);
    for (int m = 0; m < sc.M; ++m) {
      const double v = f.observations[m](0);  // dt = 1: observation ~ rate
      if (f.truth_assignment[m] == 0) {
        EXPECT_NEAR(v, 6.0, 1e-9);
      } else {
        EXPECT_LE(std::abs(v - 6.0), 2.0 + 1e-9);
      }
    }
  }
}

TEST(Model, WhitenoiseClutterCarriesNoSignal) {
  fpf::ScenarioModel sc = base_scenario();
  sc.M = 2;
  sc.dt = 1.0;
  sc.observation = position_obs(1e-12);
  sc.clutter.kind = fpf::ClutterKind::kGaussianWhitenoise;
  sc.clutter.count = 1;
  const std::vector<fpf::Vec> truth = {fpf::Vec::Constant(1, 6.0)};
  fpf::RngStream rng(11, fpf::Stream::kFrame, 0);
  const fpf::ObservationFrame f = fpf::generate_frame(sc, truth, rng);
  for (int m = 0; m < sc.M; ++m) {
    if (f.truth_assignment[m] == 0) {
      EXPECT_NEAR(f.observations[m](0), 6.0, 1e-9);
    } else {
      EXPECT_NEAR(f.observations[m](0), 0.0, 1e-9);
    }
  }
}

TEST(Model, MultiTargetFramePermutesTheTargets) {
  fpf::ScenarioModel sc = base_scenario();
  sc.n_targets = 2;
  sc.M = 2;
  sc.dt = 1.0;
  sc.dynamics = {dyn1(1.0), dyn1(1.0)};
  sc.observation = position_obs(1e-12);
  sc.initial_truth = {fpf::Vec::Constant(1, -5.0), fpf::Vec::Constant(1, 5.0)};
  sc.initial_ensemble = {{fpf::Vec::Zero(1), fpf::Mat::Identity(1, 1)},
                         {fpf::Vec::Zero(1), fpf::Mat::Identity(1, 1)}};
  const std::vector<fpf::Vec> truth = {fpf::Vec::Constant(1, -5.0),
                                       fpf::Vec::Constant(1, 5.0)};
  int swapped = 0;
  const int n = 2000;
  for (int k = 0; k < n; ++k) {
    fpf::RngStream rng(12, fpf::Stream::kFrame, k);
    const fpf::ObservationFrame f = fpf::generate_frame(sc, truth, rng);
    const int a0 = f.truth_assignment[0];
    const int a1 = f.truth_assignment[1];
    ASSERT_TRUE((a0 == 0 && a1 == 1) || (a0 == 1 && a1 == 0));
    EXPECT_NEAR(f.observations[0](0), truth[a0](0), 1e-9);
    EXPECT_NEAR(f.observations[1](0), truth[a1](0), 1e-9);
    if (a0 == 1) ++swapped;
  }
  EXPECT_NEAR(swapped, n / 2, 100);
}

TEST(Model, SampleEnsembleMatchesTheRequestedMoments) {
  fpf::InitialBelief init;
  init.mean = fpf::Vec(2);
  init.mean << 1.0, -2.0;
  init.cov = fpf::Mat(2, 2);
  init.cov << 2.0, 0.5, 0.5, 1.0;
  fpf::RngStream rng(77, fpf::Stream::kInit);
  const fpf::ParticleEnsemble ens = fpf::sample_ensemble(init, 60000, rng);
  const fpf::Vec mean = ens.states.colwise().mean().transpose();
  EXPECT_NEAR(mean(0), 1.0, 0.03);
  EXPECT_NEAR(mean(1), -2.0, 0.03);
  const fpf::Mat centered = ens.states.rowwise() - mean.transpose();
  const fpf::Mat cov = centered.transpose() * centered / (ens.N() - 1.0);
  EXPECT_NEAR(cov(0, 0), 2.0, 0.05);
  EXPECT_NEAR(cov(0, 1), 0.5, 0.05);
  EXPECT_NEAR(cov(1, 1), 1.0, 0.05);
}

TEST(Model, SampleEnsembleHandlesSingularCovariance) {
  fpf::InitialBelief init;
  init.mean = fpf::Vec::Zero(2);
  init.cov = fpf::Mat(2, 2);
  init.cov << 1.0, 1.0, 1.0, 1.0;  // rank one: all mass on the diagonal line
  fpf::RngStream rng(78, fpf::Stream::kInit);
  const fpf::ParticleEnsemble ens = fpf::sample_ensemble(init, 20000, rng);
  double var = 0.0;
  for (int i = 0; i < ens.N(); ++i) {
    EXPECT_NEAR(ens.states(i, 0), ens.states(i, 1), 1e-9);
    var += fpf::sq(ens.states(i, 0));
  }
  EXPECT_NEAR(var / ens.N(), 1.0, 0.05);
}

TEST(Model, BearingModelMeasuresSensorRelativeAngles) {
  const fpf::ObservationModel obs = fpf::bearing_observation_model(
      {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(2.0, 0.0)});
  EXPECT_TRUE(obs.is_angular(0));
  EXPECT_TRUE(obs.is_angular(1));

  fpf::Vec x(4);
  x << 1.0, 0.0, 1.0, 0.0;  // position (1, 1) in (x, vx, y, vy) layout
  const fpf::Vec h = obs.map(x);
  EXPECT_NEAR(h(0), M_PI / 4.0, 1e-12);
  EXPECT_NEAR(h(1), 3.0 * M_PI / 4.0, 1e-12);

  fpf::Vec above(4);
  above << 0.0, 0.0, 1.0, 0.0;
  EXPECT_NEAR(obs.map(above)(0), M_PI / 2.0, 1e-12);

  fpf::Vec at_sensor(4);
  at_sensor << 2.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(obs.map(at_sensor), std::runtime_error);
}

}  // namespace
