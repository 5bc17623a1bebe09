#pragma once

#include "fpf/linear.hpp"
#include "fpf/model.hpp"

#include <optional>

namespace fpf {

// A built-in scenario: the generative model plus everything the runner and
// the metrics need to know about it.
struct Scenario {
  ScenarioModel model;
  std::optional<LinearModel> linear;  // set when dynamics/observation are linear
  std::vector<int> position_coords;
  std::vector<int> velocity_coords;
  std::string description;
  int default_particles = 1000;
  bool supports_ghost_init = false;
  std::vector<InitialBelief> ghost_init;  // per target, when supported
};

namespace scenariodetail {

// dx = v dt, dv = sigma dB (white-noise acceleration in 1-d).
inline DynamicsModel wna_1d(double sigma_v) {
  DynamicsModel dyn;
  dyn.dim_state = 2;
  dyn.drift = [](const Vec& x) {
    Vec a(2);
    a << x(1), 0.0;
    return a;
  };
  dyn.diffusion_scale = Vec(2);
  dyn.diffusion_scale << 0.0, sigma_v;
  return dyn;
}

// Planar white-noise acceleration on state (x, vx, y, vy).
inline DynamicsModel wna_2d(double sigma_v) {
  DynamicsModel dyn;
  dyn.dim_state = 4;
  dyn.drift = [](const Vec& x) {
    Vec a(4);
    a << x(1), 0.0, x(3), 0.0;
    return a;
  };
  dyn.diffusion_scale = Vec(4);
  dyn.diffusion_scale << 0.0, sigma_v, 0.0, sigma_v;
  return dyn;
}

inline ObservationModel position_observation_1d(double sigma_w) {
  ObservationModel obs;
  obs.dim_obs = 1;
  obs.map = [](const Vec& x) {
    Vec h(1);
    h << x(0);
    return h;
  };
  obs.noise_scale = Vec::Constant(1, sigma_w);
  return obs;
}

inline LinearModel wna_linear_model(double sigma_v, double sigma_w) {
  LinearModel lm;
  lm.A = Mat::Zero(2, 2);
  lm.A(0, 1) = 1.0;
  lm.H = Mat::Zero(1, 2);
  lm.H(0, 0) = 1.0;
  lm.process_noise = Vec(2);
  lm.process_noise << 0.0, sigma_v;
  lm.observation_noise = Vec::Constant(1, sigma_w);
  return lm;
}

inline InitialBelief belief(const Vec& mean, const Vec& var_diag) {
  InitialBelief b;
  b.mean = mean;
  b.cov = var_diag.asDiagonal();
  return b;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

// Single target in uniform-disk clutter: position-only observations of a
// near-constant-velocity target, three false detections per frame.
inline Scenario single_clutter() {
  Scenario s;
  s.model.name = "single-clutter";
  s.model.dynamics = {wna_1d(1.0)};
  s.model.observation = position_observation_1d(0.06);
  s.model.clutter.kind = ClutterKind::kUniformDisk;
  s.model.clutter.radius = 2.0;
  s.model.clutter.count = 3;
  s.model.n_targets = 1;
  s.model.M = 4;
  s.model.horizon = 1.0;
  s.model.dt = 0.01;
  s.model.q = 10.0;
  s.model.initial_truth = {vec2(0.0, 6.0)};
  s.model.initial_ensemble = {belief(vec2(0.0, 6.0), vec2(0.1, 0.05))};
  s.linear = wna_linear_model(1.0, 0.06);
  s.position_coords = {0};
  s.velocity_coords = {1};
  s.description =
      "single near-constant-velocity target, position observations, "
      "3 uniform-disk false detections per frame";
  s.default_particles = 1000;
  return s;
}

// Small linear-Gaussian setup used by the verification suites: one target,
// one white-noise clutter channel, unit observation noise.
inline Scenario linear_verification() {
  Scenario s;
  s.model.name = "linear-verification";
  s.model.dynamics = {wna_1d(1.0)};
  s.model.observation = position_observation_1d(1.0);
  s.model.clutter.kind = ClutterKind::kGaussianWhitenoise;
  s.model.clutter.count = 1;
  s.model.n_targets = 1;
  s.model.M = 2;
  s.model.horizon = 1.0;
  s.model.dt = 0.01;
  s.model.q = 1.0;
  s.model.initial_truth = {vec2(0.0, 1.0)};
  s.model.initial_ensemble = {belief(vec2(0.0, 1.0), vec2(0.1, 0.1))};
  s.linear = wna_linear_model(1.0, 1.0);
  s.position_coords = {0};
  s.velocity_coords = {1};
  s.description =
      "linear-Gaussian target with one white-noise clutter channel; "
      "reference setup for the oracle comparisons";
  s.default_particles = 1000;
  return s;
}

// Two crossing-bearing targets observed by two fixed sensors. The sensor
// positions are placed so the wrongly-paired bearings from the initial
// configuration intersect exactly at (0, 20), the classic ghost position.
// They also sit well below the flight corridor: bearings are singular at a
// sensor, and the white-noise-acceleration truth diffuses several units
// sideways by the end of a run, so a sensor near the targets' final altitude
// would occasionally be overflown at point-blank range.
inline Scenario ghost_two_target() {
  const double sx = 100.0 / 3.0;
  const double sy = -30.0;
  Scenario s;
  s.model.name = "ghost-two-target";
  s.model.dynamics = {wna_2d(0.5), wna_2d(0.5)};
  s.model.observation = bearing_observation_model(
      {Eigen::Vector2d(-sx, sy), Eigen::Vector2d(sx, sy)});
  s.model.observation.noise_scale = Vec::Constant(2, 0.01);
  s.model.n_targets = 2;
  s.model.M = 2;
  s.model.horizon = 10.0;
  s.model.dt = 0.01;
  s.model.q = 10.0;
  s.model.initial_truth = {vec4(-20.0, 0.0, 50.0, -5.0),
                           vec4(20.0, 0.0, 50.0, -5.0)};
  const Vec var = vec4(10.0, 1.0, 10.0, 1.0);
  s.model.initial_ensemble = {belief(s.model.initial_truth[0], var),
                              belief(s.model.initial_truth[1], var)};
  s.position_coords = {0, 2};
  s.velocity_coords = {1, 3};
  s.description =
      "two descending targets, two bearing-only sensors; mis-paired bearings "
      "triangulate a ghost at (0, 20); supports ghost initialization";
  s.default_particles = 200;
  s.supports_ghost_init = true;
  s.ghost_init = {belief(vec4(0.0, 0.0, 20.0, -5.0), var),
                  belief(vec4(0.0, 0.0, 20.0, -5.0), var)};
  return s;
}

// Track coalescence: two targets approach head-on from +-750 at speed 75,
// stop when the gap closes to 50, hold, and depart at t=30 back the way they
// came. Truth is scripted; the filters model the motion as white-noise
// acceleration and must keep the tracks apart through the close encounter.
inline Scenario coalescence() {
  Scenario s;
  s.model.name = "coalescence";
  s.model.dynamics = {wna_1d(25.0), wna_1d(25.0)};
  s.model.observation = position_observation_1d(10.0);
  s.model.n_targets = 2;
  s.model.M = 2;
  s.model.horizon = 40.0;
  s.model.dt = 0.05;
  s.model.q = 10.0;
  s.model.initial_truth = {vec2(-750.0, 75.0), vec2(750.0, -75.0)};
  const Vec var = vec2(100.0, 10.0);
  s.model.initial_ensemble = {belief(s.model.initial_truth[0], var),
                              belief(s.model.initial_truth[1], var)};
  const double t_stop = 29.0 / 3.0;  // gap reaches 50 at +-25
  const double t_depart = 30.0;
  s.model.scripted_truth = [t_stop, t_depart](int target, double t) {
    const double sign = target == 0 ? 1.0 : -1.0;
    Vec x(2);
    if (t < t_stop) {
      x << sign * (-750.0 + 75.0 * t), sign * 75.0;
    } else if (t < t_depart) {
      x << sign * -25.0, 0.0;
    } else {
      x << sign * (-25.0 - 75.0 * (t - t_depart)), sign * -75.0;
    }
    return x;
  };
  s.position_coords = {0};
  s.velocity_coords = {1};
  s.description =
      "two targets approach head-on, hold at gap 50, then separate; "
      "stress test for track coalescence";
  s.default_particles = 1000;
  return s;
}

}  // namespace scenariodetail

inline std::vector<std::string> scenario_names() {
  return {"single-clutter", "linear-verification", "ghost-two-target",
          "coalescence"};
}

inline Scenario make_scenario(const std::string& name) {
  if (name == "single-clutter") return scenariodetail::single_clutter();
  if (name == "linear-verification") return scenariodetail::linear_verification();
  if (name == "ghost-two-target") return scenariodetail::ghost_two_target();
  if (name == "coalescence") return scenariodetail::coalescence();
  throw std::invalid_argument("unknown scenario '" + name +
                              "'; run `list` for the available names");
}

// Names + one-line descriptions, stable order.
inline std::vector<std::pair<std::string, std::string>> list_scenarios() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& name : scenario_names()) {
    out.emplace_back(name, make_scenario(name).description);
  }
  return out;
}

}  // namespace fpf
