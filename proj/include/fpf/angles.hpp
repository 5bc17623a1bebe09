#pragma once

#include "fpf/common.hpp"

namespace fpf {

// Bearings live on the circle with the atan2 convention: values in (-pi, pi].

inline double wrap_angle(double a) {
  double w = std::fmod(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  if (w > M_PI) w -= 2.0 * M_PI;
  return w;
}

// Wrap into (-period/2, period/2]. Observation increments of an angular
// channel are defined modulo 2*pi*dt, so their residuals wrap with that
// period, not 2*pi.
inline double wrap_period(double x, double period) {
  double w = std::fmod(x, period);
  if (w <= -0.5 * period) w += period;
  if (w > 0.5 * period) w -= period;
  return w;
}

// Direction of the mean resultant vector. Undefined (resultant ~ 0) inputs
// fall back to 0 rather than erroring; callers with degenerate bearing
// spreads get an arbitrary but finite value.
inline double circular_mean(const std::vector<double>& angles) {
  double s = 0.0, c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return std::atan2(s, c);
}

inline double circular_mean_weighted(const std::vector<double>& angles,
                                     const std::vector<double>& weights) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    s += weights[i] * std::sin(angles[i]);
    c += weights[i] * std::cos(angles[i]);
  }
  return std::atan2(s, c);
}

}  // namespace fpf
