#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Per-particle standard normal draws, keyed by particle index. Step functions
// take this instead of a generator object so tests can inject permuted or
// frozen noise and so draws stay independent of evaluation order.
using NoiseFn = std::function<Vec(int)>;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline double sq(double x) { return x * x; }

// log(sum exp(v_i)); returns -inf for empty input or all -inf entries.
inline double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace fpf
