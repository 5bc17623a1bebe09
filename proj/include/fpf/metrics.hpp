#pragma once

#include "fpf/common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <vector>

namespace fpf {

// One simulation run: truth and estimate trajectories per target, sampled on
// a shared time axis, plus the association weights the filter produced.
struct RunRecord {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Mat> truth;      // per target, (n_times x dim_state)
  std::vector<Mat> estimate;   // per target, (n_times x dim_state)
  Mat association_trace;       // n_times rows; columns are filter weights
  std::vector<int> position_coords;
  std::vector<int> velocity_coords;

  int n_targets() const { return static_cast<int>(truth.size()); }
  int n_times() const { return static_cast<int>(times.size()); }
};

inline void validate(const RunRecord& r) {
  require(!r.times.empty(), "run record: empty time axis");
  require(!r.truth.empty(), "run record: no targets");
  require(r.truth.size() == r.estimate.size(),
          "run record: truth/estimate target counts differ");
  require(!r.position_coords.empty(), "run record: no position coordinates");
  for (int n = 0; n < r.n_targets(); ++n) {
    require(r.truth[n].rows() == r.n_times() && r.estimate[n].rows() == r.n_times(),
            "run record: trajectory length mismatch");
    require(r.truth[n].cols() == r.estimate[n].cols(),
            "run record: state dimension mismatch");
  }
  for (std::size_t k = 1; k < r.times.size(); ++k) {
    require(r.times[k] > r.times[k - 1], "run record: times must increase");
  }
}

namespace metricsdetail {

inline double coord_sq_error(const Mat& a, const Mat& b, int row,
                             const std::vector<int>& coords) {
  double s = 0.0;
  for (int c : coords) s += sq(a(row, c) - b(row, c));
  return s;
}

}  // namespace metricsdetail

// Match estimate tracks to truth tracks by full-state error at the start of
// the run, held fixed for the whole run. Exhaustive over permutations; ties
// resolve to the lexicographically smallest assignment. Assignments whose
// start cost ties the cheapest within 10% carry no identity information
// (tracks launched from a shared point, e.g. a ghost hypothesis, differ at
// t=0 only by initialization jitter); those ties are broken by whole-record
// error instead. Returns perm with estimate[perm[n]] matched to truth[n].
inline std::vector<int> resolve_assignment(const RunRecord& r) {
  validate(r);
  const int T = r.n_targets();
  std::vector<int> perm(T);
  for (int n = 0; n < T; ++n) perm[n] = n;
  std::vector<int> all(r.truth[0].cols());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<int>(c);

  std::vector<std::vector<int>> perms;
  std::vector<double> start_cost;
  do {
    double cost = 0.0;
    for (int n = 0; n < T; ++n) {
      cost += metricsdetail::coord_sq_error(r.truth[n], r.estimate[perm[n]], 0, all);
    }
    perms.push_back(perm);
    start_cost.push_back(cost);
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double cheapest = *std::min_element(start_cost.begin(), start_cost.end());
  const double tie_band = 1.1 * cheapest + 1e-12;
  std::vector<int> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < perms.size(); ++g) {
    if (start_cost[g] > tie_band) continue;
    double total = 0.0;
    for (int n = 0; n < T; ++n) {
      for (int k = 0; k < r.n_times(); ++k) {
        total += metricsdetail::coord_sq_error(r.truth[n], r.estimate[perms[g][n]], k, all);
      }
    }
    if (total < best_cost) {
      best_cost = total;
      best = perms[g];
    }
  }
  return best;
}

// Position RMSE at each time point, pooled over runs and targets.
inline std::vector<double> rmse_curve(const std::vector<RunRecord>& records) {
  require(!records.empty(), "rmse_curve: no records");
  const int K = records[0].n_times();
  for (const auto& r : records) {
    validate(r);
    require(r.n_times() == K, "rmse_curve: records have different time axes");
    require(r.times == records[0].times,
            "rmse_curve: records have different time axes");
  }
  std::vector<double> out(K, 0.0);
  int pool = 0;
  for (const auto& r : records) pool += r.n_targets();
  for (const auto& r : records) {
    const std::vector<int> perm = resolve_assignment(r);
    for (int n = 0; n < r.n_targets(); ++n) {
      for (int k = 0; k < K; ++k) {
        out[k] += metricsdetail::coord_sq_error(r.truth[n], r.estimate[perm[n]], k,
                                                r.position_coords);
      }
    }
  }
  for (int k = 0; k < K; ++k) out[k] = std::sqrt(out[k] / pool);
  return out;
}

// Time-averaged RMSE: sqrt of the trapezoidal mean of RMSE(t)^2.
inline double avg_rmse(const std::vector<double>& times,
                       const std::vector<double>& curve) {
  require(times.size() == curve.size(), "avg_rmse: size mismatch");
  require(times.size() >= 2, "avg_rmse: need at least two samples");
  double acc = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    acc += 0.5 * (sq(curve[k - 1]) + sq(curve[k])) * (times[k] - times[k - 1]);
  }
  return std::sqrt(acc / (times.back() - times.front()));
}

inline double avg_rmse(const std::vector<RunRecord>& records) {
  return avg_rmse(records[0].times, rmse_curve(records));
}

// Same average restricted to times in [t0, t1].
inline double avg_rmse_window(const std::vector<RunRecord>& records, double t0,
                              double t1) {
  const std::vector<double> curve = rmse_curve(records);
  const auto& times = records[0].times;
  std::vector<double> ts, cs;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= t0 - 1e-12 && times[k] <= t1 + 1e-12) {
      ts.push_back(times[k]);
      cs.push_back(curve[k]);
    }
  }
  require(ts.size() >= 2, "avg_rmse_window: window too narrow for the time axis");
  return avg_rmse(ts, cs);
}

// A run keeps track when every target's time-averaged position error
// sqrt((1/T) integral of |err|^2 dt) stays within 9 sigma_w of the truth.
inline bool track_ok(const RunRecord& r, double sigma_w) {
  validate(r);
  require(sigma_w > 0.0, "track_ok: sigma_w must be > 0");
  require(r.n_times() >= 2, "track_ok: need at least two samples");
  const std::vector<int> perm = resolve_assignment(r);
  const double span = r.times.back() - r.times.front();
  for (int n = 0; n < r.n_targets(); ++n) {
    double acc = 0.0;
    for (int k = 1; k < r.n_times(); ++k) {
      const double a = metricsdetail::coord_sq_error(r.truth[n], r.estimate[perm[n]],
                                                     k - 1, r.position_coords);
      const double b = metricsdetail::coord_sq_error(r.truth[n], r.estimate[perm[n]],
                                                     k, r.position_coords);
      acc += 0.5 * (a + b) * (r.times[k] - r.times[k - 1]);
    }
    if (std::sqrt(acc / span) > 9.0 * sigma_w) return false;
  }
  return true;
}

// Fraction of runs that kept track.
inline double tracks_ok(const std::vector<RunRecord>& records, double sigma_w) {
  require(!records.empty(), "tracks_ok: no records");
  int ok = 0;
  for (const auto& r : records) ok += track_ok(r, sigma_w) ? 1 : 0;
  return static_cast<double>(ok) / records.size();
}

}  // namespace fpf
