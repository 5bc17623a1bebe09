#pragma once

#include "fpf/pda.hpp"

#include <numeric>

namespace fpf {

// Conditional density on a uniform 1-d grid: values are node samples at
// x_k = x_min + k dx, k = 0..n_cells, normalized to unit trapezoidal mass.
struct GridDensity {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 0;
  Vec values;

  double dx() const { return (x_max - x_min) / n_cells; }
  double node(int k) const { return x_min + k * dx(); }
  int n_nodes() const { return n_cells + 1; }
};

inline double grid_integral(const GridDensity& g, const Vec& f) {
  // Trapezoid rule over the nodes.
  double s = f.sum() - 0.5 * (f(0) + f(f.size() - 1));
  return s * g.dx();
}

inline double grid_mass(const GridDensity& g) { return grid_integral(g, g.values); }

inline void validate(const GridDensity& g) {
  require(g.n_cells >= 2, "grid density: need at least 2 cells");
  require(g.x_max > g.x_min, "grid density: empty support");
  require(g.values.size() == g.n_nodes(), "grid density: node count mismatch");
  require(g.values.minCoeff() >= 0.0, "grid density: negative density");
  require(std::abs(grid_mass(g) - 1.0) <= 1e-8, "grid density: mass must be 1");
}

inline GridDensity make_grid_density(double x_min, double x_max, int n_cells,
                                     const std::function<double(double)>& pdf) {
  GridDensity g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n_cells = n_cells;
  g.values.resize(g.n_nodes());
  for (int k = 0; k < g.n_nodes(); ++k) g.values(k) = std::max(0.0, pdf(g.node(k)));
  const double mass = grid_mass(g);
  require(mass > 0.0, "grid density: zero initial mass");
  g.values /= mass;
  return g;
}

inline GridDensity gaussian_grid_density(double x_min, double x_max, int n_cells,
                                         double mean, double stddev) {
  return make_grid_density(x_min, x_max, n_cells, [=](double x) {
    return std::exp(-0.5 * sq((x - mean) / stddev));
  });
}

struct KsDiagnostics {
  double clipped_mass = 0.0;
  double boundary_mass = 0.0;
  int substeps = 0;
};

// One Euler step of the association-weighted conditional-density equation,
// operator-split:
//   transport  dp = [-(a p)' + (sigma^2/2) p''] dt      (explicit conservative
//              upwind + central diffusion, sub-stepped to the CFL limit)
//   update     p <- p [ 1 + sum_m B^m (h - hhat)'(dZ^m - hhat dt) ]
// in scaled observation coordinates, then clip negatives and renormalize.
// The multiplicative update linearizes the measurement term over dt.
inline GridDensity ks_step(const GridDensity& g, const DynamicsModel& dyn,
                           const ObservationModel& obs,
                           const AssociationBelief& beta,
                           const std::vector<Vec>& dz_all, double dt,
                           KsDiagnostics* diag = nullptr) {
  validate(g);
  validate(beta);
  require(dyn.dim_state == 1, "ks_step: grid solver is 1-d only");
  require(dt > 0.0, "ks_step: dt must be > 0");
  require(static_cast<int>(dz_all.size()) == beta.M,
          "ks_step: need one increment per observation");

  const int n = g.n_nodes();
  const double dx = g.dx();

  // Support must stay away from the boundary for the reflecting closure to be
  // a faithful approximation of the free-space equation.
  const double edge = 0.5 * dx * (g.values(0) + g.values(1)) +
                      0.5 * dx * (g.values(n - 2) + g.values(n - 1));
  if (diag) diag->boundary_mass = edge;
  if (edge >= 1e-6) {
    throw std::runtime_error("ks_step: density mass " + str(edge) +
                             " at the grid boundary; enlarge the grid");
  }

  Vec a(n);
  Vec one(1);
  for (int k = 0; k < n; ++k) {
    one(0) = g.node(k);
    a(k) = dyn.drift(one)(0);
  }
  const double sigma = dyn.diffusion_scale(0);
  const double D = 0.5 * sq(sigma);
  const double rate = a.cwiseAbs().maxCoeff() / dx + sq(sigma) / sq(dx);
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt * rate / 0.9)));
  const double dts = dt / substeps;
  if (diag) diag->substeps = substeps;

  Vec p = g.values;
  Vec flux(n - 1);
  for (int s = 0; s < substeps; ++s) {
    for (int k = 0; k + 1 < n; ++k) {
      const double ah = 0.5 * (a(k) + a(k + 1));
      const double adv = ah > 0.0 ? ah * p(k) : ah * p(k + 1);
      flux(k) = adv - D * (p(k + 1) - p(k)) / dx;  // zero flux at both ends
    }
    Vec pn = p;
    for (int k = 0; k < n; ++k) {
      const double in = k > 0 ? flux(k - 1) : 0.0;
      const double out = k + 1 < n ? flux(k) : 0.0;
      pn(k) -= dts / dx * (out - in);
    }
    p = std::move(pn);
  }

  // Measurement update with the grid's own prediction hbar = Int h p dx.
  Mat hs(n, obs.dim_obs);
  for (int k = 0; k < n; ++k) {
    one(0) = g.node(k);
    hs.row(k) = obs.map(one).cwiseQuotient(obs.noise_scale).transpose();
  }
  GridDensity work = g;
  work.values = p;
  Vec hbar(obs.dim_obs);
  for (int j = 0; j < obs.dim_obs; ++j) hbar(j) = grid_integral(work, hs.col(j));

  Vec gainv = Vec::Zero(obs.dim_obs);  // sum_m B^m (dz~^m - hbar dt)
  for (int m = 1; m <= beta.M; ++m) {
    gainv += beta.beta(m) * (dz_all[m - 1].cwiseQuotient(obs.noise_scale) - hbar * dt);
  }
  for (int k = 0; k < n; ++k) {
    p(k) *= 1.0 + (hs.row(k).transpose() - hbar).dot(gainv);
  }

  double clipped = 0.0;
  Vec neg = (-p).cwiseMax(0.0);
  work.values = neg;
  clipped = grid_integral(work, neg);
  if (diag) diag->clipped_mass = clipped;
  p = p.cwiseMax(0.0);

  GridDensity out = g;
  out.values = p;
  const double mass = grid_mass(out);
  if (mass <= 0.0) {
    throw std::runtime_error("ks_step: density collapsed to zero mass");
  }
  out.values /= mass;
  return out;
}

// L1 distance between the grid CDF and the ensemble's empirical CDF, both
// evaluated at the grid nodes and integrated by the trapezoid rule. Units of
// the state coordinate.
inline double distribution_distance(const GridDensity& g,
                                    const ParticleEnsemble& ens) {
  require(ens.dim() == 1, "distribution_distance: ensemble must be 1-d");
  require(ens.N() >= 1, "distribution_distance: empty ensemble");
  const int n = g.n_nodes();
  const double dx = g.dx();

  Vec cdf(n);
  cdf(0) = 0.0;
  for (int k = 1; k < n; ++k) {
    cdf(k) = cdf(k - 1) + 0.5 * dx * (g.values(k - 1) + g.values(k));
  }
  const double total = cdf(n - 1);
  require(total > 0.0, "distribution_distance: zero-mass density");

  std::vector<double> xs(ens.N());
  for (int i = 0; i < ens.N(); ++i) xs[i] = ens.states(i, 0);
  std::sort(xs.begin(), xs.end());

  double dist = 0.0;
  std::size_t idx = 0;
  for (int k = 0; k < n; ++k) {
    const double x = g.node(k);
    while (idx < xs.size() && xs[idx] <= x) ++idx;
    const double femp = static_cast<double>(idx) / ens.N();
    const double w = (k == 0 || k == n - 1) ? 0.5 * dx : dx;
    dist += w * std::abs(cdf(k) / total - femp);
  }
  return dist;
}

inline double grid_mean(const GridDensity& g) {
  Vec xf(g.n_nodes());
  for (int k = 0; k < g.n_nodes(); ++k) xf(k) = g.node(k) * g.values(k);
  return grid_integral(g, xf);
}

inline double grid_variance(const GridDensity& g) {
  const double mu = grid_mean(g);
  Vec xf(g.n_nodes());
  for (int k = 0; k < g.n_nodes(); ++k) xf(k) = sq(g.node(k) - mu) * g.values(k);
  return grid_integral(g, xf);
}

}  // namespace fpf
