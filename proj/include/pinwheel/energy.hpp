#pragma once

// The energy functional of the competitive critical system in four
// dimensions (p = 2, 2* = 4):
//
//   J(u) = 1/2 sum ||u_i||^2 - 1/4 sum |u_i|_4^4 - beta/4 sum_{i != j} int u_i^2 u_j^2
//
// together with its gradient, the Nehari normalization and the analytic
// fixtures used to calibrate the discretization.

#include <string>
#include <vector>

#include "pinwheel/grid.hpp"
#include "pinwheel/poisson.hpp"
#include "pinwheel/symmetry.hpp"

namespace pinwheel {

struct SolverConfig {
  int N = 4;
  int ell = 2;
  double beta = -1.0;

  int n_r1 = 96;
  int n_r2 = 96;
  int n_phi = 32;
  double R = 20.0;

  /// Relative preconditioned gradient norm ||h||/||u|| at convergence.
  double grad_tol = 1e-4;
  /// |t* - 1| below which a state counts as Nehari-normalized.
  double nehari_tol = 1e-8;
  /// Relative L2 pinwheel consistency error allowed after re-projection.
  double equiv_tol = 1e-2;
  int max_iters = 300;
  int reproject_period = 10;
  /// Target half-mass radius r* of |u_1|^4 used by the gauge fix; 0 picks
  /// target_radius()'s default.
  double gauge_radius = 0.0;
  double armijo_c = 1e-4;
  /// Precondition with A + |beta| W sum_{j != i} u_j^2 instead of A.
  bool coupling_preconditioner = true;
  /// Inner conjugate-gradient budget for preconditioned and masked solves.
  int inner_iters = 20;
  double inner_rtol = 1e-3;
  int max_backtracks = 40;

  /// Start of a sweep: "bump" (init_seed), "sector" (sector_competitor) or
  /// "auto" for the lower-energy of the two.
  std::string seed = "auto";
  double seed_r1 = 1.5;
  double seed_r2 = 1.5;
  double seed_phi = 0.0;
  double seed_radius = 1.4;
  double seed_tilt = 0.1;

  double eta = 1e-3;
  double gradient_floor = 1e-2;
  double match_band = 0.2;

  /// r* actually used: gauge_radius if set, else 1 for ell = 1 (the bubble
  /// is resolved there and truncation is still small) and 3 for ell >= 2
  /// (pinwheel components vary on a shorter scale than their half-mass
  /// radius and need more cells).
  double target_radius() const { return gauge_radius > 0.0 ? gauge_radius : (ell == 1 ? 1.0 : 3.0); }

  double p() const { return static_cast<double>(N) / (N - 2); }
  double two_star() const { return 2.0 * N / (N - 2); }

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

struct PinwheelState {
  std::vector<Field> components;
  double beta = 0.0;
  std::vector<GaugeTransform> gauge_history;

  int ell() const { return static_cast<int>(components.size()); }
  const ReducedGrid& grid() const { return components.front().grid(); }
  const GridPtr& grid_ptr() const { return components.front().grid_ptr(); }

  PinwheelState& operator*=(double a);
  /// Componentwise this += a * d.
  PinwheelState& axpy(double a, const std::vector<Field>& d);
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double self_term = 0.0;
  double coupling = 0.0;
  double j_value = 0.0;
  double nehari_residual = 0.0;
  std::vector<double> kinetic_per_component;
};

EnergyBreakdown energy(const PinwheelState& s, const SolverConfig& cfg);

struct Direction {
  /// Coefficient-space gradient dJ/du_{i,n}.
  std::vector<Field> euclidean;
  /// Dirichlet (Sobolev) gradient A^{-1} euclidean; empty without a solver.
  std::vector<Field> sobolev;
  /// sum_i <euclidean_i, sobolev_i> = squared Dirichlet norm of the Sobolev gradient.
  double norm_sq = 0.0;
};

/// Gradient of J at s. With a solver the Sobolev-preconditioned direction
/// is also returned.
Direction gradient(const PinwheelState& s, const SolverConfig& cfg, const PoissonSolver* solver = nullptr);

struct NehariScale {
  double t = 1.0;
  EnergyBreakdown breakdown;
};

/// t* with J'(t* s)(t* s) = 0. Throws NehariInfeasible when the nonlinear
/// part of the ray is not positive.
NehariScale nehari_scale(const PinwheelState& s, const SolverConfig& cfg);

/// Scale s onto the Nehari manifold and return the breakdown of the result.
EnergyBreakdown nehari_normalize(PinwheelState& s, const SolverConfig& cfg);

using Matrix = std::vector<std::vector<double>>;

/// M[i][j] = int u_i^2 u_j^2; the diagonal holds |u_i|_4^4.
Matrix overlap_matrix(const PinwheelState& s);

/// Best constant of D^{1,2}(R^N) -> L^{2N/(N-2)}(R^N).
double sobolev_constant(int N);

/// Least energy of the single critical equation, S^{N/2} / N.
double bubble_energy(int N);

/// Standard bubble sqrt(8) eps / (eps^2 + s^2) shifted by its value at R so
/// that it vanishes on the boundary of the ball. Only N = 4 is supported.
Field bubble(int N, double eps, const GridPtr& grid);

}  // namespace pinwheel
