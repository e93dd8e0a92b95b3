#pragma once

// Nehari-manifold descent inside the pinwheel subspace, gauge fixing against
// the dilation degeneracy, and the beta-continuation driver.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pinwheel/energy.hpp"
#include "pinwheel/poisson.hpp"

namespace pinwheel {

/// Smooth bump around (seed_r1, seed_r2, seed_phi) of orbit-distance radius
/// seed_radius, with u_{j+1} = u_j o rho, each component Nehari-normalized
/// on its own. For ell = 1 the bump is centred at the origin. Throws
/// GeometryError when the rho-translates of the support would overlap.
PinwheelState init_seed(const SolverConfig& cfg, const GridPtr& grid);

/// Disjointly supported competitor: a bubble of scale gauge_radius cut to
/// the angular sector |arg(X + iY)| < pi/ell of the Hopf coordinates, tilted
/// by (1 + seed_tilt Z/s^2). Same normalization as init_seed.
PinwheelState sector_competitor(const SolverConfig& cfg, const GridPtr& grid);

/// Components u_{j+1} = u_1 o rho^j built from u_1.
PinwheelState pinwheel_from(const Field& u1, int ell);

/// max_i ||u_{sigma(i)} - u_i o rho|| / ||u_i|| in L2; 0 for ell = 1.
double pinwheel_error(const PinwheelState& s);

/// Average over the Z/ell action: v_1 = (1/ell) sum_j u_{1+j} o rho^{-j},
/// then v_{1+j} = v_1 o rho^j.
PinwheelState project_pinwheel(const PinwheelState& s);

/// Radius in s = sqrt(r1^2 + r2^2) of the ball holding half of int u^4.
double half_mass_radius(const Field& u);

/// Second moment sum_i int s^2 u_i^4 / sum_i int u_i^4 of the critical
/// mass. Scales as eps^2 under dilation and is blind to the Nehari scaling.
double scale_moment(const PinwheelState& s);

struct GaugeResult {
  PinwheelState state;
  GaugeTransform transform;
};

/// Dilate s so that the half-mass radius of |u_1|^4 becomes cfg.target_radius(),
/// then renormalize onto the Nehari manifold. Within a quarter cell of the
/// target the state is returned unchanged with epsilon = 1.
GaugeResult gauge_fix(const PinwheelState& s, const SolverConfig& cfg);

struct MinimizeOptions {
  /// Restrict to nodes with mask != 0 (zero Dirichlet data elsewhere).
  const std::vector<unsigned char>* mask = nullptr;
  bool gauge = true;
  /// Keep scale_moment fixed to first order: the discrete functional keeps
  /// decreasing under concentration, so without this the iterates drift
  /// toward grid scale between gauge fixes.
  bool hold_scale = true;
  /// Called after every accepted step with (iteration, j_value).
  std::function<void(int, double)> on_step;
};

struct MinimizeResult {
  PinwheelState state;
  EnergyBreakdown breakdown;
  int iterations = 0;
  bool converged = false;
  /// Half-mass radius fell below 4 cells despite gauge fixing.
  bool concentration = false;
  double grad_norm = 0.0;
  double equivariance_error = 0.0;
  /// Product of all gauge dilations applied during the run.
  double epsilon = 1.0;
  /// j_value after every accepted step.
  std::vector<double> j_history;
};

MinimizeResult minimize(const PinwheelState& s0, const SolverConfig& cfg, const PoissonSolver& solver,
                        const MinimizeOptions& opts = {});

struct ConcentrationScale {
  double epsilon = 0.0;
  OrbitPoint center;
};

/// Smallest radius eps such that some ball B_eps(x), x ranging over grid
/// nodes, carries int_{B_eps(x)} u^4 >= delta. Throws ThresholdError when
/// delta is not below the total mass.
ConcentrationScale concentration_scale(const Field& u, double delta);

struct TraceRecord {
  double beta = 0.0;
  double j_value = 0.0;
  double kinetic_total = 0.0;
  std::vector<double> kinetic;
  Matrix overlap;
  double overlap_max = 0.0;
  double beta_times_overlap = 0.0;
  double sup_norm = 0.0;
  double epsilon = 1.0;
  int iters = 0;
  bool converged = false;
  bool concentration = false;
  /// j_value <= competitor_bound + 1e-3.
  bool below_bound = true;
};

/// Record of one minimize result; below_bound compares with bound.
TraceRecord trace_record(const MinimizeResult& r, const SolverConfig& cfg, double bound);

struct ContinuationTrace {
  std::vector<TraceRecord> records;
  double competitor_bound = 0.0;
  std::string competitor_kind;
};

struct ContinuationOptions {
  /// Resume point: trace records already completed and the matching state.
  std::optional<ContinuationTrace> resume_trace;
  std::optional<PinwheelState> resume_state;
  /// Called after each completed beta with the record and converged state.
  std::function<void(const TraceRecord&, const PinwheelState&, std::size_t beta_index)> on_checkpoint;
  /// Maximum number of bisections of a beta step on NehariInfeasible.
  int max_bisections = 12;
};

/// Disjoint competitor used as the upper-bound estimate: the lower-energy of
/// sector_competitor and init_seed (for ell = 1 only the seed is used).
struct Competitor {
  PinwheelState state;
  double j_value = 0.0;
  std::string kind;
};
Competitor best_competitor(const SolverConfig& cfg, const GridPtr& grid);

/// v_i = (u_i - max_{j != i} u_j)^+, each normalized on its own. Disjoint
/// supports, so the result lies on the Nehari manifold for every beta and
/// inherits the pinwheel structure of s.
Competitor disjoint_competitor(const PinwheelState& s, const SolverConfig& cfg);

/// Warm-started minimize at each beta of a strictly decreasing schedule
/// beginning at or above -1. Intermediate betas inserted by bisection are
/// solved but not recorded.
ContinuationTrace beta_continuation(const SolverConfig& cfg, const std::vector<double>& schedule,
                                    const PoissonSolver& solver, const ContinuationOptions& opts = {},
                                    PinwheelState* final_state = nullptr);

struct SupNormVerdict {
  std::vector<double> sup_norms;
  double growth = 1.0;
  bool bounded = true;
};

/// Flags growth of the sup-norm by more than 2x across the trace.
SupNormVerdict sup_norm_track(const ContinuationTrace& trace);

/// max over components of max |u_i|.
double sup_norm(const PinwheelState& s);

}  // namespace pinwheel
