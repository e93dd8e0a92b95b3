#pragma once

// Post-processing of converged pinwheel states: support partition, interface
// and singular cells, per-cell Dirichlet re-solves, the optimality summary
// and the alternating-sign (nodal) field.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pinwheel/energy.hpp"
#include "pinwheel/poisson.hpp"
#include "pinwheel/solver.hpp"

namespace pinwheel {

enum class CellClass : std::uint8_t {
  Outside,     // centre outside the ball; not part of the partition
  Labeled,
  Unassigned,  // before classify_interface
  Interface,   // regular part of the free boundary
  Singular,
};

struct InterfaceStats {
  double gradient_floor = 0.0;
  /// Unlabeled cells whose two largest one-sided gradients (from different
  /// labels) agree within the matching band.
  int matched = 0;
  /// Above the floor but outside the band, or touching fewer than two
  /// labels. Still counted as interface so that the classes cover the grid.
  int unmatched = 0;
  int singular = 0;
  /// Histogram of min/max one-sided gradient ratios, ten bins over [0, 1].
  std::array<int, 10> ratio_histogram{};
  /// Same ratio across faces between cells of different labels.
  int label_faces = 0;
  int label_faces_matched = 0;
};

struct Partition {
  GridPtr grid;
  int ell = 0;
  /// 1..ell on labeled cells, 0 elsewhere.
  std::vector<std::uint8_t> label;
  std::vector<CellClass> cls;
  /// max_i |grad u_i| per cell.
  std::vector<double> max_gradient;
  double eta = 0.0;
  InterfaceStats interface;

  std::size_t count(CellClass c) const;
  std::size_t label_count(int i) const;
  /// Quadrature measure of the cells carrying label i.
  double label_measure(int i) const;
};

/// Byte codes of the partition dump.
inline constexpr std::uint8_t kInterfaceCode = 254;
inline constexpr std::uint8_t kSingularCode = 255;
std::uint8_t cell_code(const Partition& p, std::size_t n);

/// Label cells by strict argmax above eta times the global maximum. Throws
/// DegeneratePartition when a label class is empty.
Partition extract_partition(const PinwheelState& s, double eta);

/// |grad u| at every node in the ambient metric.
Field gradient_magnitude(const Field& u);

/// Split unassigned cells into interface and singular cells; see
/// InterfaceStats for the rules.
Partition classify_interface(const PinwheelState& s, Partition part, double gradient_floor, double match_band);

/// Measure of {label sigma(i)} xor rho^{-1}{label i}, relative to the measure
/// of label sigma(i). Labels of image points are read from the nearest
/// cell.
double partition_symmetry_defect(const Partition& p, int i);

struct CellEnergy {
  int label = 0;
  /// (1/N) ||v||^2 of the single-equation minimizer on the cell.
  double cell_energy = 0.0;
  /// (1/N) ||u_i||^2 of the system component.
  double system_energy = 0.0;
  double relative_difference = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimize the single equation over functions supported on the cells with
/// label i (1-based), starting from u_i. Throws PreconditionError when the
/// label is empty or out of range.
CellEnergy solve_dirichlet_cell(const PinwheelState& s, const Partition& part, int i, const SolverConfig& cfg,
                                const PoissonSolver& solver);

struct OptimalityReport {
  double sum_cell_energy = 0.0;
  /// Last j_value of the sweep.
  double c_ell_infinity_estimate = 0.0;
  /// Smallest energy among the disjoint competitors that were evaluated.
  double competitor_bound = 0.0;
  std::string competitor_kind;
  double relative_gap = 0.0;
  /// relative_gap <= 5%.
  bool chain_ok = false;
  /// c_ell_infinity_estimate <= competitor_bound + 1e-3.
  bool bound_ok = false;
  std::vector<CellEnergy> cells;
};

/// final_competitor, when given, is compared with the trace's bound and the
/// smaller one is reported.
OptimalityReport optimality_report(const ContinuationTrace& trace, const std::vector<CellEnergy>& cells,
                                   const Competitor* final_competitor = nullptr);

struct NodalReport {
  Field field;
  /// ||w o rho + w|| / ||w|| in L2; only meaningful for even ell.
  double antisymmetry_defect = 0.0;
  /// Preconditioned residual of -Delta w = |w|^2 w, relative to ||w||_A.
  double pde_residual = 0.0;
  int positive_components = 0;
  int negative_components = 0;
  /// ell == 2 and the defect is within the equivariance tolerance.
  bool antisymmetry_asserted = false;
  bool antisymmetry_ok = true;
  /// ell > 2: the diagnostics are reported only.
  bool open_question = false;
  /// ell odd and > 1.
  bool parity_warning = false;
};

/// w = sum_i (-1)^(i+1) u_i with its diagnostics. Components of {w > 0}
/// and {w < 0} are counted on cells with |w| > eta max |w|.
NodalReport nodal_build(const PinwheelState& s, const SolverConfig& cfg, const PoissonSolver& solver);

/// Connected components of a cell set under face adjacency, periodic in phi
/// and continued through the axes.
int count_components(const ReducedGrid& g, const std::vector<std::uint8_t>& in);

enum class Distinctness { Distinct, Inconclusive };
std::string to_string(Distinctness d);

struct DistinctnessVerdict {
  Distinctness verdict = Distinctness::Inconclusive;
  /// Fraction of high-amplitude points of w_l with w_l(rho_m x) ~ +w_l(x).
  double symmetric_fraction = 0.0;
  int samples = 0;
  bool conflict_witnessed = false;
  std::string reason;
};

/// Tests whether w_l (claimed nodal solution for l = n m, n even) can be a
/// dilate of w_m. See the implementation for the per-parity rule.
DistinctnessVerdict distinctness_check(const Field& w_l, const Field& w_m, int l, int m,
                                       double amplitude = 0.1, double tolerance = 0.1);

}  // namespace pinwheel
