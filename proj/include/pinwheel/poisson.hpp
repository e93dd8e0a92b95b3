#pragma once

// Discrete Dirichlet problem A x = b for the finite-volume stiffness matrix
// of a ReducedGrid. The coefficients do not depend on phi, so a real
// Fourier transform in phi splits A into n_phi/2 + 1 independent
// two-dimensional SPD systems, each factored once with a sparse Cholesky.

#include <memory>
#include <span>
#include <vector>

#include "pinwheel/grid.hpp"

namespace pinwheel {

class PoissonSolver {
 public:
  explicit PoissonSolver(GridPtr grid, double residual_tol = 1e-8);
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  const ReducedGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  /// x = A^{-1} b. Throws LinearSolveError when the relative residual
  /// exceeds the configured tolerance.
  void solve(std::span<const double> rhs, std::span<double> x) const;
  Field solve(const Field& rhs) const;

  struct IterativeStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
  };

  /// Conjugate gradients for (A + diag(shift)) x = b restricted to nodes
  /// with mask != 0 (zero Dirichlet data elsewhere), preconditioned with the
  /// exact inverse of A. Empty shift or mask mean zero shift and no mask.
  /// Stops after max_iter iterations without throwing; every iterate is a
  /// descent direction for the quadratic, so truncated solves stay usable.
  IterativeStats solve_shifted(std::span<const double> rhs, std::span<const double> shift,
                               std::span<const unsigned char> mask, std::span<double> x, double rtol,
                               int max_iter) const;

  /// solve_shifted with zero shift; throws LinearSolveError without
  /// convergence.
  IterativeStats solve_masked(std::span<const double> rhs, std::span<const unsigned char> mask,
                              std::span<double> x, double rtol = 1e-8, int max_iter = 500) const;

 private:
  void solve_unchecked(std::span<const double> rhs, std::span<double> x) const;

  struct Impl;
  GridPtr grid_;
  double residual_tol_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pinwheel
