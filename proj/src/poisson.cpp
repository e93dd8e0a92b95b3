#include "pinwheel/poisson.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>
#include <string>

#include "pinwheel/errors.hpp"
#include "pinwheel/kernels.hpp"

namespace pinwheel {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Cholesky = Eigen::SimplicialLLT<SparseMatrix>;

struct PoissonSolver::Impl {
  int n_unknowns = 0;
  std::vector<int> unknown_of_plane;  // -1 for inactive columns
  std::vector<int> plane_of_unknown;
  std::vector<double> basis;  // basis[k * n_phi + q], orthonormal real Fourier basis
  std::vector<int> mode_of_column;
  std::vector<std::unique_ptr<Cholesky>> factors;  // one per mode m = 0..n_phi/2
};

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

}  // namespace

PoissonSolver::PoissonSolver(GridPtr grid, double residual_tol)
    : grid_(std::move(grid)), residual_tol_(residual_tol), impl_(std::make_unique<Impl>()) {
  const auto& g = *grid_;
  auto& im = *impl_;
  const int np = g.n_phi();

  im.unknown_of_plane.assign(g.plane_size(), -1);
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j)
      if (g.active(i, j)) {
        im.unknown_of_plane[g.plane_index(i, j)] = im.n_unknowns++;
        im.plane_of_unknown.push_back(static_cast<int>(g.plane_index(i, j)));
      }

  im.basis.assign(static_cast<std::size_t>(np) * np, 0.0);
  im.mode_of_column.assign(np, 0);
  const double c0 = 1.0 / std::sqrt(static_cast<double>(np));
  const double c1 = std::sqrt(2.0 / np);
  for (int k = 0; k < np; ++k) {
    im.basis[k * np + 0] = c0;
    for (int m = 1; m < np / 2; ++m) {
      const double a = kTwoPi * m * k / np;
      im.basis[k * np + 2 * m - 1] = c1 * std::cos(a);
      im.basis[k * np + 2 * m] = c1 * std::sin(a);
    }
    im.basis[k * np + np - 1] = (k % 2 == 0 ? c0 : -c0);
  }
  for (int m = 1; m < np / 2; ++m) im.mode_of_column[2 * m - 1] = im.mode_of_column[2 * m] = m;
  im.mode_of_column[np - 1] = np / 2;

  // Radial part plus lambda_m times the angular coefficient.
  for (int m = 0; m <= np / 2; ++m) {
    const double lambda = 2.0 - 2.0 * std::cos(kTwoPi * m / np);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(im.n_unknowns) * 5);
    for (int u = 0; u < im.n_unknowns; ++u) {
      const int p = im.plane_of_unknown[u];
      const int i = p / g.n_r2();
      const int j = p % g.n_r2();
      double diag = lambda * g.coef_phi(i, j) + g.coef_r1(i, j) + g.coef_r2(i, j);
      if (i > 0) {
        const double c = g.coef_r1(i - 1, j);
        diag += c;
        trips.emplace_back(u, im.unknown_of_plane[g.plane_index(i - 1, j)], -c);
      }
      if (i + 1 < g.n_r1() && g.active(i + 1, j))
        trips.emplace_back(u, im.unknown_of_plane[g.plane_index(i + 1, j)], -g.coef_r1(i, j));
      if (j > 0) {
        const double c = g.coef_r2(i, j - 1);
        diag += c;
        trips.emplace_back(u, im.unknown_of_plane[g.plane_index(i, j - 1)], -c);
      }
      if (j + 1 < g.n_r2() && g.active(i, j + 1))
        trips.emplace_back(u, im.unknown_of_plane[g.plane_index(i, j + 1)], -g.coef_r2(i, j));
      trips.emplace_back(u, u, diag);
    }
    SparseMatrix a(im.n_unknowns, im.n_unknowns);
    a.setFromTriplets(trips.begin(), trips.end());
    auto chol = std::make_unique<Cholesky>(a);
    if (chol->info() != Eigen::Success)
      throw LinearSolveError("PoissonSolver: Cholesky factorization failed for mode " + std::to_string(m));
    im.factors.push_back(std::move(chol));
  }
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

void PoissonSolver::solve_unchecked(std::span<const double> rhs, std::span<double> x) const {
  const auto& g = *grid_;
  const auto& im = *impl_;
  const int np = g.n_phi();
  const int nu = im.n_unknowns;

  // Forward transform: modal[q][u]
  std::vector<double> modal(static_cast<std::size_t>(np) * nu, 0.0);
#pragma omp parallel for schedule(static)
  for (int u = 0; u < nu; ++u) {
    const std::size_t base = static_cast<std::size_t>(im.plane_of_unknown[u]) * np;
    for (int q = 0; q < np; ++q) {
      double s = 0.0;
      for (int k = 0; k < np; ++k) s += im.basis[k * np + q] * rhs[base + k];
      modal[static_cast<std::size_t>(q) * nu + u] = s;
    }
  }

#pragma omp parallel for schedule(dynamic)
  for (int q = 0; q < np; ++q) {
    Eigen::Map<Eigen::VectorXd> col(modal.data() + static_cast<std::size_t>(q) * nu, nu);
    Eigen::VectorXd sol = im.factors[im.mode_of_column[q]]->solve(col);
    col = sol;
  }

  std::fill(x.begin(), x.end(), 0.0);
#pragma omp parallel for schedule(static)
  for (int u = 0; u < nu; ++u) {
    const std::size_t base = static_cast<std::size_t>(im.plane_of_unknown[u]) * np;
    for (int k = 0; k < np; ++k) {
      double s = 0.0;
      for (int q = 0; q < np; ++q) s += im.basis[k * np + q] * modal[static_cast<std::size_t>(q) * nu + u];
      x[base + k] = s;
    }
  }
}

void PoissonSolver::solve(std::span<const double> rhs, std::span<double> x) const {
  solve_unchecked(rhs, x);
  std::vector<double> r(rhs.size());
  kernels::omp::apply_stiffness(*grid_, x, r);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < r.size(); ++n) {
    if (!grid_->active_node(n)) continue;
    const double d = r[n] - rhs[n];
    num += d * d;
    den += rhs[n] * rhs[n];
  }
  const double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  if (!(rel <= residual_tol_))
    throw LinearSolveError("PoissonSolver: relative residual " + std::to_string(rel) + " above tolerance");
}

Field PoissonSolver::solve(const Field& rhs) const {
  Field x(grid_);
  solve(rhs.values(), x.values());
  return x;
}

PoissonSolver::IterativeStats PoissonSolver::solve_shifted(std::span<const double> rhs,
                                                           std::span<const double> shift,
                                                           std::span<const unsigned char> mask,
                                                           std::span<double> x, double rtol, int max_iter) const {
  const std::size_t n = rhs.size();
  const bool masked_run = !mask.empty();
  auto restrict = [&](std::vector<double>& v) {
    if (!masked_run) return;
    for (std::size_t k = 0; k < n; ++k)
      if (!mask[k]) v[k] = 0.0;
  };
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    kernels::omp::apply_stiffness(*grid_, v, out);
    if (!shift.empty())
      for (std::size_t k = 0; k < n; ++k) out[k] += shift[k] * v[k];
    restrict(out);
  };
  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    solve_unchecked(r, z);
    restrict(z);
  };

  std::vector<double> b(rhs.begin(), rhs.end());
  restrict(b);
  const double bnorm = std::sqrt(dot(b, b));
  std::fill(x.begin(), x.end(), 0.0);
  IterativeStats stats;
  if (bnorm == 0.0) {
    stats.converged = true;
    return stats;
  }

  std::vector<double> xv(n, 0.0), r = b, z(n), p(n), ap(n);
  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double alpha = rz / dot(p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      xv[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    stats.iterations = it;
    stats.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    if (stats.relative_residual <= rtol) {
      stats.converged = true;
      break;
    }
    precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  std::copy(xv.begin(), xv.end(), x.begin());
  return stats;
}

PoissonSolver::IterativeStats PoissonSolver::solve_masked(std::span<const double> rhs,
                                                          std::span<const unsigned char> mask,
                                                          std::span<double> x, double rtol, int max_iter) const {
  const auto stats = solve_shifted(rhs, {}, mask, x, rtol, max_iter);
  if (!stats.converged)
    throw LinearSolveError("PoissonSolver::solve_masked: no convergence after " + std::to_string(max_iter) +
                           " iterations (relative residual " + std::to_string(stats.relative_residual) + ")");
  return stats;
}

}  // namespace pinwheel
