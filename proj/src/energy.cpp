#include "pinwheel/energy.hpp"

#include <cmath>
#include <numbers>

#include "pinwheel/errors.hpp"
#include "pinwheel/kernels.hpp"

namespace pinwheel {

void SolverConfig::validate() const {
  if (N != 4) throw ConfigError("N: only N = 4 is supported");
  if (ell < 1) throw ConfigError("ell must be >= 1");
  if (beta > 0.0) throw ConfigError("beta must be <= 0");
  if (n_r1 < 4 || n_r2 < 4) throw ConfigError("n_r1 and n_r2 must be >= 4");
  if (n_phi < 2 || n_phi % 2 != 0) throw ConfigError("n_phi must be even and >= 2");
  if (!(R > 0.0)) throw ConfigError("R must be positive");
  if (!(grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
  if (!(nehari_tol > 0.0)) throw ConfigError("nehari_tol must be positive");
  if (!(equiv_tol > 0.0)) throw ConfigError("equiv_tol must be positive");
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (inner_iters < 1) throw ConfigError("inner_iters must be >= 1");
  if (!(inner_rtol > 0.0 && inner_rtol < 1.0)) throw ConfigError("inner_rtol must lie in (0, 1)");
  if (reproject_period < 1) throw ConfigError("reproject_period must be >= 1");
  if (!(gauge_radius >= 0.0) || gauge_radius >= R) throw ConfigError("gauge_radius must lie in [0, R)");
  if (seed != "auto" && seed != "sector" && seed != "bump") throw ConfigError("seed must be 'auto', 'sector' or 'bump'");
  if (!(seed_radius > 0.0)) throw ConfigError("seed_radius must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (!(gradient_floor > 0.0 && gradient_floor < 1.0)) throw ConfigError("gradient_floor must lie in (0, 1)");
  if (!(match_band > 0.0 && match_band < 1.0)) throw ConfigError("match_band must lie in (0, 1)");
}

PinwheelState& PinwheelState::operator*=(double a) {
  for (auto& c : components) c *= a;
  return *this;
}

PinwheelState& PinwheelState::axpy(double a, const std::vector<Field>& d) {
  for (std::size_t i = 0; i < components.size(); ++i) components[i].axpy(a, d[i]);
  return *this;
}

EnergyBreakdown energy(const PinwheelState& s, const SolverConfig& cfg) {
  EnergyBreakdown e;
  const auto& g = s.grid();
  const int ell = s.ell();
  e.kinetic_per_component.resize(ell);
  for (int i = 0; i < ell; ++i) {
    const auto u = s.components[i].values();
    e.kinetic_per_component[i] = kernels::omp::stiffness_form(g, u, u);
    e.kinetic += e.kinetic_per_component[i];
    e.self_term += kernels::omp::weighted_pow(g, u, 4.0);
    for (int j = i + 1; j < ell; ++j)
      e.coupling += 2.0 * kernels::omp::weighted_sq_sq(g, u, s.components[j].values());
  }
  const double beta = cfg.beta;
  e.j_value = 0.5 * e.kinetic - 0.25 * e.self_term - 0.25 * beta * e.coupling;
  e.nehari_residual = e.kinetic - e.self_term - beta * e.coupling;
  return e;
}

Direction gradient(const PinwheelState& s, const SolverConfig& cfg, const PoissonSolver* solver) {
  const auto& g = s.grid();
  const int ell = s.ell();
  std::vector<std::span<const double>> views;
  for (const auto& c : s.components) views.push_back(c.values());

  Direction d;
  std::vector<double> react(g.size());
  for (int i = 0; i < ell; ++i) {
    Field gi(s.grid_ptr());
    kernels::omp::apply_stiffness(g, s.components[i].values(), gi.values());
    kernels::omp::reaction(g, views, i, cfg.beta, react);
    for (std::size_t n = 0; n < g.size(); ++n) gi[n] -= react[n];
    d.euclidean.push_back(std::move(gi));
  }
  if (solver != nullptr) {
    for (int i = 0; i < ell; ++i) {
      d.sobolev.push_back(solver->solve(d.euclidean[i]));
      double s_i = 0.0;
      const auto a = d.euclidean[i].values();
      const auto b = d.sobolev[i].values();
      for (std::size_t n = 0; n < a.size(); ++n) s_i += a[n] * b[n];
      d.norm_sq += s_i;
    }
  }
  return d;
}

NehariScale nehari_scale(const PinwheelState& s, const SolverConfig& cfg) {
  NehariScale out;
  out.breakdown = energy(s, cfg);
  const auto& e = out.breakdown;
  const double den = e.self_term + cfg.beta * e.coupling;
  if (!(e.kinetic > 0.0)) throw NehariInfeasible("nehari_scale: state is zero");
  if (!(den > 0.0))
    throw NehariInfeasible("nehari_scale: self_term + beta * coupling = " + std::to_string(den) + " <= 0");
  out.t = std::sqrt(e.kinetic / den);
  return out;
}

EnergyBreakdown nehari_normalize(PinwheelState& s, const SolverConfig& cfg) {
  const auto ns = nehari_scale(s, cfg);
  const double t = ns.t;
  s *= t;
  EnergyBreakdown e = ns.breakdown;
  const double t2 = t * t, t4 = t2 * t2;
  e.kinetic *= t2;
  for (double& k : e.kinetic_per_component) k *= t2;
  e.self_term *= t4;
  e.coupling *= t4;
  e.j_value = 0.5 * e.kinetic - 0.25 * e.self_term - 0.25 * cfg.beta * e.coupling;
  e.nehari_residual = e.kinetic - e.self_term - cfg.beta * e.coupling;
  return e;
}

Matrix overlap_matrix(const PinwheelState& s) {
  const int ell = s.ell();
  const auto& g = s.grid();
  Matrix m(ell, std::vector<double>(ell, 0.0));
  for (int i = 0; i < ell; ++i) {
    m[i][i] = kernels::omp::weighted_pow(g, s.components[i].values(), 4.0);
    for (int j = i + 1; j < ell; ++j)
      m[i][j] = m[j][i] = kernels::omp::weighted_sq_sq(g, s.components[i].values(), s.components[j].values());
  }
  return m;
}

double sobolev_constant(int N) {
  if (N < 3) throw PreconditionError("sobolev_constant: N must be >= 3");
  const double ratio = std::tgamma(0.5 * N) / std::tgamma(static_cast<double>(N));
  return std::numbers::pi * N * (N - 2) * std::pow(ratio, 2.0 / N);
}

double bubble_energy(int N) { return std::pow(sobolev_constant(N), 0.5 * N) / N; }

Field bubble(int N, double eps, const GridPtr& grid) {
  if (N != 4) throw PreconditionError("bubble: only N = 4 is supported");
  if (!(eps > 0.0)) throw PreconditionError("bubble: eps must be positive");
  const double amp = std::sqrt(8.0) * eps;
  const double R = grid->radius();
  const double edge = amp / (eps * eps + R * R);
  return sample(grid, [&](const OrbitPoint& p) {
    const double s2 = p.r1 * p.r1 + p.r2 * p.r2;
    return std::max(amp / (eps * eps + s2) - edge, 0.0);
  });
}

}  // namespace pinwheel
