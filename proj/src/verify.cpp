#include "pinwheel/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pinwheel/energy.hpp"
#include "pinwheel/grid.hpp"
#include "pinwheel/kernels.hpp"
#include "pinwheel/poisson.hpp"
#include "pinwheel/solver.hpp"
#include "pinwheel/symmetry.hpp"

namespace pinwheel {

namespace {

double c2_dist(const C2& a, const C2& b) { return std::sqrt(std::norm(a[0] - b[0]) + std::norm(a[1] - b[1])); }
double c2_norm(const C2& a) { return std::sqrt(std::norm(a[0]) + std::norm(a[1])); }

// Circle-invariant test function on C^2.
double probe(const C2& z) {
  const double s2 = std::norm(z[0]) + std::norm(z[1]);
  return std::exp(-s2) * (1.0 + 0.5 * std::real(z[0] * z[1]));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

std::vector<Check> verify_suite(const VerifyOptions& opts) {
  std::vector<Check> out;
  auto add = [&](std::string name, double value, double tol) {
    Check c{std::move(name), value, tol, value <= tol};
    if (opts.on_check) opts.on_check(c);
    out.push_back(std::move(c));
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, kTwoPi);
  auto random_c2 = [&] { return C2{Complex(nd(rng), nd(rng)), Complex(nd(rng), nd(rng))}; };
  std::vector<C2> pts;
  for (int n = 0; n < 200; ++n) pts.push_back(random_c2());

  // Group structure on C^2.
  double law = 0.0, iso = 0.0, circle = 0.0, descent = 0.0;
  for (int ell : {1, 2, 3, 4, 6}) {
    for (int a = 0; a < 2 * ell; ++a)
      for (int b = 0; b < 2 * ell; ++b) {
        const OrbitMap ma(ell, a), mb(ell, b), mab(ell, a + b);
        for (int n = 0; n < 20; ++n) law = std::max(law, c2_dist(ma.apply(mb.apply(pts[n])), mab.apply(pts[n])));
      }
    const OrbitMap rho(ell, 1);
    for (const auto& z : pts) {
      const C2 w = rho.apply(z);
      iso = std::max(iso, std::abs(c2_norm(w) - c2_norm(z)));
      const Complex g = std::polar(1.0, ud(rng));
      const C2 gz{g * z[0], std::conj(g) * z[1]};
      const C2 rgz = rho.apply(gz);
      const C2 grz{g * w[0], std::conj(g) * w[1]};
      circle = std::max(circle, c2_dist(rgz, grz));
      const OrbitPoint p = reduce(w), q = rho_orbit(reduce(z), rho);
      descent = std::max({descent, std::abs(p.r1 - q.r1), std::abs(p.r2 - q.r2),
                          p.degenerate() ? 0.0 : std::abs(angle_diff(p.phi, q.phi))});
    }
  }
  add("group_law", law, 1e-12);
  add("isometry", iso, 1e-12);
  add("circle_commutation", circle, 1e-12);
  add("orbit_descent", descent, 1e-10);

  double cyc = 0.0;
  for (int ell : {1, 2, 3, 5})
    for (int i = 1; i <= ell; ++i) cyc = std::max(cyc, std::abs(static_cast<double>(sigma_index(i, ell, ell) - i)));
  add("sigma_cycle", cyc, 0.0);

  double fixed = 0.0;
  for (int ell : {2, 3, 4})
    for (const auto& loc : rho_fixed_locus(ell)) {
      const OrbitPoint p = loc.at(0.7), q = rho_orbit(p, OrbitMap(ell, 1));
      fixed = std::max({fixed, std::abs(p.r1 - q.r1), std::abs(p.r2 - q.r2), std::abs(angle_diff(p.phi, q.phi))});
    }
  add("fixed_locus", fixed, 1e-12);

  // Fields on the reduced grid against the Cartesian oracle.
  const double R = 6.0;
  auto grid = make_grid(opts.n_r, opts.n_r, opts.n_phi, R);
  const OrbitMap tau(2, 1);
  const Field u1 = sample(grid, [](const OrbitPoint& p) { return probe(representative(p)); });
  const Field u2 = sample(grid, [&](const OrbitPoint& p) { return probe(tau.apply(representative(p))); });

  const int n = opts.full_n;
  const double L = 4.5, h = 2.0 * L / n, h4 = h * h * h * h, d = 1e-5;
  double f2 = 0.0, f4 = 0.0, kin = 0.0, self = 0.0, cross = 0.0;
#pragma omp parallel for reduction(+ : f2, f4, kin, self, cross) schedule(static)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e) {
          const double x[4] = {-L + (a + 0.5) * h, -L + (b + 0.5) * h, -L + (c + 0.5) * h, -L + (e + 0.5) * h};
          auto at = [&](const double* y) { return C2{Complex(y[0], y[1]), Complex(y[2], y[3])}; };
          const C2 z = at(x);
          const double v1 = probe(z), v2 = probe(tau.apply(z));
          f2 += v1 * v1;
          f4 += v1 * v1 * v1 * v1;
          self += v1 * v1 * v1 * v1 + v2 * v2 * v2 * v2;
          cross += 2.0 * v1 * v1 * v2 * v2;
          for (int k = 0; k < 4; ++k) {
            double yp[4] = {x[0], x[1], x[2], x[3]}, ym[4] = {x[0], x[1], x[2], x[3]};
            yp[k] += d;
            ym[k] -= d;
            const double g1 = (probe(at(yp)) - probe(at(ym))) / (2.0 * d);
            const double g2 = (probe(tau.apply(at(yp))) - probe(tau.apply(at(ym)))) / (2.0 * d);
            kin += g1 * g1 + g2 * g2;
          }
        }
  f2 *= h4;
  f4 *= h4;
  kin *= h4;
  self *= h4;
  cross *= h4;
  add("quadrature_l2_vs_full_grid", rel(integrate_product(u1, u1), f2), 1e-3);
  add("quadrature_l4_vs_full_grid", rel(std::pow(lp_norm(u1, 4.0), 4.0), f4), 1e-3);

  SolverConfig cfg;
  cfg.ell = 2;
  cfg.beta = -0.25;
  cfg.n_r1 = cfg.n_r2 = opts.n_r;
  cfg.n_phi = opts.n_phi;
  cfg.R = R;
  PinwheelState st;
  st.components = {u1, u2};
  st.beta = cfg.beta;
  const auto e = energy(st, cfg);
  const double j_full = 0.5 * kin - 0.25 * self - 0.25 * cfg.beta * cross;
  add("kinetic_vs_full_grid", rel(e.kinetic, kin), 1e-3);
  add("self_term_vs_full_grid", rel(e.self_term, self), 1e-3);
  add("coupling_vs_full_grid", rel(e.coupling, cross), 1e-3);
  add("energy_vs_full_grid", rel(e.j_value, j_full), 1e-3);

  // The interpolating lift is second order in the reduced spacing.
  FullGridSpec spec;
  spec.n = n;
  spec.half_width = L;
  const FullGrid lifted = lift_to_full(u1, spec);
  add("lift_l4_vs_full_grid", rel(lifted.riemann_sum([](double v) { return v * v * v * v; }), f4), 1e-2);

  // Pinwheel maps on the grid: for ell = 2 composition is a permutation of nodes.
  add("compose_rho_vs_pointwise", l2_norm(compose_rho(u1, tau) - u2) / l2_norm(u2), 1e-12);
  const PinwheelState p1 = project_pinwheel(st), p2 = project_pinwheel(p1);
  add("projection_idempotent", l2_norm(p1.components[1] - p2.components[1]) / l2_norm(p1.components[1]), 1e-12);

  // Gradient against central differences along a random smooth direction.
  std::vector<Field> dir;
  for (int i = 0; i < 2; ++i) {
    const double c0 = nd(rng), c1 = nd(rng);
    dir.push_back(sample(grid, [&](const OrbitPoint& p) {
      const double s2 = p.r1 * p.r1 + p.r2 * p.r2;
      return std::exp(-0.7 * s2) * (c0 + c1 * p.r1 * p.r2 * std::sin(p.phi));
    }));
  }
  const auto g = gradient(st, cfg);
  double analytic = 0.0;
  for (int i = 0; i < 2; ++i) analytic += std::inner_product(g.euclidean[i].values().begin(), g.euclidean[i].values().end(),
                                                             dir[i].values().begin(), 0.0);
  const double t = 1e-4;
  PinwheelState plus = st, minus = st;
  plus.axpy(t, dir);
  minus.axpy(-t, dir);
  const double fd = (energy(plus, cfg).j_value - energy(minus, cfg).j_value) / (2.0 * t);
  add("gradient_vs_finite_difference", rel(analytic, fd), 1e-5);

  PinwheelState nst = st;
  nehari_normalize(nst, cfg);
  add("nehari_idempotence", std::abs(nehari_scale(nst, cfg).t - 1.0), 1e-10);

  // Parallel kernels against the serial reference.
  const auto& gr = *grid;
  const std::span<const double> views[2] = {u1.values(), u2.values()};
  std::vector<double> rs(gr.size()), ro(gr.size()), as(gr.size()), ao(gr.size());
  kernels::serial::reaction(gr, views, 0, cfg.beta, rs);
  kernels::omp::reaction(gr, views, 0, cfg.beta, ro);
  kernels::serial::apply_stiffness(gr, u1.values(), as);
  kernels::omp::apply_stiffness(gr, u1.values(), ao);
  double kp = std::max({rel(kernels::omp::stiffness_form(gr, u1.values(), u2.values()),
                            kernels::serial::stiffness_form(gr, u1.values(), u2.values())),
                        rel(kernels::omp::weighted_pow(gr, u1.values(), 4.0), kernels::serial::weighted_pow(gr, u1.values(), 4.0)),
                        rel(kernels::omp::weighted_sq_sq(gr, u1.values(), u2.values()),
                            kernels::serial::weighted_sq_sq(gr, u1.values(), u2.values()))});
  double scale_r = 0.0, scale_a = 0.0;
  for (std::size_t k = 0; k < gr.size(); ++k) {
    scale_r = std::max(scale_r, std::abs(rs[k]));
    scale_a = std::max(scale_a, std::abs(as[k]));
  }
  for (std::size_t k = 0; k < gr.size(); ++k)
    kp = std::max({kp, std::abs(rs[k] - ro[k]) / scale_r, std::abs(as[k] - ao[k]) / scale_a});
  add("kernel_parity_serial_vs_omp", kp, 1e-12);

  // Poisson solve residual.
  const PoissonSolver solver(grid);
  Field rhs(grid);
  kernels::omp::apply_stiffness(gr, u1.values(), rhs.values());
  const Field back = solver.solve(rhs);
  add("poisson_roundtrip", l2_norm(back - u1) / l2_norm(u1), 1e-8);

  return out;
}

}  // namespace pinwheel
