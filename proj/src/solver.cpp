#include "pinwheel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pinwheel/errors.hpp"
#include "pinwheel/kernels.hpp"

namespace pinwheel {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

void clamp_nonnegative(Field& u) {
  for (double& v : u.values()) v = std::max(v, 0.0);
}

void apply_mask(Field& u, const std::vector<unsigned char>& mask) {
  auto v = u.values();
  for (std::size_t n = 0; n < v.size(); ++n)
    if (!mask[n]) v[n] = 0.0;
}

// Scale each component onto its own single-equation Nehari manifold.
void normalize_each(PinwheelState& s) {
  for (auto& c : s.components) {
    const double k = dirichlet_energy(c);
    const double q = kernels::omp::weighted_pow(c.grid(), c.values(), 4.0);
    if (!(k > 0.0) || !(q > 0.0)) throw GeometryError("seed component vanishes on the grid");
    c *= std::sqrt(k / q);
  }
}

// C-infinity bump of unit height supported in [0, 1).
double bump_profile(double t) {
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

}  // namespace

PinwheelState pinwheel_from(const Field& u1, int ell) {
  PinwheelState s;
  s.components.push_back(u1);
  for (int j = 1; j < ell; ++j) s.components.push_back(compose_rho(u1, OrbitMap(ell, j)));
  return s;
}

PinwheelState init_seed(const SolverConfig& cfg, const GridPtr& grid) {
  const int ell = cfg.ell;
  const double radius = cfg.seed_radius;
  const OrbitPoint p0 = ell == 1 ? OrbitPoint(0.0, 0.0, 0.0) : OrbitPoint(cfg.seed_r1, cfg.seed_r2, cfg.seed_phi);
  for (int j = 1; j < ell; ++j) {
    const double d = orbit_distance(p0, rho_orbit(p0, OrbitMap(ell, j)));
    if (d <= 2.0 * radius)
      throw GeometryError("init_seed: translates of the seed are " + std::to_string(d) +
                          " apart, support radius " + std::to_string(radius) + " forces overlap");
  }
  Field u1 = sample(grid, [&](const OrbitPoint& p) { return bump_profile(orbit_distance(p, p0) / radius); });
  PinwheelState s = pinwheel_from(u1, ell);
  normalize_each(s);
  return s;
}

PinwheelState sector_competitor(const SolverConfig& cfg, const GridPtr& grid) {
  const int ell = cfg.ell;
  const double eps = cfg.target_radius();
  const double amp = std::sqrt(8.0) * eps;
  const double tilt = cfg.seed_tilt;
  // Shifted so the radial profile vanishes on the outer sphere.
  const double edge = amp / (eps * eps + grid->radius() * grid->radius());
  Field u1 = sample(grid, [&](const OrbitPoint& p) {
    const double s2 = p.r1 * p.r1 + p.r2 * p.r2;
    if (s2 == 0.0) return 0.0;
    const double x = p.r1 * p.r1 - p.r2 * p.r2;
    const double y = 2.0 * p.r1 * p.r2 * std::cos(p.phi);
    const double z = 2.0 * p.r1 * p.r2 * std::sin(p.phi);
    double angular = 1.0;
    if (ell > 1) {
      const double rho = std::hypot(x, y);
      const double theta = std::atan2(y, x);
      angular = std::pow(rho / s2, 0.5 * ell) * std::max(0.0, std::cos(0.5 * ell * theta));
    }
    return std::max(amp / (eps * eps + s2) - edge, 0.0) * angular * (1.0 + tilt * z / s2);
  });
  PinwheelState s = pinwheel_from(u1, ell);
  normalize_each(s);
  return s;
}

double pinwheel_error(const PinwheelState& s) {
  const int ell = s.ell();
  if (ell <= 1) return 0.0;
  const OrbitMap rho(ell, 1);
  double worst = 0.0;
  for (int i = 1; i <= ell; ++i) {
    const Field& ui = s.components[i - 1];
    const double n = l2_norm(ui);
    if (n == 0.0) continue;
    const Field diff = s.components[sigma_index(i, 1, ell) - 1] - compose_rho(ui, rho);
    worst = std::max(worst, l2_norm(diff) / n);
  }
  return worst;
}

PinwheelState project_pinwheel(const PinwheelState& s) {
  const int ell = s.ell();
  if (ell <= 1) return s;
  Field v1 = s.components[0];
  for (int j = 1; j < ell; ++j) v1 += compose_rho(s.components[j], OrbitMap(ell, -j));
  v1 *= 1.0 / ell;
  PinwheelState out = pinwheel_from(v1, ell);
  out.beta = s.beta;
  out.gauge_history = s.gauge_history;
  return out;
}

double half_mass_radius(const Field& u) {
  const auto& g = u.grid();
  struct Column {
    double s;
    double mass;
  };
  std::vector<Column> cols;
  double total = 0.0;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      double m = 0.0;
      for (int k = 0; k < g.n_phi(); ++k) {
        const double v = u.at(i, j, k);
        m += v * v * v * v;
      }
      m *= g.weight(i, j);
      if (m == 0.0) continue;
      cols.push_back({std::hypot(g.r1(i), g.r2(j)), m});
      total += m;
    }
  if (total == 0.0) return 0.0;
  std::stable_sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) { return a.s < b.s; });
  // Piecewise-linear distribution function with half of each column's mass
  // counted below its centre.
  const double half = 0.5 * total;
  double below = 0.0, prev_s = 0.0, prev_f = 0.0;
  for (const auto& c : cols) {
    const double f = below + 0.5 * c.mass;
    if (f >= half) {
      if (f == prev_f) return c.s;
      return prev_s + (half - prev_f) / (f - prev_f) * (c.s - prev_s);
    }
    below += c.mass;
    prev_s = c.s;
    prev_f = f;
  }
  return cols.back().s;
}

double scale_moment(const PinwheelState& s) {
  const auto& g = s.grid();
  double mass = 0.0, moment = 0.0;
  for (const auto& c : s.components)
    for (int i = 0; i < g.n_r1(); ++i)
      for (int j = 0; j < g.n_r2(); ++j) {
        if (!g.active(i, j)) continue;
        const double s2 = g.r1(i) * g.r1(i) + g.r2(j) * g.r2(j);
        double m = 0.0;
        for (int k = 0; k < g.n_phi(); ++k) {
          const double v = c.at(i, j, k);
          m += v * v * v * v;
        }
        mass += g.weight(i, j) * m;
        moment += g.weight(i, j) * m * s2;
      }
  return mass > 0.0 ? moment / mass : 0.0;
}

namespace {

// Coefficient-space gradient of scale_moment for each component.
std::vector<Field> scale_moment_gradient(const PinwheelState& s) {
  const auto& g = s.grid();
  double mass = 0.0;
  for (const auto& c : s.components) mass += kernels::omp::weighted_pow(g, c.values(), 4.0);
  const double phi = scale_moment(s);
  std::vector<Field> out;
  for (const auto& c : s.components) {
    Field d(s.grid_ptr());
    for (int i = 0; i < g.n_r1(); ++i)
      for (int j = 0; j < g.n_r2(); ++j) {
        if (!g.active(i, j)) continue;
        const double f = 4.0 * g.weight(i, j) * (g.r1(i) * g.r1(i) + g.r2(j) * g.r2(j) - phi) / mass;
        for (int k = 0; k < g.n_phi(); ++k) {
          const double v = c.at(i, j, k);
          d.at(i, j, k) = f * v * v * v;
        }
      }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

namespace {

// A dilation with eps < 1 moves interior values onto the outer sphere, where
// the truncated field then jumps to zero. Subtract the mean of the outermost
// active shell (constants are harmonic, so this leaves the gradient alone)
// and keep nonnegative fields nonnegative.
void remove_outer_trace(Field& u, bool nonnegative) {
  const auto& g = u.grid();
  double sum = 0.0, wsum = 0.0;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      const bool outer = i + 1 == g.n_r1() || j + 1 == g.n_r2() || !g.active(i + 1, j) || !g.active(i, j + 1);
      if (!outer) continue;
      for (int k = 0; k < g.n_phi(); ++k) sum += g.weight(i, j) * u.at(i, j, k);
      wsum += g.weight(i, j) * g.n_phi();
    }
  if (wsum == 0.0 || sum == 0.0) return;
  const double c = sum / wsum;
  auto v = u.values();
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!g.active_node(n)) continue;
    v[n] -= c;
    if (nonnegative) v[n] = std::max(v[n], 0.0);
  }
}

}  // namespace

GaugeResult gauge_fix(const PinwheelState& s, const SolverConfig& cfg) {
  GaugeResult out{s, GaugeTransform{}};
  const double target = cfg.target_radius();
  const double deadband = 0.25 * std::min(s.grid().dr1(), s.grid().dr2());
  double rho = half_mass_radius(s.components.front());
  if (!(rho > 0.0) || std::abs(rho - target) < deadband) return out;
  std::vector<bool> nonnegative;
  for (const auto& c : s.components)
    nonnegative.push_back(*std::min_element(c.values().begin(), c.values().end()) >= 0.0);
  // Truncation and the trace shift make the radius respond slightly
  // nonlinearly; iterate on the total factor, always dilating the input.
  // Once triggered, land much closer than the deadband: the truncated energy
  // drifts with the scale, so two fixes of the same state must agree.
  const double tight = 1e-3 * deadband;
  double eps = 1.0;
  for (int pass = 0; pass < 20 && std::abs(rho - target) >= tight; ++pass) {
    eps *= rho / target;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
      Field c = dilate(s.components[i], eps);
      if (eps < 1.0) remove_outer_trace(c, nonnegative[i]);
      if (nonnegative[i]) clamp_nonnegative(c);
      out.state.components[i] = std::move(c);
    }
    rho = half_mass_radius(out.state.components.front());
  }
  nehari_normalize(out.state, cfg);
  out.transform.epsilon = eps;
  out.state.gauge_history.push_back(out.transform);
  return out;
}

MinimizeResult minimize(const PinwheelState& s0, const SolverConfig& cfg, const PoissonSolver& solver,
                        const MinimizeOptions& opts) {
  const auto& g = s0.grid();
  const int ell = s0.ell();
  const auto* mask = opts.mask;
  const double min_cells = 4.0 * std::min(g.dr1(), g.dr2());

  MinimizeResult res;
  PinwheelState s = s0;
  s.beta = cfg.beta;
  for (auto& c : s.components) {
    clamp_nonnegative(c);
    c.enforce_dirichlet();
    if (mask) apply_mask(c, *mask);
  }
  EnergyBreakdown e = nehari_normalize(s, cfg);
  if (opts.gauge) {
    auto gf = gauge_fix(s, cfg);
    res.epsilon *= gf.transform.epsilon;
    s = std::move(gf.state);
    e = energy(s, cfg);
  }
  const PinwheelState start = s;
  const EnergyBreakdown start_e = e;

  std::vector<double> shift(g.size());
  std::vector<unsigned char> free_mask;
  for (int it = 1; it <= cfg.max_iters + 1; ++it) {
    const Direction grad = gradient(s, cfg, nullptr);
    Direction d;
    std::vector<Field> h;
    double gh = 0.0;
    // Multiplier of the scale constraint; the line search works on the
    // Lagrangian J - lambda (Phi - Phi(s)) so that the curvature of the
    // level set does not stall it near convergence.
    double lambda = 0.0;

    // reduced: projected-Newton fallback. Nodes at the bound with G > 0 are
    // pinned so the clamp cannot reverse the predicted decrease.
    auto build_direction = [&](bool reduced) {
      d = grad;
      h.clear();
      gh = 0.0;
      lambda = 0.0;
      const std::vector<unsigned char>* m = mask;
      if (reduced) {
        free_mask.assign(g.size(), 1);
        for (int i = 0; i < ell; ++i) {
          const auto u = s.components[i].values();
          const auto gi = d.euclidean[i].values();
          for (std::size_t n = 0; n < u.size(); ++n)
            if (u[n] <= 0.0 && gi[n] > 0.0) free_mask[n] = 0;
        }
        if (mask)
          for (std::size_t n = 0; n < g.size(); ++n) free_mask[n] &= (*mask)[n] != 0 ? 1 : 0;
        m = &free_mask;
      }
      const bool shifted = cfg.coupling_preconditioner && cfg.beta < 0.0 && ell > 1;
      const std::span<const unsigned char> ms = m ? std::span<const unsigned char>(*m) : std::span<const unsigned char>();
      // Applies the same preconditioner to every right-hand side of
      // component i, so that the scale projection below stays orthogonal
      // in the metric that defines h.
      auto precondition = [&](Field rhs) {
        if (m) apply_mask(rhs, *m);
        Field out(s.grid_ptr());
        if (shifted || m)
          solver.solve_shifted(rhs.values(), shifted ? std::span<const double>(shift) : std::span<const double>(), ms,
                               out.values(), cfg.inner_rtol, cfg.inner_iters);
        else
          solver.solve(rhs.values(), out.values());
        return out;
      };
      const bool scale = opts.hold_scale;
      std::vector<Field> dphi, q;
      if (scale) dphi = scale_moment_gradient(s);
      for (int i = 0; i < ell; ++i) {
        if (m) apply_mask(d.euclidean[i], *m);
        if (shifted) {
          // The repulsion term |beta| u_j^2 dominates the Hessian near the
          // interfaces; leaving it out forces tiny steps at large |beta|.
          std::fill(shift.begin(), shift.end(), 0.0);
          for (int j = 0; j < ell; ++j) {
            if (j == i) continue;
            const auto uj = s.components[j].values();
            for (std::size_t n = 0; n < shift.size(); ++n) shift[n] += uj[n] * uj[n];
          }
          for (std::size_t n = 0; n < shift.size(); ++n) shift[n] *= -cfg.beta * g.weights()[n / g.n_phi()];
        }
        h.push_back(precondition(d.euclidean[i]));
        gh += dot(d.euclidean[i].values(), h[i].values());
        if (scale) {
          if (m) apply_mask(dphi[i], *m);
          q.push_back(precondition(dphi[i]));
        }
      }
      if (scale) {
        // Projection onto the tangent space of the level set of
        // scale_moment.
        double pq = 0.0, ph = 0.0;
        for (int i = 0; i < ell; ++i) {
          pq += dot(dphi[i].values(), q[i].values());
          ph += dot(dphi[i].values(), h[i].values());
        }
        if (pq > 0.0) {
          lambda = ph / pq;
          for (int i = 0; i < ell; ++i) {
            h[i].axpy(-lambda, q[i]);
            d.euclidean[i].axpy(-lambda, dphi[i]);
          }
          gh -= lambda * ph;
        }
      }
    };
    build_direction(false);

    // Projected step u - P(u - alpha h), P the clamp to u >= 0 together with
    // the Dirichlet and mask constraints.
    auto project_step = [&](double alpha, PinwheelState& trial) {
      trial = s;
      trial.axpy(-alpha, h);
      for (auto& c : trial.components) {
        clamp_nonnegative(c);
        c.enforce_dirichlet();
        if (mask) apply_mask(c, *mask);
      }
      double pred = 0.0;
      for (int i = 0; i < ell; ++i) {
        const auto a = s.components[i].values();
        const auto b = trial.components[i].values();
        const auto gi = d.euclidean[i].values();
        for (std::size_t n = 0; n < a.size(); ++n) pred += gi[n] * (a[n] - b[n]);
      }
      return pred;
    };

    // Stationarity: Dirichlet length of the full unit step, measured after
    // the Nehari rescaling so that motion along the ray does not count.
    const double phi0 = lambda != 0.0 ? scale_moment(s) : 0.0;
    auto merit = [&](const PinwheelState& t, const EnergyBreakdown& te) {
      return lambda != 0.0 ? te.j_value - lambda * (scale_moment(t) - phi0) : te.j_value;
    };
    PinwheelState trial;
    double pred1 = project_step(1.0, trial);
    if (!(pred1 > 0.0)) {
      build_direction(true);
      pred1 = project_step(1.0, trial);
    }
    bool trial1_ok = true;
    EnergyBreakdown te;
    try {
      te = nehari_normalize(trial, cfg);
      double step_sq = 0.0;
      for (int i = 0; i < ell; ++i) step_sq += dirichlet_energy(s.components[i] - trial.components[i]);
      res.grad_norm = std::sqrt(step_sq / std::max(e.kinetic, 1e-300));
    } catch (const NehariInfeasible&) {
      trial1_ok = false;
      res.grad_norm = std::numeric_limits<double>::infinity();
    }
    if (res.grad_norm <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (it > cfg.max_iters) break;

    // Backtracking Armijo search along the Nehari-projected path.
    bool accepted = false;
    double alpha = 1.0;
    for (int b = 0; b <= cfg.max_backtracks; ++b, alpha *= 0.5) {
      double pred = pred1;
      if (b > 0) {
        pred = project_step(alpha, trial);
        if (!(pred > 0.0)) continue;
        try {
          te = nehari_normalize(trial, cfg);
        } catch (const NehariInfeasible&) {
          continue;
        }
      } else if (!trial1_ok || !(pred > 0.0)) {
        continue;
      }
      if (merit(trial, te) <= e.j_value - cfg.armijo_c * pred) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    s = std::move(trial);
    e = te;
    res.iterations = it;
    res.j_history.push_back(e.j_value);
    if (opts.on_step) opts.on_step(it, e.j_value);

    if (it % cfg.reproject_period == 0) {
      // Both maps interpolate; if that pushes the state off the feasible
      // cone the step is skipped and retried at the next checkpoint.
      if (ell > 1) {
        try {
          PinwheelState p = project_pinwheel(s);
          const EnergyBreakdown pe = nehari_normalize(p, cfg);
          s = std::move(p);
          e = pe;
        } catch (const NehariInfeasible&) {
        }
      }
      if (opts.gauge) {
        try {
          auto gf = gauge_fix(s, cfg);
          res.epsilon *= gf.transform.epsilon;
          if (gf.transform.epsilon != 1.0) {
            s = std::move(gf.state);
            e = energy(s, cfg);
          }
        } catch (const NehariInfeasible&) {
        }
        if (half_mass_radius(s.components.front()) < min_cells) {
          res.concentration = true;
          break;
        }
      }
    }
  }

  if (e.j_value > start_e.j_value + 1e-12) {
    res.state = start;
    res.breakdown = start_e;
    res.converged = false;
  } else {
    res.state = std::move(s);
    res.breakdown = e;
  }
  res.equivariance_error = pinwheel_error(res.state);
  return res;
}

ConcentrationScale concentration_scale(const Field& u, double delta) {
  const auto& g = u.grid();
  const double total = kernels::omp::weighted_pow(g, u.values(), 4.0);
  if (!(delta > 0.0)) throw ThresholdError("concentration_scale: delta must be positive");
  if (!(delta < total))
    throw ThresholdError("concentration_scale: delta " + std::to_string(delta) + " is not below the total mass " +
                         std::to_string(total));

  struct Node {
    OrbitPoint p;
    double mass;
  };
  std::vector<Node> nodes;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) {
        const double v = u.at(i, j, k);
        const double m = g.weight(i, j) * v * v * v * v;
        if (m > 0.0) nodes.push_back({g.node(i, j, k), m});
      }
    }

  // Fraction of the circle orbit through q lying inside the ambient ball
  // B_eps(x): |g.q - x|^2 = D - 2 M cos(t + c).
  auto mass_in_ball = [&](const OrbitPoint& x, double eps) {
    double m = 0.0;
    const double e2 = eps * eps;
    const double x2 = x.r1 * x.r1 + x.r2 * x.r2;
    for (const auto& n : nodes) {
      const double D = n.p.r1 * n.p.r1 + n.p.r2 * n.p.r2 + x2;
      const double M = std::abs(Complex(n.p.r1 * x.r1, 0.0) + std::polar(n.p.r2 * x.r2, n.p.phi - x.phi));
      double frac;
      if (M <= 1e-300) {
        frac = D <= e2 ? 1.0 : 0.0;
      } else {
        const double kappa = (D - e2) / (2.0 * M);
        frac = kappa >= 1.0 ? 0.0 : kappa <= -1.0 ? 1.0 : std::acos(kappa) / std::numbers::pi;
      }
      m += frac * n.mass;
    }
    return m;
  };

  // Candidate centres: the nodes carrying the largest values.
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n_cand = std::min<std::size_t>(48, order.size());
  std::partial_sort(order.begin(), order.begin() + n_cand, order.end(),
                    [&](std::size_t a, std::size_t b) { return nodes[a].mass / std::max(nodes[a].p.r1 * nodes[a].p.r2, 1e-300) >
                                                               nodes[b].mass / std::max(nodes[b].p.r1 * nodes[b].p.r2, 1e-300); });
  ConcentrationScale best{2.0 * g.radius() + 1.0, OrbitPoint()};
  for (std::size_t c = 0; c < n_cand; ++c) {
    const OrbitPoint x = nodes[order[c]].p;
    double lo = 0.0, hi = std::min(best.epsilon, 2.0 * g.radius());
    if (mass_in_ball(x, hi) < delta) continue;
    for (int it = 0; it < 50 && hi - lo > 1e-6 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mass_in_ball(x, mid) >= delta ? hi : lo) = mid;
    }
    if (hi < best.epsilon) best = {hi, x};
  }
  return best;
}

double sup_norm(const PinwheelState& s) {
  double m = 0.0;
  for (const auto& c : s.components) m = std::max(m, c.max_abs());
  return m;
}

Competitor best_competitor(const SolverConfig& cfg, const GridPtr& grid) {
  SolverConfig c = cfg;
  std::vector<Competitor> cands;
  auto add = [&](PinwheelState st, const std::string& kind) {
    st.beta = cfg.beta;
    auto e = energy(st, c);
    cands.push_back({std::move(st), e.j_value, kind});
  };
  add(init_seed(cfg, grid), "bump");
  if (cfg.ell > 1) add(sector_competitor(cfg, grid), "sector");
  auto it = std::min_element(cands.begin(), cands.end(),
                             [](const Competitor& a, const Competitor& b) { return a.j_value < b.j_value; });
  return std::move(*it);
}

Competitor disjoint_competitor(const PinwheelState& s, const SolverConfig& cfg) {
  const int ell = s.ell();
  PinwheelState v = s;
  for (int i = 0; i < ell; ++i) {
    auto out = v.components[i].values();
    for (std::size_t n = 0; n < out.size(); ++n) {
      double other = 0.0;
      for (int j = 0; j < ell; ++j)
        if (j != i) other = std::max(other, s.components[j][n]);
      out[n] = std::max(s.components[i][n] - other, 0.0);
    }
  }
  normalize_each(v);
  v.beta = cfg.beta;
  const double j = energy(v, cfg).j_value;
  return {std::move(v), j, "disjoint"};
}

TraceRecord trace_record(const MinimizeResult& r, const SolverConfig& cfg, double bound) {
  TraceRecord rec;
  rec.beta = cfg.beta;
  rec.j_value = r.breakdown.j_value;
  rec.kinetic_total = r.breakdown.kinetic;
  rec.kinetic = r.breakdown.kinetic_per_component;
  rec.overlap = overlap_matrix(r.state);
  for (int i = 0; i < r.state.ell(); ++i)
    for (int j = 0; j < r.state.ell(); ++j)
      if (i != j) rec.overlap_max = std::max(rec.overlap_max, rec.overlap[i][j]);
  rec.beta_times_overlap = std::abs(cfg.beta) * rec.overlap_max;
  rec.sup_norm = sup_norm(r.state);
  rec.epsilon = r.epsilon;
  rec.iters = r.iterations;
  rec.converged = r.converged;
  rec.concentration = r.concentration;
  rec.below_bound = rec.j_value <= bound + 1e-3;
  return rec;
}

ContinuationTrace beta_continuation(const SolverConfig& cfg, const std::vector<double>& schedule,
                                    const PoissonSolver& solver, const ContinuationOptions& opts,
                                    PinwheelState* final_state) {
  if (schedule.empty()) throw PreconditionError("beta_continuation: empty schedule");
  if (schedule.front() < -1.0) throw PreconditionError("beta_continuation: schedule must start at or above -1");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] > 0.0) throw PreconditionError("beta_continuation: beta must be <= 0");
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      throw PreconditionError("beta_continuation: schedule must be strictly decreasing");
  }

  const GridPtr& grid = solver.grid_ptr();
  ContinuationTrace trace;
  Competitor comp = best_competitor(cfg, grid);
  trace.competitor_bound = comp.j_value;
  trace.competitor_kind = comp.kind;

  PinwheelState state = cfg.seed == "bump"     ? init_seed(cfg, grid)
                        : cfg.seed == "sector" ? sector_competitor(cfg, grid)
                                               : comp.state;
  double beta_prev = schedule.front();
  std::size_t start = 0;
  if (opts.resume_trace && opts.resume_state) {
    trace.records = opts.resume_trace->records;
    start = trace.records.size();
    if (start > schedule.size()) throw PreconditionError("beta_continuation: resume trace longer than schedule");
    for (std::size_t k = 0; k < start; ++k)
      if (trace.records[k].beta != schedule[k])
        throw PreconditionError("beta_continuation: resume trace does not match schedule");
    state = *opts.resume_state;
    if (start > 0) beta_prev = schedule[start - 1];
  }

  SolverConfig c = cfg;
  // The configured seed starts the first beta; later betas fall back to the
  // competitor when the warm start is worse than it.
  bool warm_started = start > 0;
  auto solve_at = [&](double beta, const PinwheelState& warm) {
    c.beta = beta;
    if (!warm_started) return minimize(warm, c, solver);
    PinwheelState probe = warm;
    const PinwheelState& init = nehari_normalize(probe, c).j_value > comp.j_value ? comp.state : warm;
    return minimize(init, c, solver);
  };

  for (std::size_t k = start; k < schedule.size(); ++k) {
    const double target = schedule[k];
    // Bisect toward the target when the warm start is Nehari-infeasible.
    std::vector<double> pending{target};
    int bisections = 0;
    MinimizeResult res;
    while (!pending.empty()) {
      const double beta = pending.back();
      try {
        res = solve_at(beta, state);
      } catch (const NehariInfeasible&) {
        if (++bisections > opts.max_bisections) throw;
        pending.push_back(0.5 * (beta_prev + beta));
        continue;
      }
      pending.pop_back();
      state = res.state;
      beta_prev = beta;
      warm_started = true;
    }
    c.beta = target;
    TraceRecord rec = trace_record(res, c, trace.competitor_bound);
    trace.records.push_back(rec);
    if (opts.on_checkpoint) opts.on_checkpoint(rec, state, k);
  }
  if (final_state) *final_state = state;
  return trace;
}

SupNormVerdict sup_norm_track(const ContinuationTrace& trace) {
  if (trace.records.empty()) throw PreconditionError("sup_norm_track: empty trace");
  SupNormVerdict v;
  double lowest = trace.records.front().sup_norm;
  for (const auto& r : trace.records) {
    v.sup_norms.push_back(r.sup_norm);
    lowest = std::min(lowest, r.sup_norm);
    if (lowest > 0.0) v.growth = std::max(v.growth, r.sup_norm / lowest);
  }
  v.bounded = v.growth <= 2.0;
  return v;
}

}  // namespace pinwheel
