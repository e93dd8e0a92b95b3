#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "pinwheel/grid.hpp"
#include "pinwheel/kernels.hpp"

using namespace pinwheel;

namespace {

constexpr double kPi = M_PI;

// Composite Simpson on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("nodes are cell centred and never on the axes or the sphere") {
  auto g = make_grid(16, 16, 8, 4.0);
  for (int i = 0; i < g->n_r1(); ++i)
    for (int j = 0; j < g->n_r2(); ++j) {
      CHECK(g->r1(i) > 0.0);
      CHECK(g->r2(j) > 0.0);
      CHECK(std::hypot(g->r1(i), g->r2(j)) != doctest::Approx(4.0));
    }
}

TEST_CASE("volume of the 4-ball, second order under refinement") {
  const double R = 3.0, exact = kPi * kPi * std::pow(R, 4) / 2.0;
  const double e1 = rel(make_grid(64, 64, 4, R)->volume(), exact);
  const double e2 = rel(make_grid(128, 128, 4, R)->volume(), exact);
  const double e3 = rel(make_grid(256, 256, 4, R)->volume(), exact);
  CHECK(e3 < 1e-3);
  // The staircase boundary makes the error oscillate; compare over two levels.
  CHECK(e3 < e1 / 3.0);
  MESSAGE("volume errors " << e1 << " " << e2 << " " << e3);
  auto g = make_grid(128, 128, 4, R);
  Field one = sample(g, [](const OrbitPoint&) { return 1.0; });
  CHECK(integrate(one) == doctest::Approx(g->volume()).epsilon(1e-12));
}

TEST_CASE("integrate examples") {
  auto g = make_grid(256, 256, 4, 6.0);
  CHECK(integrate(Field(g)) == 0.0);
  const Field gauss = sample(g, [](const OrbitPoint& p) { return std::exp(-(p.r1 * p.r1 + p.r2 * p.r2)); });
  CHECK(rel(integrate(gauss), kPi * kPi) < 1e-4);
}

TEST_CASE("fields vanish outside the ball and are finite") {
  auto g = make_grid(20, 20, 6, 2.0);
  const Field u = sample(g, [](const OrbitPoint& p) { return 1.0 + p.r1; });
  CHECK(u.finite());
  for (int i = 0; i < g->n_r1(); ++i)
    for (int j = 0; j < g->n_r2(); ++j)
      if (!g->active(i, j))
        for (int k = 0; k < g->n_phi(); ++k) CHECK(u.at(i, j, k) == 0.0);
}

TEST_CASE("stiffness annihilates constants away from the boundary") {
  auto g = make_grid(24, 24, 8, 5.0);
  const Field one = sample(g, [](const OrbitPoint&) { return 1.0; });
  Field out(g);
  kernels::omp::apply_stiffness(*g, one.values(), out.values());
  int interior = 0;
  for (int i = 0; i + 1 < g->n_r1(); ++i)
    for (int j = 0; j + 1 < g->n_r2(); ++j)
      if (g->active(i + 1, j) && g->active(i, j + 1) && g->active(i + 1, j + 1))
        for (int k = 0; k < g->n_phi(); ++k) {
          CHECK(std::abs(out.at(i, j, k)) < 1e-12);
          ++interior;
        }
  CHECK(interior > 0);
}

TEST_CASE("dirichlet energy of an angular profile against 1-D quadrature") {
  auto a = [](double r) { return std::exp(-4.0 * (r - 2.0) * (r - 2.0)); };
  auto da = [&](double r) { return -8.0 * (r - 2.0) * a(r); };
  auto b = [](double r) { return std::exp(-4.0 * (r - 2.5) * (r - 2.5)); };
  auto db = [&](double r) { return -8.0 * (r - 2.5) * b(r); };
  auto g = make_grid(192, 192, 48, 6.0);
  const Field u = sample(g, [&](const OrbitPoint& p) { return a(p.r1) * b(p.r2) * std::cos(p.phi); });

  // |grad u|^2 = (a'b)^2 cos^2 + (ab')^2 cos^2 + (1/r1^2 + 1/r2^2)(ab)^2 sin^2,
  // integrated against 2 pi r1 r2 dr1 dr2 dphi; each phi average is 1/2.
  const double A0 = simpson([&](double r) { return a(r) * a(r) * r; }, 0, 6);
  const double A1 = simpson([&](double r) { return da(r) * da(r) * r; }, 0, 6);
  const double Am = simpson([&](double r) { return r > 0 ? a(r) * a(r) / r : 0.0; }, 0, 6);
  const double B0 = simpson([&](double r) { return b(r) * b(r) * r; }, 0, 6);
  const double B1 = simpson([&](double r) { return db(r) * db(r) * r; }, 0, 6);
  const double Bm = simpson([&](double r) { return r > 0 ? b(r) * b(r) / r : 0.0; }, 0, 6);
  const double exact = 2.0 * kPi * kPi * (A1 * B0 + A0 * B1 + Am * B0 + A0 * Bm);
  CHECK(rel(dirichlet_energy(u), exact) < 1e-2);
}

TEST_CASE("lp_norm examples") {
  auto g = make_grid(32, 32, 8, 4.0);
  CHECK(lp_norm(Field(g), 4.0) == 0.0);
  const Field u = sample(g, [](const OrbitPoint& p) { return std::exp(-p.radius() * p.radius()); });
  CHECK(lp_norm(2.0 * u, 4.0) == doctest::Approx(2.0 * lp_norm(u, 4.0)).epsilon(1e-12));
}

TEST_CASE("interpolate examples") {
  auto g = make_grid(16, 16, 8, 4.0);
  const Field u = sample(g, [](const OrbitPoint& p) { return 0.5 + p.r1 + 0.1 * std::sin(p.phi); });
  CHECK(interpolate(u, g->node(3, 4, 5)) == u.at(3, 4, 5));
  CHECK(interpolate(u, OrbitPoint(3.5, 3.5, 0.2)) == 0.0);
  const Field lin = sample(g, [](const OrbitPoint& p) { return p.r1; });
  const OrbitPoint mid(0.5 * (g->r1(3) + g->r1(4)), g->r2(2), g->phi(1));
  CHECK(interpolate(lin, mid) == doctest::Approx(0.5 * (lin.at(3, 2, 1) + lin.at(4, 2, 1))).epsilon(1e-14));
}

TEST_CASE("compose_rho examples and properties") {
  auto g = make_grid(160, 160, 48, 6.0);
  const Field u = sample(g, [](const OrbitPoint& p) {
    const double s2 = p.r1 * p.r1 + p.r2 * p.r2;
    return std::exp(-s2) * (1.0 + 0.4 * p.r1 * p.r2 * std::cos(p.phi) + 0.3 * p.r1 * p.r1);
  });
  SUBCASE("identity") { CHECK(l2_norm(compose_rho(u, OrbitMap::identity(3)) - u) == 0.0); }
  SUBCASE("ell-fold composition returns u") {
    for (int ell : {2, 3}) {
      Field w = u;
      for (int k = 0; k < ell; ++k) w = compose_rho(w, OrbitMap(ell, 1));
      CHECK(l2_norm(w - u) / l2_norm(u) < 1e-2);
    }
  }
  SUBCASE("dirichlet energy is preserved") {
    for (int ell : {2, 3})
      CHECK(rel(dirichlet_energy(compose_rho(u, OrbitMap(ell, 1))), dirichlet_energy(u)) < 1e-3);
  }
}

TEST_CASE("lift to the Cartesian grid") {
  auto g = make_grid(128, 128, 32, 5.0);
  FullGridSpec spec;
  spec.n = 24;
  spec.half_width = 1.0;
  SUBCASE("constant field lifts to a constant array") {
    const Field one = sample(g, [](const OrbitPoint&) { return 1.0; });
    const FullGrid f = lift_to_full(one, spec);
    for (double v : f.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("lift is invariant under the circle element i") {
    const Field u = sample(g, [](const OrbitPoint& p) { return std::exp(-p.r1) * (1 + p.r2 * std::sin(p.phi)); });
    const FullGrid f = lift_to_full(u, spec);
    const int n = f.n;
    double worst = 0.0;
    // (x1, x2, x3, x4) -> (-x2, x1, x4, -x3) maps the cell-centred grid to itself.
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d)
            worst = std::max(worst, std::abs(f.values[f.index(a, b, c, d)] -
                                             f.values[f.index(n - 1 - b, a, d, n - 1 - c)]));
    CHECK(worst < 1e-12);
  }
  SUBCASE("integral agrees with the Riemann sum of the lift") {
    const Field u = sample(g, [](const OrbitPoint& p) {
      return std::exp(-(p.r1 * p.r1 + p.r2 * p.r2)) * (1.0 + 0.5 * p.r1 * p.r2 * std::cos(p.phi));
    });
    FullGridSpec big;
    big.n = 48;
    big.half_width = 4.5;
    CHECK(rel(lift_to_full(u, big).riemann_sum([](double v) { return v; }), integrate(u)) < 1e-3);
  }
}

TEST_CASE("dilate relates bubbles of different scale") {
  auto g = make_grid(128, 128, 8, 20.0);
  const auto prof = [](double e) {
    return [e](const OrbitPoint& p) { return std::sqrt(8.0) * e / (e * e + p.r1 * p.r1 + p.r2 * p.r2); };
  };
  const Field u = sample(g, prof(1.0));
  const Field w = dilate(u, 2.0);
  const Field expect = sample(g, prof(0.5));
  double worst = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n)
    if (g->active_node(n)) worst = std::max(worst, std::abs(w[n] - expect[n]));
  CHECK(worst / expect.max_abs() < 2e-2);
}

TEST_CASE("serial and parallel kernels agree on random data") {
  auto g = make_grid(40, 40, 16, 5.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  Field a = sample(g, [&](const OrbitPoint&) { return ud(rng); });
  Field b = sample(g, [&](const OrbitPoint&) { return ud(rng); });
  Field s1(g), s2(g);
  kernels::serial::apply_stiffness(*g, a.values(), s1.values());
  kernels::omp::apply_stiffness(*g, a.values(), s2.values());
  CHECK(l2_norm(s1 - s2) <= 1e-12 * l2_norm(s1));
  CHECK(kernels::omp::weighted_dot(*g, a.values(), b.values()) ==
        doctest::Approx(kernels::serial::weighted_dot(*g, a.values(), b.values())).epsilon(1e-12));
  CHECK(kernels::omp::weighted_pow(*g, a.values(), 4.0) ==
        doctest::Approx(kernels::serial::weighted_pow(*g, a.values(), 4.0)).epsilon(1e-12));
}
