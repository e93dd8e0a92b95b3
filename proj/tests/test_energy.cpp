#include <cmath>
#include <random>

#include "doctest.h"
#include "pinwheel/energy.hpp"
#include "pinwheel/errors.hpp"
#include "pinwheel/solver.hpp"

using namespace pinwheel;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Rayleigh quotient |grad U|_2^2 / |U|_4^2 of U = 1/(1 + r^2) in R^4 by 1-D
// quadrature in r = tan(t), t in (0, pi/2); surface area of S^3 is 2 pi^2.
double radial_sobolev_quotient() {
  const int n = 200000;
  const double h = 0.5 * M_PI / n;
  double grad = 0.0, quart = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * h, r = std::tan(t), dr = 1.0 / (std::cos(t) * std::cos(t));
    const double u = 1.0 / (1.0 + r * r), du = -2.0 * r / ((1.0 + r * r) * (1.0 + r * r));
    grad += du * du * r * r * r * dr;
    quart += u * u * u * u * r * r * r * dr;
  }
  const double area = 2.0 * M_PI * M_PI;
  return area * grad * h / std::sqrt(area * quart * h);
}

SolverConfig config(int ell, double beta, int n, int n_phi, double R) {
  SolverConfig c;
  c.ell = ell;
  c.beta = beta;
  c.n_r1 = c.n_r2 = n;
  c.n_phi = n_phi;
  c.R = R;
  return c;
}

}  // namespace

TEST_CASE("sobolev constant against the radial Rayleigh quotient") {
  const double S = sobolev_constant(4);
  CHECK(rel(S, radial_sobolev_quotient()) < 1e-8);
  CHECK(bubble_energy(4) == doctest::Approx(S * S / 4.0).epsilon(1e-14));
  // Energy floor (ell/4) S^2 is linear in ell.
  for (int ell : {1, 2, 3}) CHECK(0.25 * ell * S * S == doctest::Approx(ell * bubble_energy(4)));
  CHECK_THROWS_AS(sobolev_constant(2), PreconditionError);
}

TEST_CASE("discrete bubble") {
  auto g = make_grid(128, 128, 8, 20.0);
  const double S = sobolev_constant(4);
  const Field u = bubble(4, 1.0, g);
  SUBCASE("Rayleigh quotient") {
    const double l4 = lp_norm(u, 4.0);
    CHECK(rel(dirichlet_energy(u) / (l4 * l4), S) < 2e-2);
  }
  SUBCASE("single-equation Nehari identity") {
    CHECK(rel(std::pow(lp_norm(u, 4.0), 4.0), dirichlet_energy(u)) < 2e-2);
  }
  SUBCASE("energy of the Nehari projection") {
    PinwheelState s;
    s.components.push_back(u);
    const auto e = nehari_normalize(s, config(1, 0.0, 128, 8, 20.0));
    CHECK(rel(e.j_value, bubble_energy(4)) < 2e-2);
  }
  SUBCASE("dilation invariance") {
    CHECK(rel(dirichlet_energy(bubble(4, 0.5, g)), dirichlet_energy(u)) < 1e-2);
  }
}

TEST_CASE("energy examples") {
  const SolverConfig cfg = config(2, -1.0, 48, 16, 8.0);
  auto g = make_grid(48, 48, 16, 8.0);
  SUBCASE("zero state") {
    PinwheelState s;
    s.components = {Field(g), Field(g)};
    const auto e = energy(s, cfg);
    CHECK(e.kinetic == 0.0);
    CHECK(e.self_term == 0.0);
    CHECK(e.coupling == 0.0);
    CHECK(e.j_value == 0.0);
  }
  SUBCASE("identical components: coupling sums over ordered pairs") {
    const Field u = sample(g, [](const OrbitPoint& p) { return std::exp(-p.radius() * p.radius()); });
    PinwheelState s;
    s.components = {u, u};
    const auto e = energy(s, cfg);
    const double q = std::pow(lp_norm(u, 4.0), 4.0);
    CHECK(e.coupling == doctest::Approx(2.0 * q).epsilon(1e-12));
    CHECK(e.self_term == doctest::Approx(2.0 * q).epsilon(1e-12));
    CHECK(e.j_value == doctest::Approx(e.kinetic / 2 - e.self_term / 4 + e.coupling / 4).epsilon(1e-12));
  }
  SUBCASE("on the Nehari manifold J = kinetic / 4") {
    PinwheelState s = sector_competitor(cfg, g);
    const auto e = nehari_normalize(s, cfg);
    CHECK(std::abs(e.nehari_residual) <= 1e-8 * e.kinetic);
    CHECK(e.j_value == doctest::Approx(e.kinetic / 4.0).epsilon(1e-8));
  }
}

TEST_CASE("gradient against central differences") {
  const SolverConfig cfg = config(2, -0.5, 40, 16, 6.0);
  auto g = make_grid(40, 40, 16, 6.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  PinwheelState s;
  s.components = {sample(g, [](const OrbitPoint& p) { return std::exp(-0.5 * (p.r1 * p.r1 + p.r2 * p.r2)); }),
                  sample(g, [](const OrbitPoint& p) {
                    return (1 + 0.3 * std::cos(p.phi)) * std::exp(-0.4 * (p.r1 * p.r1 + 2 * p.r2 * p.r2));
                  })};
  std::vector<Field> v;
  for (int i = 0; i < 2; ++i) {
    Field d = sample(g, [&](const OrbitPoint& p) { return nd(rng) * std::exp(-0.3 * p.radius() * p.radius()); });
    v.push_back(d);
  }
  const auto grad = gradient(s, cfg);
  double analytic = 0.0;
  for (int i = 0; i < 2; ++i)
    for (std::size_t n = 0; n < v[i].size(); ++n) analytic += grad.euclidean[i][n] * v[i][n];
  // Step from the square root of machine epsilon, scaled to the state.
  const double t = std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, l2_norm(s.components[0]));
  PinwheelState a = s, b = s;
  a.axpy(t, v);
  b.axpy(-t, v);
  const double fd = (energy(a, cfg).j_value - energy(b, cfg).j_value) / (2 * t);
  CHECK(rel(analytic, fd) < 1e-5);
}

TEST_CASE("gradient of an equivariant state is equivariant") {
  const SolverConfig cfg = config(2, -1.0, 48, 16, 8.0);
  auto g = make_grid(48, 48, 16, 8.0);
  const PinwheelState s = sector_competitor(cfg, g);
  const auto grad = gradient(s, cfg);
  const Field mapped = compose_rho(grad.euclidean[0], OrbitMap(2, 1));
  CHECK(l2_norm(mapped - grad.euclidean[1]) <= 1e-10 * l2_norm(grad.euclidean[1]));
}

TEST_CASE("nehari_scale examples") {
  auto g = make_grid(48, 48, 16, 8.0);
  const SolverConfig cfg = config(2, -2.0, 48, 16, 8.0);
  const Field u = bubble(4, 1.0, g);
  SUBCASE("scaling the input scales t by the inverse") {
    PinwheelState s;
    s.components = {u, sample(g, [](const OrbitPoint& p) { return p.r1 > 3 ? 0.0 : 0.1 * std::exp(-p.r1); })};
    SolverConfig c0 = cfg;
    c0.beta = 0.0;
    const double t1 = nehari_scale(s, c0).t;
    PinwheelState s3 = s;
    s3 *= 3.0;
    CHECK(nehari_scale(s3, c0).t == doctest::Approx(t1 / 3.0).epsilon(1e-12));
  }
  SUBCASE("identical components at beta = -2 are infeasible") {
    PinwheelState s;
    s.components = {u, u};
    CHECK_THROWS_AS(nehari_scale(s, cfg), NehariInfeasible);
  }
  SUBCASE("normalized state has t = 1") {
    PinwheelState s = sector_competitor(cfg, g);
    nehari_normalize(s, cfg);
    CHECK(std::abs(nehari_scale(s, cfg).t - 1.0) < 1e-10);
  }
}

TEST_CASE("overlap matrix examples") {
  auto g = make_grid(48, 48, 8, 8.0);
  const Field a = sample(g, [](const OrbitPoint& p) { return p.r1 < 3 && p.r2 < 3 ? 1.0 : 0.0; });
  const Field b = sample(g, [](const OrbitPoint& p) { return p.r1 > 4 ? 1.0 : 0.0; });
  PinwheelState s;
  s.components = {a, b};
  const Matrix m = overlap_matrix(s);
  CHECK(m[0][1] == 0.0);
  CHECK(m[1][0] == 0.0);
  s.components = {a, a};
  const Matrix m2 = overlap_matrix(s);
  const double q = std::pow(lp_norm(a, 4.0), 4.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(m2[i][j] == doctest::Approx(q).epsilon(1e-12));
}

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.ell = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.beta = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.gauge_radius = c.R;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(SolverConfig{}.p() == 2.0);
  CHECK(SolverConfig{}.two_star() == 4.0);
}
