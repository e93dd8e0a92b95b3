#include "pinwheel/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "pinwheel/errors.hpp"
#include "pinwheel/kernels.hpp"

namespace pinwheel {

ReducedGrid::ReducedGrid(int n_r1, int n_r2, int n_phi, double radius)
    : n_r1_(n_r1), n_r2_(n_r2), n_phi_(n_phi), radius_(radius) {
  if (n_r1 < 2 || n_r2 < 2) throw PreconditionError("ReducedGrid: need at least 2 radial cells");
  if (n_phi < 2 || n_phi % 2 != 0) throw PreconditionError("ReducedGrid: n_phi must be even and >= 2");
  if (!(radius > 0.0)) throw PreconditionError("ReducedGrid: radius must be positive");
  dr1_ = radius / n_r1;
  dr2_ = radius / n_r2;
  dphi_ = kTwoPi / n_phi;

  const std::size_t np = plane_size();
  active_.assign(np, 0);
  weight_.assign(np, 0.0);
  coef_r1_.assign(np, 0.0);
  coef_r2_.assign(np, 0.0);
  coef_phi_.assign(np, 0.0);
  const double r2max = radius * radius;
  for (int i = 0; i < n_r1; ++i)
    for (int j = 0; j < n_r2; ++j) {
      const double a = r1(i), b = r2(j);
      if (a * a + b * b > r2max) continue;
      const std::size_t p = plane_index(i, j);
      active_[p] = 1;
      weight_[p] = kTwoPi * a * b * dr1_ * dr2_ * dphi_;
      // Face fluxes of 2 pi r1 r2 [u_r1^2 + u_r2^2 + (1/r1^2 + 1/r2^2) u_phi^2].
      coef_r1_[p] = kTwoPi * (i + 1) * dr1_ * b * dr2_ * dphi_ / dr1_;
      coef_r2_[p] = kTwoPi * a * dr1_ * (j + 1) * dr2_ * dphi_ / dr2_;
      coef_phi_[p] = kTwoPi * a * b * dr1_ * dr2_ * (1.0 / (a * a) + 1.0 / (b * b)) / dphi_;
    }
}

double ReducedGrid::volume() const {
  double s = 0.0;
  for (double w : weight_) s += w;
  return s * n_phi_;
}

GridPtr make_grid(int n_r1, int n_r2, int n_phi, double radius) {
  return std::make_shared<const ReducedGrid>(n_r1, n_r2, n_phi, radius);
}

Field::Field(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw PreconditionError("Field: value count does not match grid");
}

void Field::enforce_dirichlet() {
  const auto& g = *grid_;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) values_[g.index(i, j, k)] = 0.0;
    }
}

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& o) { return axpy(1.0, o); }
Field& Field::operator-=(const Field& o) { return axpy(-1.0, o); }

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& o) {
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += a * o.values_[n];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

double integrate(const Field& f) { return kernels::omp::weighted_sum(f.grid(), f.values()); }

double integrate_product(const Field& a, const Field& b) {
  return kernels::omp::weighted_dot(a.grid(), a.values(), b.values());
}

double lp_norm(const Field& u, double q) {
  if (q < 1.0) throw PreconditionError("lp_norm: exponent must be >= 1");
  const double s = kernels::omp::weighted_pow(u.grid(), u.values(), q);
  return std::pow(s, 1.0 / q);
}

double dirichlet_energy(const Field& u) {
  return kernels::omp::stiffness_form(u.grid(), u.values(), u.values());
}

double dirichlet_product(const Field& a, const Field& b) {
  return kernels::omp::stiffness_form(a.grid(), a.values(), b.values());
}

double l2_norm(const Field& u) { return lp_norm(u, 2.0); }

namespace {

// Snap coordinates that land on a node so that exact grid symmetries (for
// instance tau on a square grid) reproduce nodal values bit for bit.
inline double snap(double x) {
  const double n = std::round(x);
  return std::abs(x - n) < 1e-9 ? n : x;
}

}  // namespace

double extended_value(const Field& u, int i, int j, int k) {
  const auto& g = u.grid();
  const int np = g.n_phi();
  int shift = 0;
  if (i < 0) {
    i = -1 - i;
    shift += np / 2;
  }
  if (j < 0) {
    j = -1 - j;
    shift += np / 2;
  }
  if (i >= g.n_r1() || j >= g.n_r2() || !g.active(i, j)) return 0.0;
  k = ((k + shift) % np + np) % np;
  return u.at(i, j, k);
}

double interpolate(const Field& u, const OrbitPoint& p) {
  const auto& g = u.grid();
  const double R = g.radius();
  if (p.r1 * p.r1 + p.r2 * p.r2 > R * R) return 0.0;
  const double x = snap(p.r1 / g.dr1() - 0.5);
  const double y = snap(p.r2 / g.dr2() - 0.5);
  const double z = snap(p.phi / g.dphi() - 0.5);
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const int k0 = static_cast<int>(std::floor(z));
  const double tx = x - i0, ty = y - j0, tz = z - k0;
  double acc = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double wa = a ? tx : 1.0 - tx;
    if (wa == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      const double wb = b ? ty : 1.0 - ty;
      if (wb == 0.0) continue;
      for (int c = 0; c < 2; ++c) {
        const double wc = c ? tz : 1.0 - tz;
        if (wc == 0.0) continue;
        acc += wa * wb * wc * extended_value(u, i0 + a, j0 + b, k0 + c);
      }
    }
  }
  return acc;
}

Field compose_rho(const Field& u, const OrbitMap& m) {
  const auto& g = u.grid();
  Field out(u.grid_ptr());
  if (m.j() == 0) return u;
  const int nr = g.n_r1();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) out.at(i, j, k) = interpolate(u, rho_orbit(g.node(i, j, k), m));
    }
  return out;
}

namespace {

// Catmull-Rom weights for offsets -1, 0, 1, 2 at fraction t.
std::array<double, 4> cubic_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
}

}  // namespace

// phi is unchanged by a dilation, so only (r1, r2) is interpolated, with a
// bicubic stencil: trilinear error here shows up directly in gauge fixes.
Field dilate(const Field& u, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("dilate: scale must be positive");
  const auto& g = u.grid();
  Field out(u.grid_ptr());
  const int nr = g.n_r1();
  const double R = g.radius();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      const double r1 = eps * g.r1(i), r2 = eps * g.r2(j);
      if (r1 * r1 + r2 * r2 > R * R) continue;
      const double x = snap(r1 / g.dr1() - 0.5), y = snap(r2 / g.dr2() - 0.5);
      const int i0 = static_cast<int>(std::floor(x)), j0 = static_cast<int>(std::floor(y));
      const auto wx = cubic_weights(x - i0), wy = cubic_weights(y - j0);
      for (int k = 0; k < g.n_phi(); ++k) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) acc += wx[a] * wy[b] * extended_value(u, i0 - 1 + a, j0 - 1 + b, k);
        out.at(i, j, k) = eps * acc;
      }
    }
  return out;
}

FullGrid lift_to_full(const Field& u, const FullGridSpec& spec) {
  if (spec.n < 1 || !(spec.half_width > 0.0)) throw PreconditionError("lift_to_full: bad grid spec");
  const double total = std::pow(static_cast<double>(spec.n), 4);
  if (total > static_cast<double>(spec.max_nodes))
    throw BudgetError("lift_to_full: " + std::to_string(static_cast<long long>(total)) +
                      " nodes exceed the configured limit of " + std::to_string(spec.max_nodes));
  FullGrid fg;
  fg.n = spec.n;
  fg.half_width = spec.half_width;
  fg.h = 2.0 * spec.half_width / spec.n;
  fg.values.assign(static_cast<std::size_t>(total), 0.0);
  const int n = spec.n;
#pragma omp parallel for schedule(static)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const C2 z{Complex(fg.coord(a), fg.coord(b)), Complex(fg.coord(c), fg.coord(d))};
          fg.values[fg.index(a, b, c, d)] = interpolate(u, reduce(z));
        }
  return fg;
}

}  // namespace pinwheel
