#include "pinwheel/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pinwheel::kernels {

namespace {

inline double neighbour_or_zero(const ReducedGrid& g, std::span<const double> u, int i, int j, int k) {
  if (i >= g.n_r1() || j >= g.n_r2() || !g.active(i, j)) return 0.0;
  return u[g.index(i, j, k)];
}

inline double stiffness_at(const ReducedGrid& g, std::span<const double> u, int i, int j, int k) {
  const int np = g.n_phi();
  const double c = u[g.index(i, j, k)];
  const double prev = u[g.index(i, j, (k + np - 1) % np)];
  const double next = u[g.index(i, j, (k + 1) % np)];
  double out = g.coef_phi(i, j) * (2.0 * c - prev - next);
  if (i > 0) out += g.coef_r1(i - 1, j) * (c - u[g.index(i - 1, j, k)]);
  out += g.coef_r1(i, j) * (c - neighbour_or_zero(g, u, i + 1, j, k));
  if (j > 0) out += g.coef_r2(i, j - 1) * (c - u[g.index(i, j - 1, k)]);
  out += g.coef_r2(i, j) * (c - neighbour_or_zero(g, u, i, j + 1, k));
  return out;
}

// Upper faces of node (i, j, k): r1, r2 and phi directions.
inline double face_form_at(const ReducedGrid& g, std::span<const double> a, std::span<const double> b,
                           int i, int j, int k) {
  const int np = g.n_phi();
  const std::size_t n = g.index(i, j, k);
  const int kn = (k + 1) % np;
  const double da_p = a[n] - a[g.index(i, j, kn)];
  const double db_p = b[n] - b[g.index(i, j, kn)];
  const double da_1 = a[n] - neighbour_or_zero(g, a, i + 1, j, k);
  const double db_1 = b[n] - neighbour_or_zero(g, b, i + 1, j, k);
  const double da_2 = a[n] - neighbour_or_zero(g, a, i, j + 1, k);
  const double db_2 = b[n] - neighbour_or_zero(g, b, i, j + 1, k);
  return g.coef_phi(i, j) * da_p * db_p + g.coef_r1(i, j) * da_1 * db_1 + g.coef_r2(i, j) * da_2 * db_2;
}

inline double reaction_at(Components comps, int i, double beta, std::size_t n) {
  const double ui = comps[i][n];
  double cross = 0.0;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    const double uj = comps[j][n];
    cross += uj * uj;
  }
  return ui * ui * ui + beta * cross * ui;
}

inline double abs_pow(double v, double q) {
  const double a = std::abs(v);
  if (q == 2.0) return a * a;
  if (q == 4.0) {
    const double a2 = a * a;
    return a2 * a2;
  }
  return std::pow(a, q);
}

// Row-partial reduction shared by the omp kernels. `row` returns the serial
// sum over one r1-row.
template <class Row>
double ordered_row_sum(const ReducedGrid& g, Row&& row) {
  const int nr = g.n_r1();
  std::vector<double> partial(nr, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i) partial[i] = row(i);
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

namespace serial {

void apply_stiffness(const ReducedGrid& g, std::span<const double> u, std::span<double> out) {
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j)
      for (int k = 0; k < g.n_phi(); ++k)
        out[g.index(i, j, k)] = g.active(i, j) ? stiffness_at(g, u, i, j, k) : 0.0;
}

double stiffness_form(const ReducedGrid& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) s += face_form_at(g, a, b, i, j, k);
    }
  return s;
}

double weighted_sum(const ReducedGrid& g, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += g.weights()[n / g.n_phi()] * f[n];
  return s;
}

double weighted_dot(const ReducedGrid& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += g.weights()[n / g.n_phi()] * a[n] * b[n];
  return s;
}

double weighted_pow(const ReducedGrid& g, std::span<const double> u, double q) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += g.weights()[n / g.n_phi()] * abs_pow(u[n], q);
  return s;
}

double weighted_sq_sq(const ReducedGrid& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += g.weights()[n / g.n_phi()] * a[n] * a[n] * b[n] * b[n];
  return s;
}

void reaction(const ReducedGrid& g, Components comps, int i, double beta, std::span<double> out) {
  for (std::size_t n = 0; n < g.size(); ++n)
    out[n] = g.weights()[n / g.n_phi()] * reaction_at(comps, i, beta, n);
}

}  // namespace serial

namespace omp {

void apply_stiffness(const ReducedGrid& g, std::span<const double> u, std::span<double> out) {
  const int nr = g.n_r1();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      const bool act = g.active(i, j);
      for (int k = 0; k < g.n_phi(); ++k) out[g.index(i, j, k)] = act ? stiffness_at(g, u, i, j, k) : 0.0;
    }
}

double stiffness_form(const ReducedGrid& g, std::span<const double> a, std::span<const double> b) {
  return ordered_row_sum(g, [&](int i) {
    double s = 0.0;
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) s += face_form_at(g, a, b, i, j, k);
    }
    return s;
  });
}

namespace {
template <class Node>
double weighted_rows(const ReducedGrid& g, Node&& node) {
  return ordered_row_sum(g, [&](int i) {
    double s = 0.0;
    for (int j = 0; j < g.n_r2(); ++j) {
      const double w = g.weight(i, j);
      if (w == 0.0) continue;
      double col = 0.0;
      for (int k = 0; k < g.n_phi(); ++k) col += node(g.index(i, j, k));
      s += w * col;
    }
    return s;
  });
}
}  // namespace

double weighted_sum(const ReducedGrid& g, std::span<const double> f) {
  return weighted_rows(g, [&](std::size_t n) { return f[n]; });
}

double weighted_dot(const ReducedGrid& g, std::span<const double> a, std::span<const double> b) {
  return weighted_rows(g, [&](std::size_t n) { return a[n] * b[n]; });
}

double weighted_pow(const ReducedGrid& g, std::span<const double> u, double q) {
  return weighted_rows(g, [&](std::size_t n) { return abs_pow(u[n], q); });
}

double weighted_sq_sq(const ReducedGrid& g, std::span<const double> a, std::span<const double> b) {
  return weighted_rows(g, [&](std::size_t n) { return a[n] * a[n] * b[n] * b[n]; });
}

void reaction(const ReducedGrid& g, Components comps, int i, double beta, std::span<double> out) {
  const int nr = g.n_r1();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < nr; ++r)
    for (int j = 0; j < g.n_r2(); ++j) {
      const double w = g.weight(r, j);
      for (int k = 0; k < g.n_phi(); ++k) {
        const std::size_t n = g.index(r, j, k);
        out[n] = w == 0.0 ? 0.0 : w * reaction_at(comps, i, beta, n);
      }
    }
}

}  // namespace omp

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace pinwheel::kernels
