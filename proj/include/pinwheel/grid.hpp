#pragma once

// Cell-centred discretization of circle-invariant functions on the ball
// {r1^2 + r2^2 <= R^2} of C^2, in orbit coordinates (r1, r2, phi).
//
// Storage is r1-major: index = (i * n_r2 + j) * n_phi + k. Nodes whose
// centre lies outside the ball are inactive and always hold 0.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pinwheel/symmetry.hpp"

namespace pinwheel {

class ReducedGrid {
 public:
  ReducedGrid(int n_r1, int n_r2, int n_phi, double radius);

  int n_r1() const { return n_r1_; }
  int n_r2() const { return n_r2_; }
  int n_phi() const { return n_phi_; }
  double radius() const { return radius_; }
  double dr1() const { return dr1_; }
  double dr2() const { return dr2_; }
  double dphi() const { return dphi_; }

  std::size_t size() const { return static_cast<std::size_t>(n_r1_) * n_r2_ * n_phi_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(n_r1_) * n_r2_; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_r2_ + j) * n_phi_ + k;
  }
  std::size_t plane_index(int i, int j) const { return static_cast<std::size_t>(i) * n_r2_ + j; }

  double r1(int i) const { return (i + 0.5) * dr1_; }
  double r2(int j) const { return (j + 0.5) * dr2_; }
  double phi(int k) const { return (k + 0.5) * dphi_; }
  OrbitPoint node(int i, int j, int k) const { return OrbitPoint(r1(i), r2(j), phi(k)); }

  bool active(int i, int j) const { return active_[plane_index(i, j)] != 0; }
  bool active_node(std::size_t n) const { return active_[n / n_phi_] != 0; }

  /// Quadrature weight 2 pi r1 r2 dr1 dr2 dphi of every node in column (i, j);
  /// zero for inactive columns.
  double weight(int i, int j) const { return weight_[plane_index(i, j)]; }
  std::span<const double> weights() const { return weight_; }

  /// Stiffness coefficient of the face between (i, j) and (i + 1, j).
  double coef_r1(int i, int j) const { return coef_r1_[plane_index(i, j)]; }
  /// Stiffness coefficient of the face between (i, j) and (i, j + 1).
  double coef_r2(int i, int j) const { return coef_r2_[plane_index(i, j)]; }
  /// Stiffness coefficient of the faces between (i, j, k) and (i, j, k + 1).
  double coef_phi(int i, int j) const { return coef_phi_[plane_index(i, j)]; }

  /// Sum of all node weights (discrete volume of the ball).
  double volume() const;

  bool operator==(const ReducedGrid& o) const {
    return n_r1_ == o.n_r1_ && n_r2_ == o.n_r2_ && n_phi_ == o.n_phi_ && radius_ == o.radius_;
  }

 private:
  int n_r1_, n_r2_, n_phi_;
  double radius_, dr1_, dr2_, dphi_;
  std::vector<unsigned char> active_;
  std::vector<double> weight_;
  std::vector<double> coef_r1_, coef_r2_, coef_phi_;
};

using GridPtr = std::shared_ptr<const ReducedGrid>;

GridPtr make_grid(int n_r1, int n_r2, int n_phi, double radius);

/// A circle-invariant scalar sampled on a ReducedGrid.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> values);

  const ReducedGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::vector<double>& data() { return values_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }
  double& at(int i, int j, int k) { return values_[grid_->index(i, j, k)]; }
  double at(int i, int j, int k) const { return values_[grid_->index(i, j, k)]; }

  /// Zero every inactive node.
  void enforce_dirichlet();
  bool finite() const;
  double max_abs() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
  /// this += a * o
  Field& axpy(double a, const Field& o);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);

/// Build a field from a function of orbit coordinates (inactive nodes stay 0).
template <class F>
Field sample(GridPtr grid, F&& f) {
  Field out(grid);
  const auto& g = *grid;
  for (int i = 0; i < g.n_r1(); ++i)
    for (int j = 0; j < g.n_r2(); ++j) {
      if (!g.active(i, j)) continue;
      for (int k = 0; k < g.n_phi(); ++k) out.at(i, j, k) = f(g.node(i, j, k));
    }
  return out;
}

/// Integral over R^4 of the invariant extension of f.
double integrate(const Field& f);
/// Integral of the pointwise product.
double integrate_product(const Field& a, const Field& b);
/// (int |u|^q)^(1/q)
double lp_norm(const Field& u, double q);
/// int |grad u|^2 with the finite-volume stiffness form.
double dirichlet_energy(const Field& u);
/// Dirichlet inner product <a, b> = int grad a . grad b.
double dirichlet_product(const Field& a, const Field& b);
/// L2 norm.
double l2_norm(const Field& u);

/// Trilinear interpolation in (r1, r2, phi), periodic in phi, reflected
/// through the axes (z1 -> -z1 shifts phi by pi). Zero outside the ball.
double interpolate(const Field& u, const OrbitPoint& p);

/// Value at integer node coordinates, periodic in k and extended through
/// the axes: index -1 - i stands for the orbit (r1, r2, phi + pi). Zero
/// beyond the ball.
double extended_value(const Field& u, int i, int j, int k);

/// v(p) = u(rho_orbit(p, m)).
Field compose_rho(const Field& u, const OrbitMap& m);

/// w(x) = eps * u(eps x): the four-dimensional critical dilation.
Field dilate(const Field& u, double eps);

/// Cartesian sampling of the invariant extension on [-L, L]^4.
struct FullGridSpec {
  int n = 32;
  double half_width = 1.0;
  std::size_t max_nodes = 20'000'000;
};

struct FullGrid {
  int n = 0;
  double half_width = 0.0;
  double h = 0.0;
  std::vector<double> values;

  double coord(int a) const { return -half_width + (a + 0.5) * h; }
  std::size_t index(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * n + b) * n + c) * n + d;
  }
  /// Midpoint-rule integral of g(value).
  template <class G>
  double riemann_sum(G&& g) const {
    double s = 0.0;
    for (double v : values) s += g(v);
    return s * h * h * h * h;
  }
};

FullGrid lift_to_full(const Field& u, const FullGridSpec& spec);

}  // namespace pinwheel
