#pragma once

// Circle-group reduction of C^2 and the cyclic isometries acting on it.
//
// The circle acts on C^2 by g(z1, z2) = (g z1, conj(g) z2). Its orbits are
// labelled by (r1, r2, phi) = (|z1|, |z2|, arg z1 + arg z2). The isometry
// rho_ell^j z = cos(pi j/ell) z + sin(pi j/ell) tau z, with
// tau(z1, z2) = (-conj z2, conj z1), commutes with the circle action and
// therefore descends to the orbit space.

#include <array>
#include <complex>
#include <numbers>

namespace pinwheel {

using Complex = std::complex<double>;
using C2 = std::array<Complex, 2>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle into [0, 2pi).
double wrap_angle(double a);

/// Signed distance between two angles, in (-pi, pi].
double angle_diff(double a, double b);

struct OrbitPoint {
  double r1 = 0.0;
  double r2 = 0.0;
  double phi = 0.0;

  OrbitPoint() = default;
  OrbitPoint(double r1_, double r2_, double phi_);

  /// Ambient radius |z|.
  double radius() const;
  /// phi carries no information when r1 * r2 == 0.
  bool degenerate() const;
};

/// Orbit of a point of C^2.
OrbitPoint reduce(const C2& z);

/// A representative point of C^2 on the orbit (arg z2 = 0).
C2 representative(const OrbitPoint& p);

/// Distance in R^4 between the circle orbits of p and q.
double orbit_distance(const OrbitPoint& p, const OrbitPoint& q);

/// rho_ell^j. The power is kept modulo 2 ell: the matrix has order 2 ell
/// even though its action on orbit coordinates has order ell.
class OrbitMap {
 public:
  OrbitMap(int ell, int j);

  static OrbitMap identity(int ell) { return OrbitMap(ell, 0); }
  /// tau itself, i.e. rho_2^1.
  static OrbitMap tau() { return OrbitMap(2, 1); }

  int ell() const { return ell_; }
  int j() const { return j_; }
  double cos_term() const { return cos_; }
  double sin_term() const { return sin_; }

  OrbitMap compose(const OrbitMap& other) const;
  OrbitMap inverse() const { return OrbitMap(ell_, -j_); }
  OrbitMap power(int k) const { return OrbitMap(ell_, j_ * k); }

  /// Action on C^2.
  C2 apply(const C2& z) const;

  bool operator==(const OrbitMap& o) const { return ell_ == o.ell_ && j_ == o.j_; }

 private:
  int ell_;
  int j_;
  double cos_;
  double sin_;
};

/// Induced action of m on orbit coordinates. At degenerate images
/// (r1' r2' == 0) phi is set to 0.
OrbitPoint rho_orbit(const OrbitPoint& p, const OrbitMap& m);

/// sigma^j(i) = ((i + j - 1) mod ell) + 1 on 1-based component indices.
int sigma_index(int i, int j, int ell);

/// The orbits {r1 = r2, phi = pi/2} and {r1 = r2, phi = 3pi/2}: the only
/// points of the orbit space (besides the origin) fixed by rho_ell, ell >= 2.
struct FixedLocus {
  double phi;
  OrbitPoint at(double t) const { return OrbitPoint(t, t, phi); }
};

std::array<FixedLocus, 2> rho_fixed_locus(int ell);

/// True when p lies on the fixed locus (or is the origin) within tol.
bool on_fixed_locus(const OrbitPoint& p, double tol = 1e-12);

/// Dilation/translation gauge. In four dimensions xi is always zero.
struct GaugeTransform {
  double epsilon = 1.0;
  double xi = 0.0;
};

}  // namespace pinwheel
