#include "pinwheel/symmetry.hpp"

#include <cmath>
#include <stdexcept>

namespace pinwheel {

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double angle_diff(double a, double b) {
  double d = wrap_angle(a - b);
  return d > std::numbers::pi ? d - kTwoPi : d;
}

OrbitPoint::OrbitPoint(double r1_, double r2_, double phi_)
    : r1(std::abs(r1_)), r2(std::abs(r2_)), phi(wrap_angle(phi_)) {}

double OrbitPoint::radius() const { return std::hypot(r1, r2); }

bool OrbitPoint::degenerate() const { return r1 * r2 == 0.0; }

OrbitPoint reduce(const C2& z) {
  const double r1 = std::abs(z[0]);
  const double r2 = std::abs(z[1]);
  const Complex prod = z[0] * z[1];
  const double phi = (r1 * r2 > 0.0) ? std::arg(prod) : 0.0;
  return OrbitPoint(r1, r2, phi);
}

C2 representative(const OrbitPoint& p) {
  return {std::polar(p.r1, p.phi), Complex(p.r2, 0.0)};
}

double orbit_distance(const OrbitPoint& p, const OrbitPoint& q) {
  // min over the circle of |g z - w|^2 = |z|^2 + |w|^2 - 2 |r1 r1' + r2 r2' e^{i(phi - phi')}|
  const double cross = std::abs(Complex(p.r1 * q.r1, 0.0) + std::polar(p.r2 * q.r2, p.phi - q.phi));
  const double d2 = p.r1 * p.r1 + p.r2 * p.r2 + q.r1 * q.r1 + q.r2 * q.r2 - 2.0 * cross;
  return std::sqrt(std::max(d2, 0.0));
}

OrbitMap::OrbitMap(int ell, int j) : ell_(ell), j_(0), cos_(1.0), sin_(0.0) {
  if (ell < 1) throw std::invalid_argument("OrbitMap: ell must be >= 1");
  const int period = 2 * ell;
  j_ = ((j % period) + period) % period;
  // Exact values on the quarter turns keep tau and -id free of rounding.
  if (j_ == 0) {
    cos_ = 1.0, sin_ = 0.0;
  } else if (2 * j_ == ell) {
    cos_ = 0.0, sin_ = 1.0;
  } else if (j_ == ell) {
    cos_ = -1.0, sin_ = 0.0;
  } else if (2 * j_ == 3 * ell) {
    cos_ = 0.0, sin_ = -1.0;
  } else {
    const double angle = std::numbers::pi * j_ / ell;
    cos_ = std::cos(angle);
    sin_ = std::sin(angle);
  }
}

OrbitMap OrbitMap::compose(const OrbitMap& other) const {
  if (other.ell_ != ell_) throw std::invalid_argument("OrbitMap::compose: mismatched ell");
  return OrbitMap(ell_, j_ + other.j_);
}

C2 OrbitMap::apply(const C2& z) const {
  const Complex t1 = -std::conj(z[1]);
  const Complex t2 = std::conj(z[0]);
  return {cos_ * z[0] + sin_ * t1, cos_ * z[1] + sin_ * t2};
}

OrbitPoint rho_orbit(const OrbitPoint& p, const OrbitMap& m) {
  const double c = m.cos_term();
  const double s = m.sin_term();
  const double a = p.r1 * p.r1;
  const double b = p.r2 * p.r2;
  const double rr = p.r1 * p.r2;
  const double cphi = std::cos(p.phi);
  const double sphi = std::sin(p.phi);

  const double r1sq = c * c * a + s * s * b - 2.0 * c * s * rr * cphi;
  const double r2sq = s * s * a + c * c * b + 2.0 * c * s * rr * cphi;
  // r1' r2' e^{i phi'} = cs (r1^2 - r2^2) + c^2 r1 r2 e^{i phi} - s^2 r1 r2 e^{-i phi}
  const double re = c * s * (a - b) + (c * c - s * s) * rr * cphi;
  const double im = (c * c + s * s) * rr * sphi;

  const double r1n = std::sqrt(std::max(r1sq, 0.0));
  const double r2n = std::sqrt(std::max(r2sq, 0.0));
  const double scale = std::max(a + b, 1e-300);
  const bool degenerate = (r1n * r2n) <= 1e-14 * scale;
  const double phin = degenerate ? 0.0 : std::atan2(im, re);
  return OrbitPoint(r1n, r2n, phin);
}

int sigma_index(int i, int j, int ell) {
  const int k = ((i - 1 + j) % ell + ell) % ell;
  return k + 1;
}

std::array<FixedLocus, 2> rho_fixed_locus(int ell) {
  if (ell < 2) throw std::invalid_argument("rho_fixed_locus: ell must be >= 2");
  return {FixedLocus{0.5 * std::numbers::pi}, FixedLocus{1.5 * std::numbers::pi}};
}

bool on_fixed_locus(const OrbitPoint& p, double tol) {
  const double scale = std::max(p.radius(), 1.0);
  if (p.radius() <= tol) return true;
  if (std::abs(p.r1 - p.r2) > tol * scale) return false;
  return std::abs(std::cos(p.phi)) <= tol * scale;
}

}  // namespace pinwheel
