#include "csibreath/mobius.hpp"

#include <cmath>
#include <stdexcept>

#include "csibreath/errors.hpp"

namespace csibreath {

std::complex<double> mobius_map(const MobiusCoefficients& m,
                                std::complex<double> z) {
  const std::complex<double> den = m.c * z + m.d;
  if (std::abs(den) < 1e-12) {
    throw PoleHit("mobius_map: z within 1e-12 of the pole");
  }
  return (m.a * z + m.b) / den;
}

std::complex<double> mobius_map_decomposed(const MobiusCoefficients& m,
                                           std::complex<double> z) {
  if (m.c == std::complex<double>{0.0, 0.0}) {
    throw std::invalid_argument("mobius_map_decomposed: C must be nonzero");
  }
  const std::complex<double> shifted = z + m.d / m.c;
  if (std::abs(shifted) < 1e-12) {
    throw PoleHit("mobius_map_decomposed: z within 1e-12 of the pole");
  }
  return (m.determinant() / (m.c * m.c)) / shifted + m.a / m.c;
}

FittedCircle fit_circle(const ComplexSeries& points) {
  const std::size_t n = points.size();
  if (n < 3) throw DegenerateInput("fit_circle: need at least 3 points");

  // Centroid reduction keeps the normal equations well conditioned.
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.real();
    my += p.imag();
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double suu = 0.0, svv = 0.0, suv = 0.0;
  double suuu = 0.0, svvv = 0.0, suvv = 0.0, svuu = 0.0;
  for (const auto& p : points) {
    const double u = p.real() - mx;
    const double v = p.imag() - my;
    suu += u * u;
    svv += v * v;
    suv += u * v;
    suuu += u * u * u;
    svvv += v * v * v;
    suvv += u * v * v;
    svuu += v * u * u;
  }

  // Collinear (or coincident) points leave the 2x2 system singular.
  const double det = suu * svv - suv * suv;
  const double scale = suu + svv;
  if (!(det > 1e-12 * scale * scale) || scale == 0.0) {
    throw DegenerateInput("fit_circle: points are collinear within tolerance");
  }

  const double rhs_u = 0.5 * (suuu + suvv);
  const double rhs_v = 0.5 * (svvv + svuu);
  const double uc = (rhs_u * svv - rhs_v * suv) / det;
  const double vc = (rhs_v * suu - rhs_u * suv) / det;

  FittedCircle out;
  out.center = {mx + uc, my + vc};
  out.radius = std::sqrt(uc * uc + vc * vc + scale / static_cast<double>(n));

  double ss = 0.0;
  for (const auto& p : points) {
    const double d = std::abs(p - out.center) - out.radius;
    ss += d * d;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return out;
}

Orientation rotation_orientation(const ComplexSeries& points) {
  const FittedCircle circle = fit_circle(points);  // propagates DegenerateInput
  double area2 = 0.0;                              // twice the signed area
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const std::complex<double> p = points[i] - circle.center;
    const std::complex<double> q = points[i + 1] - circle.center;
    area2 += p.real() * q.imag() - p.imag() * q.real();
  }
  if (std::abs(area2) < 1e-6 * circle.radius * circle.radius) {
    return Orientation::kIndeterminate;
  }
  return area2 > 0.0 ? Orientation::kCounterClockwise : Orientation::kClockwise;
}

double arc_radian(const ComplexSeries& points, const FittedCircle& circle,
                  double max_deviation) {
  if (points.size() < 2) {
    throw std::invalid_argument("arc_radian: need at least 2 points");
  }
  if (!(circle.radius > 0.0)) {
    throw std::invalid_argument("arc_radian: circle radius must be positive");
  }

  double total = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::complex<double> rel = points[i] - circle.center;
    const double dev = std::abs(std::abs(rel) - circle.radius) / circle.radius;
    if (dev > max_deviation) throw OffCircle(i, dev);
    const double ang = std::arg(rel);
    if (i > 0) {
      // Assumes sampling denser than half a turn per step.
      total += std::remainder(ang - prev, 2.0 * M_PI);
    }
    prev = ang;
  }
  return total;
}

}  // namespace csibreath
