#pragma once

#include <complex>
#include <vector>

#include "csibreath/csi.hpp"

namespace csibreath {

// Coefficients of w = (A z + B) / (C z + D). For the two-antenna CSI ratio
// with unit-circle dynamic term z: A and B are the numerator antenna's
// dynamic amplitude and static component; C folds the antenna path
// difference into the denominator's dynamic amplitude, D is its static
// component. Non-degenerate iff B*C - A*D != 0 (image is a proper circle,
// not a point).
struct MobiusCoefficients {
  std::complex<double> a, b, c, d;

  std::complex<double> determinant() const { return b * c - a * d; }
};

// Direct evaluation of (A z + B)/(C z + D). Throws PoleHit when
// |C z + D| < 1e-12.
std::complex<double> mobius_map(const MobiusCoefficients& m,
                                std::complex<double> z);

// Same map written as inversion-plus-similarity:
//   w = ((B C - A D)/C^2) * 1/(z + D/C) + A/C
// Requires C != 0. Used to cross-check the direct form.
std::complex<double> mobius_map_decomposed(const MobiusCoefficients& m,
                                           std::complex<double> z);

struct FittedCircle {
  std::complex<double> center;
  double radius = 0.0;
  double rms_residual = 0.0;  // RMS of (distance-to-center - radius)
};

// Algebraic least-squares circle fit (Kasa, centroid-reduced normal
// equations). Throws DegenerateInput for < 3 points or collinear-within-
// tolerance input.
FittedCircle fit_circle(const ComplexSeries& points);

enum class Orientation { kClockwise, kCounterClockwise, kIndeterminate };

// Traversal direction around the fitted circle center, from the sign of the
// accumulated cross products (signed area). Indeterminate when
// |signed area| < 1e-6 * radius^2.
Orientation rotation_orientation(const ComplexSeries& points);

// Net signed angle swept around `circle.center` from first to last sample,
// clockwise negative. Throws OffCircle when a sample deviates from the
// circle by more than `max_deviation` (fraction of radius).
double arc_radian(const ComplexSeries& points, const FittedCircle& circle,
                  double max_deviation = 0.1);

}  // namespace csibreath
