#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace csibreath {

using ComplexSample = std::complex<double>;
using ComplexSeries = std::vector<ComplexSample>;

// One sounding instant: values for every (antenna, subcarrier) pair.
// Antennas and subcarriers are 1-based everywhere a human sees them
// (files, result records, S sets); storage is row-major by antenna.
struct CsiFrame {
  double timestamp_s = 0.0;
  std::vector<ComplexSample> values;  // size = antennas * subcarriers

  ComplexSample& at(int antenna, int subcarrier, int subcarriers) {
    return values[static_cast<std::size_t>(antenna - 1) * subcarriers +
                  (subcarrier - 1)];
  }
  const ComplexSample& at(int antenna, int subcarrier, int subcarriers) const {
    return values[static_cast<std::size_t>(antenna - 1) * subcarriers +
                  (subcarrier - 1)];
  }
};

// A stream of frames at a fixed sounding rate.
struct CsiStream {
  double fs_hz = 0.0;
  double carrier_hz = 0.0;
  int antennas = 0;
  int subcarriers = 0;
  std::vector<CsiFrame> frames;
};

// Per-subcarrier complex ratio series tagged with its origin.
struct CsiRatioSeries {
  int subcarrier = 0;  // 1-based
  double fs_hz = 0.0;
  ComplexSeries samples;
};

// Element-wise numerator / denominator. Throws DenominatorUnderflow with the
// offending index when |denominator| < floor.
ComplexSeries csi_ratio(const ComplexSeries& numerator,
                        const ComplexSeries& denominator,
                        double floor = 1e-9);

std::vector<double> amplitude(const ComplexSeries& series);

struct PhaseSeries {
  std::vector<double> radians;  // unwrapped: consecutive diffs in (-pi, pi]
  bool degenerate = false;      // some sample had zero magnitude
};

PhaseSeries phase(const ComplexSeries& series);

// Throws std::invalid_argument on structural problems (mismatched frame
// shapes, non-increasing timestamps, fewer than 2 antennas).
void validate_stream(const CsiStream& stream);

// Convenience: ratio series for one subcarrier of a validated stream.
CsiRatioSeries ratio_for_subcarrier(const CsiStream& stream, int subcarrier,
                                    int numerator_antenna,
                                    int denominator_antenna,
                                    double floor = 1e-9);

}  // namespace csibreath
