#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "csibreath/csi.hpp"

namespace csibreath {

struct Band {
  double min_bpm = 10.0;
  double max_bpm = 37.0;
};

// Savitzky-Golay smoothing of a real series. Output length equals input
// length; the first and last half-windows come from evaluating the boundary
// window's polynomial fit at the edge positions. Throws BadFilterParams on
// even window, order >= window, or series shorter than the window.
std::vector<double> savitzky_golay(const std::vector<double>& series,
                                   int window, int order);

// Complex smoothing: real and imaginary parts filtered independently.
ComplexSeries smooth(const ComplexSeries& series, int window, int order);

// Rotated projection re(x) cos(theta) + im(x) sin(theta).
std::vector<double> project(const ComplexSeries& series, double theta_rad);

// Band-peak to total energy ratio: the series is mean-removed, zero-padded
// to fft_size, and the strongest bin inside `band` is divided by the total
// energy over all positive-frequency bins (DC excluded). Throws ZeroEnergy
// for constant input (total energy < 1e-30).
double bnr(const std::vector<double>& series, double fs_hz, const Band& band,
           std::size_t fft_size = 8192);

struct ProjectionCandidate {
  double theta_rad = 0.0;
  std::vector<double> series;
  double bnr = 0.0;  // band-peak ratio of `series`, whichever scoring picked it
};

struct ThetaScore {
  double theta_rad = 0.0;
  double score = 0.0;
};

enum class ScoreKind { kBandPeakRatio, kVariance };

struct ExtractionResult {
  int subcarrier = 0;
  ProjectionCandidate best;
  std::vector<ThetaScore> scores;  // one per candidate angle, ascending
  ScoreKind scoring = ScoreKind::kBandPeakRatio;
  bool degenerate = false;  // variance scan of a constant series
};

struct ExtractParams {
  double theta_step_rad = M_PI / 50.0;  // 100 candidates over [0, 2 pi)
  Band band;
  std::size_t fft_size = 8192;
};

// Scans projection angles theta = 0, step, ... < 2 pi and keeps the
// candidate with the highest band-peak ratio; ties break toward the
// smallest angle. Throws ZeroEnergy only when every candidate fails.
// Window must cover two respiration periods at the band minimum.
ExtractionResult extract_pattern(const CsiRatioSeries& ratio,
                                 const ExtractParams& params);

// Same scan scored by sample variance (the documented failure baseline:
// drift-dominated windows steer it away from the breathing axis). A
// constant series yields theta = 0 with the degenerate flag set.
ExtractionResult select_by_variance(const CsiRatioSeries& ratio,
                                    const ExtractParams& params);

}  // namespace csibreath
