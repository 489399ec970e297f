#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "csibreath/csi.hpp"
#include "csibreath/extract.hpp"

namespace csibreath {

// Normalized autocorrelation, values[0] == 1:
//   r(k) = sum_{t=k}^{T-1} (y_t - mean)(y_{t-k} - mean) / sum (y_t - mean)^2
// Throws ZeroVariance for (numerically) constant input.
struct AutocorrSeries {
  std::vector<double> values;
};

AutocorrSeries autocorrelation(const std::vector<double>& series);

// Smallest lag in [min_lag, max_lag] that is a positive local maximum whose
// height above the running minimum of r over [1, k] reaches `prominence`.
// Boundary maxima are admitted under the same prominence and positivity
// conditions: falling into the range at min_lag (r[min_lag] >= r[min_lag+1])
// or rising into the cap at max_lag (r[max_lag] > r[max_lag-1]), so a
// periodicity sitting at a band edge is still found. max_lag == 0 means
// "end of series". Throws NoPeak when nothing qualifies.
std::size_t first_peak_lag(const AutocorrSeries& r, std::size_t min_lag,
                           std::size_t max_lag = 0, double prominence = 0.1);

struct SubcarrierPattern {
  int subcarrier = 0;  // 1-based
  double bnr = 0.0;
  AutocorrSeries autocorr;
};

struct FusedAutocorr {
  AutocorrSeries fused;
  std::vector<int> selected;  // contributing subcarriers, ascending
};

// BNR-weighted fusion over the subcarriers whose BNR exceeds gate * max;
// the max-BNR subcarrier always qualifies. The sum runs in subcarrier-id
// order so the result is invariant to input ordering, and is renormalized
// to fused[0] == 1. Throws ZeroEnergy when every BNR is zero.
FusedAutocorr combine_subcarriers(const std::vector<SubcarrierPattern>& patterns,
                                  double gate = 0.7);

struct MotionGateParams {
  double threshold = 0.35;     // motion share of noise-excess energy
  double significance = 3.0;   // motion excess must beat this x noise floor
  double winding_bound = 6.0;  // total angular travel, turns per second
  double resp_max_hz = 1.0;
  // Lower edge of the motion band. The gap above resp_max_hz absorbs window
  // leakage: a one-second cell resolves only ~1 Hz, so the skirts of a fast
  // breathing line land well above the respiration boundary.
  double motion_min_hz = 2.5;
  double motion_max_hz = 40.0;
};

struct StationarityMask {
  double window_s = 1.0;
  std::vector<std::uint8_t> stationary;  // one cell per window, tiling the stream
};

// Flags windows whose ratio series shows above-respiration-band energy well
// over the noise floor, or whose trajectory winds around its centroid faster
// than any sub-wavelength chest movement can. The floor is the median across
// cells of the top-of-spectrum density: breathing never reaches that band,
// and taking the median keeps a moving cell's chirp skirts from inflating
// its own floor. Plain high-sigma noise stays stationary by construction:
// its band energy matches the floor prediction everywhere and its smoothed
// winding stays slow.
StationarityMask motion_gate(const CsiRatioSeries& ratio, double window_s = 1.0,
                             const MotionGateParams& params = {});

enum class Selection { kBandPeakRatio, kVariance, kFixedAngle };

struct EstimatorConfig {
  double window_s = 12.0;
  double hop_s = 1.0;
  double theta_step_rad = M_PI / 50.0;
  Band band;
  std::size_t fft_size = 8192;
  double gate = 0.7;
  int sg_window = 51;
  int sg_order = 3;
  double ratio_floor = 1e-9;
  double peak_prominence = 0.1;
  int numerator_antenna = 1;
  int denominator_antenna = 2;
  double motion_window_s = 1.0;
  MotionGateParams motion;
  Selection selection = Selection::kBandPeakRatio;
  double fixed_theta_rad = 0.0;  // used by Selection::kFixedAngle
};

struct RateEstimate {
  enum class Status { kOk, kNonStationary, kNoPeak };

  double window_start_s = 0.0;
  double window_end_s = 0.0;
  Status status = Status::kOk;
  bool stationary = true;
  double rate_bpm = 0.0;           // valid when status == kOk
  std::size_t first_peak_lag = 0;  // valid when status == kOk
  bool out_of_band = false;
  std::vector<int> subcarriers;  // fusion set S, ascending
  std::vector<std::pair<int, double>> per_subcarrier_bnr;  // evaluated subcarriers
};

// Sliding-window driver: ratio -> motion gate -> smooth -> candidate
// selection -> per-subcarrier autocorrelation -> BNR-gated fusion -> first
// peak. One record per hop; non-stationary windows carry no rate.
std::vector<RateEstimate> estimate_rate(const CsiStream& stream,
                                        const EstimatorConfig& config);

}  // namespace csibreath
