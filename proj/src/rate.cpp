#include "csibreath/rate.hpp"

#include <algorithm>
#include <complex>
#include <stdexcept>

#include "csibreath/errors.hpp"
#include "csibreath/fft.hpp"

namespace csibreath {

namespace {

bool all_equal(const std::vector<double>& x) {
  for (double v : x) {
    if (v != x.front()) return false;
  }
  return true;
}

}  // namespace

AutocorrSeries autocorrelation(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("autocorrelation: series too short");
  if (all_equal(series)) throw ZeroVariance("autocorrelation: constant series");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> centered(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = series[i] - mean;
    peak = std::max(peak, std::abs(centered[i]));
  }
  if (peak <= 1e-12 * (1.0 + std::abs(mean))) {
    throw ZeroVariance("autocorrelation: variance vanishes");
  }

  // Lag sums via the Wiener-Khinchin route; the transform is padded past
  // 2n-1 so the circular convolution equals the linear one.
  const std::size_t nfft = next_power_of_two(2 * n - 1);
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) buf[i] = {centered[i], 0.0};
  fft(buf);
  for (auto& v : buf) v = std::norm(v);
  fft(buf, true);

  AutocorrSeries out;
  out.values.resize(n);
  const double denom = buf[0].real();
  for (std::size_t k = 0; k < n; ++k) out.values[k] = buf[k].real() / denom;
  out.values[0] = 1.0;
  return out;
}

std::size_t first_peak_lag(const AutocorrSeries& r, std::size_t min_lag,
                           std::size_t max_lag, double prominence) {
  const std::size_t n = r.values.size();
  if (min_lag < 1) throw std::invalid_argument("first_peak_lag: min_lag must be >= 1");
  if (n < 3) throw NoPeak("first_peak_lag: series too short");
  if (max_lag == 0 || max_lag > n - 2) max_lag = n - 2;
  if (min_lag > max_lag) throw NoPeak("first_peak_lag: empty lag range");

  const std::vector<double>& v = r.values;
  double running_min = v[1];
  for (std::size_t k = 1; k < min_lag; ++k) running_min = std::min(running_min, v[k]);

  for (std::size_t k = min_lag; k <= max_lag; ++k) {
    running_min = std::min(running_min, v[k]);
    // Peaks falling into the range at min_lag or rising into the cap at
    // max_lag count as boundary maxima: a periodicity at the band edge is
    // still a detection, not a miss.
    bool local_max;
    if (k == min_lag) {
      local_max = v[k] >= v[k + 1];
    } else if (k == max_lag) {
      local_max = v[k - 1] < v[k];
    } else {
      local_max = v[k - 1] < v[k] && v[k] >= v[k + 1];
    }
    if (local_max && v[k] > 0.0 && v[k] - running_min >= prominence) {
      return k;
    }
  }
  throw NoPeak("first_peak_lag: no qualifying peak in the lag range");
}

FusedAutocorr combine_subcarriers(const std::vector<SubcarrierPattern>& patterns,
                                  double gate) {
  if (patterns.empty()) {
    throw std::invalid_argument("combine_subcarriers: no patterns");
  }
  if (!(gate > 0.0 && gate <= 1.0)) {
    throw std::invalid_argument("combine_subcarriers: gate must be in (0, 1]");
  }
  const std::size_t len = patterns.front().autocorr.values.size();
  double eps = 0.0;
  for (const auto& p : patterns) {
    if (p.autocorr.values.size() != len || len == 0) {
      throw std::invalid_argument("combine_subcarriers: length mismatch");
    }
    if (!(p.bnr >= 0.0)) {
      throw std::invalid_argument("combine_subcarriers: negative BNR");
    }
    eps = std::max(eps, p.bnr);
  }
  if (eps < 1e-30) {
    throw ZeroEnergy("combine_subcarriers: every BNR is zero");
  }

  std::vector<const SubcarrierPattern*> picked;
  for (const auto& p : patterns) {
    if (p.bnr > gate * eps || p.bnr == eps) picked.push_back(&p);
  }
  // Fixed summation order makes the result independent of input ordering.
  std::sort(picked.begin(), picked.end(),
            [](const SubcarrierPattern* a, const SubcarrierPattern* b) {
              return a->subcarrier < b->subcarrier;
            });

  FusedAutocorr out;
  out.fused.values.assign(len, 0.0);
  double weight = 0.0;
  for (const auto* p : picked) {
    out.selected.push_back(p->subcarrier);
    weight += p->bnr;
    for (std::size_t k = 0; k < len; ++k) {
      out.fused.values[k] += p->bnr * p->autocorr.values[k];
    }
  }
  for (auto& v : out.fused.values) v /= weight;
  out.fused.values[0] = 1.0;
  return out;
}

namespace {

struct CellBands {
  double resp = 0.0;    // 0 < |f| <= resp_max
  double motion = 0.0;  // resp_max < |f| <= motion_max
  double noise = 0.0;   // above motion_max
  double raw_power = 0.0;  // sum |v|^2 before mean removal
  std::size_t n_resp = 0, n_motion = 0, n_noise = 0;
};

CellBands cell_band_energy(const ComplexSeries& cell, double fs,
                           const MotionGateParams& p) {
  const std::size_t m = cell.size();
  const std::size_t nfft = next_power_of_two(m);
  ComplexSample mean{0.0, 0.0};
  double raw_power = 0.0;
  for (const auto& v : cell) {
    mean += v;
    raw_power += std::norm(v);
  }
  mean /= static_cast<double>(m);

  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < m; ++i) buf[i] = cell[i] - mean;
  fft(buf);

  // The band split tops out below Nyquist so something is always left over
  // to estimate the noise floor from. Bins between resp_max and motion_min
  // belong to neither side: breathing leakage parks there.
  const double noise_lo = std::min(p.motion_max_hz, 0.4 * fs);
  const double motion_lo = std::max(p.resp_max_hz, p.motion_min_hz);
  CellBands bands;
  for (std::size_t k = 1; k < nfft; ++k) {
    const double f = static_cast<double>(k) / nfft * fs;
    const double af = std::abs(f <= fs / 2.0 ? f : f - fs);
    const double e = std::norm(buf[k]);
    if (af <= p.resp_max_hz) {
      bands.resp += e;
      bands.n_resp++;
    } else if (af <= motion_lo) {
      // guard gap
    } else if (af <= noise_lo) {
      bands.motion += e;
      bands.n_motion++;
    } else {
      bands.noise += e;
      bands.n_noise++;
    }
  }
  bands.raw_power = raw_power;
  return bands;
}

// Total angular travel around the centroid, in turns per second. Steps that
// dip close to the centroid carry no reliable angle and are skipped. A spread
// negligible against the sample magnitude is rounding residue from the mean
// subtraction, not a trajectory, so it counts as no travel at all.
double winding_rate(const ComplexSeries& cell, double fs) {
  const std::size_t m = cell.size();
  ComplexSample mean{0.0, 0.0};
  double scale = 0.0;
  for (const auto& v : cell) {
    mean += v;
    scale = std::max(scale, std::abs(v));
  }
  mean /= static_cast<double>(m);

  double rms = 0.0;
  for (const auto& v : cell) rms += std::norm(v - mean);
  rms = std::sqrt(rms / static_cast<double>(m));
  if (rms <= 1e-9 * scale) return 0.0;

  int sg_window = static_cast<int>(std::min<std::size_t>(31, m));
  if (sg_window % 2 == 0) --sg_window;
  ComplexSeries path = sg_window >= 5 ? smooth(cell, sg_window, 3) : cell;

  double travel = 0.0;
  bool have_prev = false;
  double prev = 0.0;
  for (const auto& v : path) {
    const ComplexSample rel = v - mean;
    if (std::abs(rel) < 0.3 * rms) {
      have_prev = false;
      continue;
    }
    const double ang = std::arg(rel);
    if (have_prev) travel += std::abs(std::remainder(ang - prev, 2.0 * M_PI));
    prev = ang;
    have_prev = true;
  }
  return travel / (2.0 * M_PI) / (static_cast<double>(m) / fs);
}

}  // namespace

StationarityMask motion_gate(const CsiRatioSeries& ratio, double window_s,
                             const MotionGateParams& params) {
  if (!(window_s >= 1.0)) {
    throw std::invalid_argument("motion_gate: window must be >= 1 s");
  }
  if (!(ratio.fs_hz > 0.0) || ratio.samples.empty()) {
    throw std::invalid_argument("motion_gate: empty series");
  }

  const std::size_t m =
      static_cast<std::size_t>(std::llround(window_s * ratio.fs_hz));
  const std::size_t cells = (ratio.samples.size() + m - 1) / m;

  StationarityMask mask;
  mask.window_s = window_s;
  mask.stationary.assign(cells, 1);

  // First pass: per-cell band energies. The noise floor is shared across the
  // whole series as the median of the per-cell top-band density; a moving
  // cell spills chirp energy into its own top band, so its floor must come
  // from the quiet majority, not from itself.
  std::vector<CellBands> stats(cells);
  std::vector<std::uint8_t> full(cells, 0);
  std::vector<double> floors;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t lo = c * m;
    const std::size_t hi = std::min(lo + m, ratio.samples.size());
    if (hi - lo < 16) continue;
    full[c] = 1;
    const ComplexSeries cell(ratio.samples.begin() + lo,
                             ratio.samples.begin() + hi);
    stats[c] = cell_band_energy(cell, ratio.fs_hz, params);
    if (stats[c].n_noise) {
      floors.push_back(stats[c].noise / static_cast<double>(stats[c].n_noise));
    }
  }
  double floor_psd = 0.0;
  if (!floors.empty()) {
    std::nth_element(floors.begin(), floors.begin() + floors.size() / 2,
                     floors.end());
    floor_psd = floors[floors.size() / 2];
  }

  for (std::size_t c = 0; c < cells; ++c) {
    if (!full[c]) {
      // A trailing sliver inherits its neighbor's label.
      mask.stationary[c] = c > 0 ? mask.stationary[c - 1] : 1;
      continue;
    }
    const CellBands& bands = stats[c];
    const double excess_motion =
        bands.motion - floor_psd * static_cast<double>(bands.n_motion);
    const double excess_resp = std::max(
        0.0, bands.resp - floor_psd * static_cast<double>(bands.n_resp));

    // The additive guard is relative to the raw cell power: subtracting the
    // mean from a constant cell leaves a uniform rounding residue whose
    // zero-padded spectrum looks like low-frequency energy, and with an
    // all-zero floor that residue would otherwise count as significant.
    const bool significant =
        excess_motion >
        params.significance * floor_psd * static_cast<double>(bands.n_motion) +
            1e-12 * bands.raw_power;
    const bool dominant =
        excess_motion > params.threshold * (excess_motion + excess_resp);
    const std::size_t lo = c * m;
    const std::size_t hi = std::min(lo + m, ratio.samples.size());
    const ComplexSeries cell(ratio.samples.begin() + lo,
                             ratio.samples.begin() + hi);
    const bool spinning =
        winding_rate(cell, ratio.fs_hz) > params.winding_bound;

    if ((significant && dominant) || spinning) mask.stationary[c] = 0;
  }
  return mask;
}

namespace {

ExtractionResult run_selection(const CsiRatioSeries& window,
                               const EstimatorConfig& cfg) {
  ExtractParams params;
  params.theta_step_rad = cfg.theta_step_rad;
  params.band = cfg.band;
  params.fft_size = cfg.fft_size;
  switch (cfg.selection) {
    case Selection::kVariance:
      return select_by_variance(window, params);
    case Selection::kFixedAngle: {
      ExtractionResult r;
      r.subcarrier = window.subcarrier;
      r.scoring = ScoreKind::kBandPeakRatio;
      r.best.theta_rad = cfg.fixed_theta_rad;
      r.best.series = project(window.samples, cfg.fixed_theta_rad);
      r.best.bnr = bnr(r.best.series, window.fs_hz, params.band, params.fft_size);
      return r;
    }
    case Selection::kBandPeakRatio:
    default:
      return extract_pattern(window, params);
  }
}

}  // namespace

std::vector<RateEstimate> estimate_rate(const CsiStream& stream,
                                        const EstimatorConfig& cfg) {
  validate_stream(stream);
  if (!(cfg.window_s > 0.0) || !(cfg.hop_s > 0.0)) {
    throw std::invalid_argument("estimate_rate: window and hop must be positive");
  }
  if (cfg.numerator_antenna == cfg.denominator_antenna) {
    throw std::invalid_argument("estimate_rate: antenna pair must differ");
  }

  const double fs = stream.fs_hz;
  const std::size_t total = stream.frames.size();
  const std::size_t wlen = static_cast<std::size_t>(std::llround(cfg.window_s * fs));
  const std::size_t hop = static_cast<std::size_t>(std::llround(cfg.hop_s * fs));
  if (wlen < 2 || hop < 1) {
    throw std::invalid_argument("estimate_rate: window or hop too small for fs");
  }
  std::vector<RateEstimate> out;
  if (total < wlen) return out;

  const int K = stream.subcarriers;
  std::vector<CsiRatioSeries> ratios(K);
  std::vector<ComplexSeries> smoothed(K);
  std::vector<std::size_t> votes;  // per mask cell: subcarriers calling it moving
  std::size_t cells = 0;

  for (int k = 1; k <= K; ++k) {
    ratios[k - 1] = ratio_for_subcarrier(stream, k, cfg.numerator_antenna,
                                         cfg.denominator_antenna, cfg.ratio_floor);
    const StationarityMask mask =
        motion_gate(ratios[k - 1], cfg.motion_window_s, cfg.motion);
    if (k == 1) {
      cells = mask.stationary.size();
      votes.assign(cells, 0);
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (!mask.stationary[c]) votes[c]++;
    }
    if (static_cast<int>(ratios[k - 1].samples.size()) >= cfg.sg_window) {
      smoothed[k - 1] = smooth(ratios[k - 1].samples, cfg.sg_window, cfg.sg_order);
    } else {
      smoothed[k - 1] = ratios[k - 1].samples;
    }
  }

  // Majority vote across subcarriers; motion moves every subcarrier at once.
  std::vector<std::uint8_t> moving(cells, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    moving[c] = votes[c] * 2 >= static_cast<std::size_t>(K) ? 1 : 0;
  }

  const std::size_t cell_len =
      static_cast<std::size_t>(std::llround(cfg.motion_window_s * fs));
  const std::size_t min_lag = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(60.0 * fs / cfg.band.max_bpm)));
  const std::size_t max_lag =
      static_cast<std::size_t>(std::llround(60.0 * fs / cfg.band.min_bpm));

  for (std::size_t start = 0; start + wlen <= total; start += hop) {
    RateEstimate est;
    est.window_start_s = static_cast<double>(start) / fs;
    est.window_end_s = static_cast<double>(start + wlen) / fs;

    bool stationary = true;
    for (std::size_t c = start / cell_len; c * cell_len < start + wlen && c < cells;
         ++c) {
      if (moving[c]) stationary = false;
    }
    est.stationary = stationary;
    if (!stationary) {
      est.status = RateEstimate::Status::kNonStationary;
      out.push_back(std::move(est));
      continue;
    }

    std::vector<SubcarrierPattern> patterns;
    for (int k = 1; k <= K; ++k) {
      CsiRatioSeries window;
      window.subcarrier = k;
      window.fs_hz = fs;
      window.samples.assign(smoothed[k - 1].begin() + start,
                            smoothed[k - 1].begin() + start + wlen);
      try {
        ExtractionResult sel = run_selection(window, cfg);
        SubcarrierPattern p;
        p.subcarrier = k;
        p.bnr = sel.best.bnr;
        p.autocorr = autocorrelation(sel.best.series);
        est.per_subcarrier_bnr.emplace_back(k, p.bnr);
        patterns.push_back(std::move(p));
      } catch (const ZeroEnergy&) {
      } catch (const ZeroVariance&) {
      }
    }

    try {
      if (patterns.empty()) throw ZeroEnergy("no usable subcarrier");
      FusedAutocorr fused = combine_subcarriers(patterns, cfg.gate);
      est.subcarriers = fused.selected;
      std::size_t lag =
          first_peak_lag(fused.fused, min_lag, max_lag, cfg.peak_prominence);
      // A projection axis perpendicular to the motion sees the locus angle
      // swept symmetrically and oscillates at twice the body rate, which puts
      // a half-period peak ahead of the true one. Whenever the pattern
      // repeats more strongly at double the lag, that is the period.
      const std::vector<double>& v = fused.fused.values;
      std::size_t best_double = 0;
      for (std::size_t k = 2 * lag - 2; k <= 2 * lag + 2 && k <= max_lag; ++k) {
        if (k + 1 >= v.size() || k <= lag) continue;
        const bool local_max = v[k - 1] < v[k] && v[k] >= v[k + 1];
        if (local_max && v[k] > v[lag] &&
            (best_double == 0 || v[k] > v[best_double])) {
          best_double = k;
        }
      }
      if (best_double) lag = best_double;
      est.first_peak_lag = lag;
      est.rate_bpm = 60.0 * fs / static_cast<double>(lag);
      est.out_of_band =
          est.rate_bpm < cfg.band.min_bpm || est.rate_bpm > cfg.band.max_bpm;
      est.status = RateEstimate::Status::kOk;
    } catch (const NoPeak&) {
      est.status = RateEstimate::Status::kNoPeak;
    } catch (const ZeroEnergy&) {
      est.status = RateEstimate::Status::kNoPeak;
    }
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace csibreath
