#include "csibreath/extract.hpp"

#include <algorithm>
#include <stdexcept>

#include "csibreath/errors.hpp"
#include "csibreath/fft.hpp"

namespace csibreath {

namespace {

// Projection matrix P = V (V'V)^-1 V' for a least-squares polynomial fit
// over window offsets -half..half. Row r evaluates the fitted polynomial at
// offset r - half, so the middle row is the usual convolution kernel and
// the outer rows provide the boundary extrapolation.
std::vector<std::vector<double>> sg_projection(int window, int order) {
  const int half = window / 2;
  const int terms = order + 1;

  std::vector<std::vector<double>> v(window, std::vector<double>(terms));
  for (int i = 0; i < window; ++i) {
    double p = 1.0;
    for (int j = 0; j < terms; ++j) {
      v[i][j] = p;
      p *= static_cast<double>(i - half);
    }
  }

  // g = V'V, inverted by Gauss-Jordan with partial pivoting.
  std::vector<std::vector<double>> g(terms, std::vector<double>(2 * terms, 0.0));
  for (int p = 0; p < terms; ++p) {
    for (int q = 0; q < terms; ++q) {
      double s = 0.0;
      for (int i = 0; i < window; ++i) s += v[i][p] * v[i][q];
      g[p][q] = s;
    }
    g[p][terms + p] = 1.0;
  }
  for (int col = 0; col < terms; ++col) {
    int pivot = col;
    for (int r = col + 1; r < terms; ++r) {
      if (std::abs(g[r][col]) > std::abs(g[pivot][col])) pivot = r;
    }
    std::swap(g[col], g[pivot]);
    if (g[col][col] == 0.0) {
      throw BadFilterParams("savitzky_golay: singular design matrix");
    }
    const double inv = 1.0 / g[col][col];
    for (int q = 0; q < 2 * terms; ++q) g[col][q] *= inv;
    for (int r = 0; r < terms; ++r) {
      if (r == col) continue;
      const double f = g[r][col];
      for (int q = 0; q < 2 * terms; ++q) g[r][q] -= f * g[col][q];
    }
  }

  std::vector<std::vector<double>> proj(window, std::vector<double>(window));
  for (int r = 0; r < window; ++r) {
    for (int j = 0; j < window; ++j) {
      double s = 0.0;
      for (int p = 0; p < terms; ++p) {
        for (int q = 0; q < terms; ++q) {
          s += v[r][p] * g[p][terms + q] * v[j][q];
        }
      }
      proj[r][j] = s;
    }
  }
  return proj;
}

struct BandBins {
  std::size_t kmin = 0, kmax = 0;
};

BandBins band_bins(double fs_hz, const Band& band, std::size_t fft_size) {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("bnr: fs must be positive");
  if (!(band.min_bpm > 0.0) || !(band.max_bpm > band.min_bpm) ||
      !(band.max_bpm < fs_hz * 30.0)) {
    throw std::invalid_argument("bnr: band must satisfy 0 < min < max < fs*30 bpm");
  }
  const double df = fs_hz / static_cast<double>(fft_size);
  BandBins bins;
  bins.kmin = static_cast<std::size_t>(
      std::max(1.0, std::ceil(band.min_bpm / 60.0 / df - 1e-9)));
  bins.kmax = static_cast<std::size_t>(std::floor(band.max_bpm / 60.0 / df + 1e-9));
  bins.kmax = std::min(bins.kmax, fft_size / 2);
  if (bins.kmin > bins.kmax) {
    throw std::invalid_argument("bnr: band narrower than one frequency bin");
  }
  return bins;
}

bool is_constant(const std::vector<double>& x) {
  for (const auto& v : x) {
    if (v != x.front()) return false;
  }
  return true;
}

bool is_constant(const ComplexSeries& x) {
  for (const auto& v : x) {
    if (v != x.front()) return false;
  }
  return true;
}

std::size_t candidate_count(double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("theta_step must be positive");
  }
  const double span = 2.0 * M_PI;
  if (step >= span) return 1;
  return static_cast<std::size_t>(std::floor(span / step - 1e-12)) + 1;
}

void check_window(const CsiRatioSeries& ratio, const ExtractParams& params) {
  if (ratio.samples.empty()) {
    throw std::invalid_argument("extract: empty series");
  }
  if (!(ratio.fs_hz > 0.0)) {
    throw std::invalid_argument("extract: fs must be positive");
  }
  const double need = 2.0 * 60.0 / params.band.min_bpm * ratio.fs_hz;
  if (static_cast<double>(ratio.samples.size()) < need - 1e-6) {
    throw std::invalid_argument(
        "extract: window shorter than two respiration periods at the band minimum");
  }
  if (params.fft_size < ratio.samples.size()) {
    throw std::invalid_argument("extract: fft_size smaller than the window");
  }
}

}  // namespace

std::vector<double> savitzky_golay(const std::vector<double>& series,
                                   int window, int order) {
  if (window < 1 || window % 2 == 0) {
    throw BadFilterParams("savitzky_golay: window must be odd and positive");
  }
  if (order < 0 || order >= window) {
    throw BadFilterParams("savitzky_golay: order must satisfy 0 <= order < window");
  }
  if (series.size() < static_cast<std::size_t>(window)) {
    throw BadFilterParams("savitzky_golay: series shorter than the window");
  }

  const auto proj = sg_projection(window, order);
  const int half = window / 2;
  const std::size_t n = series.size();
  std::vector<double> out(n);

  auto apply = [&](const std::vector<double>& row, std::size_t base) {
    double s = 0.0;
    for (int j = 0; j < window; ++j) s += row[j] * series[base + j];
    return s;
  };

  for (int i = 0; i < half; ++i) out[i] = apply(proj[i], 0);
  for (std::size_t i = half; i + half < n; ++i) {
    out[i] = apply(proj[half], i - half);
  }
  for (int i = 0; i < half; ++i) {
    out[n - 1 - i] = apply(proj[window - 1 - i], n - window);
  }
  return out;
}

ComplexSeries smooth(const ComplexSeries& series, int window, int order) {
  std::vector<double> re(series.size()), im(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    re[i] = series[i].real();
    im[i] = series[i].imag();
  }
  re = savitzky_golay(re, window, order);
  im = savitzky_golay(im, window, order);
  ComplexSeries out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = {re[i], im[i]};
  return out;
}

std::vector<double> project(const ComplexSeries& series, double theta_rad) {
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = series[i].real() * c + series[i].imag() * s;
  }
  return out;
}

double bnr(const std::vector<double>& series, double fs_hz, const Band& band,
           std::size_t fft_size) {
  if (series.size() < 2) throw std::invalid_argument("bnr: series too short");
  if (!is_power_of_two(fft_size) || fft_size < series.size()) {
    throw std::invalid_argument("bnr: fft_size must be a power of two >= series length");
  }
  const BandBins bins = band_bins(fs_hz, band, fft_size);
  if (is_constant(series)) throw ZeroEnergy("bnr: constant series");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  std::vector<double> centered(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) centered[i] = series[i] - mean;

  const auto spectrum = fft_real_padded(centered, fft_size);
  double total = 0.0;
  double best = 0.0;
  for (std::size_t k = 1; k <= fft_size / 2; ++k) {
    const double e = std::norm(spectrum[k]);
    total += e;
    if (k >= bins.kmin && k <= bins.kmax) best = std::max(best, e);
  }
  if (total < 1e-30) throw ZeroEnergy("bnr: total energy below 1e-30");
  return std::min(best / total, 1.0);
}

ExtractionResult extract_pattern(const CsiRatioSeries& ratio,
                                 const ExtractParams& params) {
  check_window(ratio, params);
  const BandBins bins = band_bins(ratio.fs_hz, params.band, params.fft_size);
  if (is_constant(ratio.samples)) {
    throw ZeroEnergy("extract_pattern: constant series, every candidate fails");
  }

  const std::size_t n = ratio.samples.size();
  const std::size_t nfft = params.fft_size;

  // One complex FFT carries both axis spectra: pack the mean-removed real
  // part as re and imaginary part as im, then split by Hermitian symmetry.
  double mi = 0.0, mq = 0.0;
  for (const auto& v : ratio.samples) {
    mi += v.real();
    mq += v.imag();
  }
  mi /= static_cast<double>(n);
  mq /= static_cast<double>(n);

  std::vector<std::complex<double>> z(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = {ratio.samples[i].real() - mi, ratio.samples[i].imag() - mq};
  }
  fft(z);

  // Per-bin energy of the projection at angle t is
  //   |cos(t) XI[k] + sin(t) XQ[k]|^2
  //     = cos^2 aa + sin^2 bb + 2 sin cos cc,
  // so three real numbers per bin cover every candidate angle at once.
  const std::size_t half = nfft / 2;
  double sum_aa = 0.0, sum_bb = 0.0, sum_cc = 0.0;
  std::vector<double> aa(bins.kmax + 1, 0.0), bb(bins.kmax + 1, 0.0),
      cc(bins.kmax + 1, 0.0);
  for (std::size_t k = 1; k <= half; ++k) {
    const std::complex<double> zk = z[k];
    const std::complex<double> zc = std::conj(z[nfft - k]);
    const std::complex<double> xi = 0.5 * (zk + zc);
    const std::complex<double> xq = std::complex<double>(0.0, -0.5) * (zk - zc);
    const double a = std::norm(xi);
    const double b = std::norm(xq);
    const double c = xi.real() * xq.real() + xi.imag() * xq.imag();
    sum_aa += a;
    sum_bb += b;
    sum_cc += c;
    if (k >= bins.kmin && k <= bins.kmax) {
      aa[k] = a;
      bb[k] = b;
      cc[k] = c;
    }
  }

  ExtractionResult result;
  result.subcarrier = ratio.subcarrier;
  result.scoring = ScoreKind::kBandPeakRatio;

  const std::size_t count = candidate_count(params.theta_step_rad);
  result.scores.reserve(count);
  double best_score = -1.0;
  double best_theta = 0.0;
  bool any = false;

  for (std::size_t i = 0; i < count; ++i) {
    const double theta = static_cast<double>(i) * params.theta_step_rad;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    const double c2 = cs * cs, s2 = sn * sn, x2 = 2.0 * cs * sn;

    const double total = c2 * sum_aa + s2 * sum_bb + x2 * sum_cc;
    double score = 0.0;
    if (total >= 1e-30) {
      double peak = 0.0;
      for (std::size_t k = bins.kmin; k <= bins.kmax; ++k) {
        const double e = c2 * aa[k] + s2 * bb[k] + x2 * cc[k];
        if (e > peak) peak = e;
      }
      score = std::min(std::max(peak, 0.0) / total, 1.0);
      any = true;
      if (score > best_score) {  // ties keep the smaller angle
        best_score = score;
        best_theta = theta;
      }
    }
    result.scores.push_back({theta, score});
  }

  if (!any) {
    throw ZeroEnergy("extract_pattern: every candidate fails");
  }
  result.best.theta_rad = best_theta;
  result.best.series = project(ratio.samples, best_theta);
  result.best.bnr = best_score;
  return result;
}

ExtractionResult select_by_variance(const CsiRatioSeries& ratio,
                                    const ExtractParams& params) {
  check_window(ratio, params);

  const std::size_t n = ratio.samples.size();
  double mi = 0.0, mq = 0.0;
  for (const auto& v : ratio.samples) {
    mi += v.real();
    mq += v.imag();
  }
  mi /= static_cast<double>(n);
  mq /= static_cast<double>(n);

  double sii = 0.0, sqq = 0.0, siq = 0.0;
  for (const auto& v : ratio.samples) {
    const double a = v.real() - mi;
    const double b = v.imag() - mq;
    sii += a * a;
    sqq += b * b;
    siq += a * b;
  }

  ExtractionResult result;
  result.subcarrier = ratio.subcarrier;
  result.scoring = ScoreKind::kVariance;

  const std::size_t count = candidate_count(params.theta_step_rad);
  result.scores.reserve(count);

  const bool flat = is_constant(ratio.samples) || (sii + sqq) < 1e-30;
  double best_score = -1.0;
  double best_theta = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = static_cast<double>(i) * params.theta_step_rad;
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    const double var =
        flat ? 0.0
             : (cs * cs * sii + sn * sn * sqq + 2.0 * cs * sn * siq) /
                   static_cast<double>(n);
    result.scores.push_back({theta, var});
    if (!flat && var > best_score) {
      best_score = var;
      best_theta = theta;
    }
  }

  result.degenerate = flat;
  result.best.theta_rad = flat ? 0.0 : best_theta;
  result.best.series = project(ratio.samples, result.best.theta_rad);
  try {
    result.best.bnr =
        bnr(result.best.series, ratio.fs_hz, params.band, params.fft_size);
  } catch (const ZeroEnergy&) {
    result.best.bnr = 0.0;
  }
  return result;
}

}  // namespace csibreath
