#include "csibreath/csi.hpp"

#include <cmath>
#include <stdexcept>

#include "csibreath/errors.hpp"

namespace csibreath {

ComplexSeries csi_ratio(const ComplexSeries& numerator,
                        const ComplexSeries& denominator, double floor) {
  if (numerator.size() != denominator.size()) {
    throw std::invalid_argument("csi_ratio: series lengths differ");
  }
  if (!(floor > 0.0)) {
    throw std::invalid_argument("csi_ratio: floor must be positive");
  }
  ComplexSeries out(numerator.size());
  for (std::size_t i = 0; i < numerator.size(); ++i) {
    const double mag = std::abs(denominator[i]);
    if (mag < floor) throw DenominatorUnderflow(i, mag);
    out[i] = numerator[i] / denominator[i];
  }
  return out;
}

std::vector<double> amplitude(const ComplexSeries& series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = std::abs(series[i]);
  return out;
}

PhaseSeries phase(const ComplexSeries& series) {
  PhaseSeries out;
  out.radians.resize(series.size());
  double prev_raw = 0.0;
  double offset = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    double raw = 0.0;
    if (series[i] == ComplexSample{0.0, 0.0}) {
      out.degenerate = true;  // arg(0) reported as 0
    } else {
      raw = std::arg(series[i]);
    }
    if (i == 0) {
      out.radians[0] = raw;
    } else {
      double d = std::remainder(raw - prev_raw, 2.0 * M_PI);
      if (d <= -M_PI) d = M_PI;  // keep diffs in (-pi, pi]
      offset += d - (raw - prev_raw);
      out.radians[i] = raw + offset;
    }
    prev_raw = raw;
  }
  return out;
}

void validate_stream(const CsiStream& stream) {
  if (stream.antennas < 2) {
    throw std::invalid_argument("stream: need at least 2 antennas");
  }
  if (stream.subcarriers < 1) {
    throw std::invalid_argument("stream: need at least 1 subcarrier");
  }
  if (!(stream.fs_hz > 0.0)) {
    throw std::invalid_argument("stream: sounding rate must be positive");
  }
  const std::size_t expect =
      static_cast<std::size_t>(stream.antennas) * stream.subcarriers;
  double prev = -1.0;
  bool first = true;
  for (const auto& f : stream.frames) {
    if (f.values.size() != expect) {
      throw std::invalid_argument("stream: frame value count mismatch");
    }
    if (!first && !(f.timestamp_s > prev)) {
      throw std::invalid_argument("stream: timestamps must strictly increase");
    }
    for (const auto& v : f.values) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::invalid_argument("stream: non-finite CSI value");
      }
    }
    prev = f.timestamp_s;
    first = false;
  }
}

CsiRatioSeries ratio_for_subcarrier(const CsiStream& stream, int subcarrier,
                                    int numerator_antenna,
                                    int denominator_antenna, double floor) {
  if (subcarrier < 1 || subcarrier > stream.subcarriers) {
    throw std::invalid_argument("ratio_for_subcarrier: subcarrier out of range");
  }
  auto check_antenna = [&](int a) {
    if (a < 1 || a > stream.antennas) {
      throw std::invalid_argument("ratio_for_subcarrier: antenna out of range");
    }
  };
  check_antenna(numerator_antenna);
  check_antenna(denominator_antenna);
  if (numerator_antenna == denominator_antenna) {
    throw std::invalid_argument("ratio_for_subcarrier: antennas must differ");
  }

  ComplexSeries num, den;
  num.reserve(stream.frames.size());
  den.reserve(stream.frames.size());
  for (const auto& f : stream.frames) {
    num.push_back(f.at(numerator_antenna, subcarrier, stream.subcarriers));
    den.push_back(f.at(denominator_antenna, subcarrier, stream.subcarriers));
  }

  CsiRatioSeries out;
  out.subcarrier = subcarrier;
  out.fs_hz = stream.fs_hz;
  out.samples = csi_ratio(num, den, floor);
  return out;
}

}  // namespace csibreath
