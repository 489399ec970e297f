#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "csibreath/csi.hpp"
#include "csibreath/errors.hpp"
#include "doctest.h"

using csibreath::ComplexSample;
using csibreath::ComplexSeries;
using csibreath::csi_ratio;

namespace {

ComplexSeries random_series(std::size_t n, std::uint64_t seed,
                            double min_mag = 0.5) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> mag(min_mag, 2.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  ComplexSeries out(n);
  for (auto& v : out) v = std::polar(mag(gen), ang(gen));
  return out;
}

}  // namespace

TEST_CASE("ratio of a series with itself is one") {
  const auto h = random_series(64, 1);
  const auto r = csi_ratio(h, h);
  for (const auto& v : r) {
    CHECK(std::abs(v - ComplexSample{1.0, 0.0}) < 1e-15);
  }
}

TEST_CASE("ratio of a scaled series is the scale") {
  const auto h = random_series(64, 2);
  ComplexSeries doubled(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) doubled[i] = 2.0 * h[i];
  const auto r = csi_ratio(doubled, h);
  for (const auto& v : r) {
    CHECK(std::abs(v - ComplexSample{2.0, 0.0}) < 1e-14);
  }
}

TEST_CASE("per-sample common phase cancels in the ratio") {
  const auto h1 = random_series(128, 3);
  const auto h2 = random_series(128, 4);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);

  ComplexSeries g1(h1.size()), g2(h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) {
    const ComplexSample f = std::polar(1.0, -ang(gen));
    g1[i] = f * h1[i];
    g2[i] = f * h2[i];
  }
  const auto plain = csi_ratio(h1, h2);
  const auto rotated = csi_ratio(g1, g2);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(std::abs(rotated[i] - plain[i]) <= 1e-12 * std::abs(plain[i]));
  }
}

TEST_CASE("any common finite factor cancels within 1e-12 relative") {
  const auto h1 = random_series(128, 6);
  const auto h2 = random_series(128, 7);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> mag(0.1, 10.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);

  ComplexSeries g1(h1.size()), g2(h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) {
    const ComplexSample f = std::polar(mag(gen), ang(gen));
    g1[i] = f * h1[i];
    g2[i] = f * h2[i];
  }
  const auto plain = csi_ratio(h1, h2);
  const auto scaled = csi_ratio(g1, g2);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(std::abs(scaled[i] - plain[i]) <= 1e-12 * std::abs(plain[i]));
  }
}

TEST_CASE("forward and reverse ratios multiply to one") {
  const auto h1 = random_series(128, 9);
  const auto h2 = random_series(128, 10);
  const auto fwd = csi_ratio(h1, h2);
  const auto rev = csi_ratio(h2, h1);
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    CHECK(std::abs(fwd[i] * rev[i] - ComplexSample{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("denominator underflow reports the offending index") {
  auto h1 = random_series(16, 11);
  auto h2 = random_series(16, 12);
  h2[9] = {1e-12, 0.0};
  try {
    csi_ratio(h1, h2);
    FAIL("expected DenominatorUnderflow");
  } catch (const csibreath::DenominatorUnderflow& e) {
    CHECK(e.index == 9);
    CHECK(e.magnitude == doctest::Approx(1e-12));
  }
  CHECK_THROWS_AS(csi_ratio(h1, random_series(8, 13)), std::invalid_argument);
  CHECK_THROWS_AS(csi_ratio(h1, h2, 0.0), std::invalid_argument);
}

TEST_CASE("amplitude and phase of a constant 3+4i") {
  ComplexSeries h(5, {3.0, 4.0});
  const auto amp = csibreath::amplitude(h);
  const auto ph = csibreath::phase(h);
  for (double a : amp) CHECK(a == doctest::Approx(5.0).epsilon(1e-15));
  for (double p : ph.radians) {
    CHECK(p == doctest::Approx(std::atan2(4.0, 3.0)).epsilon(1e-15));
  }
  CHECK_FALSE(ph.degenerate);
}

TEST_CASE("unwrapped phase is monotone through the -pi boundary") {
  // Clockwise rotation: raw arg wraps from -pi to +pi repeatedly; the
  // unwrapped series must decrease smoothly instead.
  ComplexSeries h;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    h.push_back(std::polar(1.0, -0.07 * i));  // several full turns
  }
  const auto ph = csibreath::phase(h);
  for (int i = 1; i < n; ++i) {
    const double d = ph.radians[i] - ph.radians[i - 1];
    CHECK(d == doctest::Approx(-0.07).epsilon(1e-9));
  }
  CHECK(ph.radians.back() ==
        doctest::Approx(-0.07 * (n - 1)).epsilon(1e-12));
}

TEST_CASE("amplitude of a ratio is the ratio of amplitudes") {
  const auto h1 = random_series(64, 14);
  const auto h2 = random_series(64, 15);
  const auto r = csibreath::amplitude(csi_ratio(h1, h2));
  const auto a1 = csibreath::amplitude(h1);
  const auto a2 = csibreath::amplitude(h2);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r[i] == doctest::Approx(a1[i] / a2[i]).epsilon(1e-12));
  }
}

TEST_CASE("amplitude and phase reconstruct the sample") {
  const auto h = random_series(64, 16);
  const auto amp = csibreath::amplitude(h);
  const auto ph = csibreath::phase(h);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const ComplexSample back = std::polar(amp[i], ph.radians[i]);
    CHECK(std::abs(back - h[i]) <= 1e-12 * amp[i]);
  }
}

TEST_CASE("phase of zero is zero with the degeneracy flag") {
  ComplexSeries h{{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}};
  const auto ph = csibreath::phase(h);
  CHECK(ph.degenerate);
  CHECK(ph.radians[1] == 0.0);
  CHECK(csibreath::amplitude(h)[1] == 0.0);
}

TEST_CASE("stream validation rejects structural problems") {
  csibreath::CsiStream s;
  s.fs_hz = 100.0;
  s.antennas = 2;
  s.subcarriers = 2;
  csibreath::CsiFrame f;
  f.timestamp_s = 0.0;
  f.values.assign(4, {1.0, 0.0});
  s.frames.push_back(f);
  f.timestamp_s = 0.01;
  s.frames.push_back(f);
  CHECK_NOTHROW(csibreath::validate_stream(s));

  SUBCASE("non-increasing timestamps") {
    s.frames[1].timestamp_s = 0.0;
    CHECK_THROWS_AS(csibreath::validate_stream(s), std::invalid_argument);
  }
  SUBCASE("single antenna") {
    s.antennas = 1;
    CHECK_THROWS_AS(csibreath::validate_stream(s), std::invalid_argument);
  }
  SUBCASE("value count mismatch") {
    s.frames[1].values.pop_back();
    CHECK_THROWS_AS(csibreath::validate_stream(s), std::invalid_argument);
  }
  SUBCASE("non-finite value") {
    s.frames[1].values[2] = {std::nan(""), 0.0};
    CHECK_THROWS_AS(csibreath::validate_stream(s), std::invalid_argument);
  }
}

TEST_CASE("ratio_for_subcarrier validates its arguments") {
  csibreath::CsiStream s;
  s.fs_hz = 100.0;
  s.antennas = 2;
  s.subcarriers = 3;
  for (int i = 0; i < 4; ++i) {
    csibreath::CsiFrame f;
    f.timestamp_s = 0.01 * i;
    f.values.assign(6, {1.0, 1.0});
    f.at(2, 1, 3) = {2.0, 0.0};
    s.frames.push_back(f);
  }
  const auto r = csibreath::ratio_for_subcarrier(s, 1, 1, 2);
  CHECK(r.subcarrier == 1);
  CHECK(r.fs_hz == 100.0);
  REQUIRE(r.samples.size() == 4);
  CHECK(std::abs(r.samples[0] - ComplexSample{0.5, 0.5}) < 1e-15);

  CHECK_THROWS_AS(csibreath::ratio_for_subcarrier(s, 0, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(csibreath::ratio_for_subcarrier(s, 4, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(csibreath::ratio_for_subcarrier(s, 1, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(csibreath::ratio_for_subcarrier(s, 1, 1, 3),
                  std::invalid_argument);
}
