#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "csibreath/csi.hpp"
#include "csibreath/errors.hpp"
#include "csibreath/mobius.hpp"
#include "csibreath/sim.hpp"
#include "doctest.h"

#include "approx.hpp"
#include "oracles.hpp"

using csibreath::BreathingModel;
using csibreath::ComplexSeries;
using csibreath::SceneSpec;
using csibreath::SimScene;

namespace {

// Long-double version of the mirror geometry, as an independent check.
long double path_ld(long double los, long double off) {
  const long double h = 0.5L * los;
  return 2.0L * std::sqrt(h * h + off * off);
}

std::vector<double> path_sweep(const SimScene& scene, double total_delta_m,
                               std::size_t steps) {
  std::vector<double> disp(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double delta =
        total_delta_m * static_cast<double>(i) / static_cast<double>(steps - 1);
    disp[i] = csibreath::displacement_for_path_change(scene, delta);
  }
  return disp;
}

ComplexSeries locus(const csibreath::CsiStream& s, int antenna, int k) {
  ComplexSeries out;
  out.reserve(s.frames.size());
  for (const auto& f : s.frames) out.push_back(f.at(antenna, k, s.subcarriers));
  return out;
}

}  // namespace

TEST_CASE("sinusoid breathing starts at zero and repeats every period") {
  BreathingModel m;
  m.rate_bpm = 20.0;  // 3 s period
  m.chest_amplitude_m = 0.008;
  CHECK(csibreath::breathing_displacement(m, 0.0) == 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.037 * i;
    const double a = csibreath::breathing_displacement(m, t);
    const double b = csibreath::breathing_displacement(m, t + 3.0);
    CHECK(a == near(b, 1e-12));
    CHECK(std::abs(a) <= m.chest_amplitude_m * (1.0 + 1e-12));
  }
  m.phase0_rad = M_PI / 2.0;
  CHECK(csibreath::breathing_displacement(m, 0.0) ==
        doctest::Approx(m.chest_amplitude_m).epsilon(1e-15));
}

TEST_CASE("asymmetric breathing peaks at the inhale fraction, C1 junction") {
  BreathingModel m;
  m.waveform = BreathingModel::Waveform::kAsymmetric;
  m.rate_bpm = 15.0;  // 4 s period
  m.chest_amplitude_m = 0.01;
  m.inhale_fraction = 0.4;
  const double period = 4.0;
  const double t_peak = m.inhale_fraction * period;  // 1.6 s

  CHECK(csibreath::breathing_displacement(m, 0.0) ==
        doctest::Approx(-m.chest_amplitude_m).epsilon(1e-15));

  double best_t = 0.0, best = -1.0;
  for (int i = 0; i < 4000; ++i) {
    const double t = period * i / 4000.0;
    const double v = csibreath::breathing_displacement(m, t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  CHECK(std::abs(best_t - t_peak) <= period / 1000.0);
  CHECK(best == doctest::Approx(m.chest_amplitude_m).epsilon(1e-5));

  // Zero slope on both sides of the inhale/exhale junction.
  const double h = 1e-5;
  const double slope = (csibreath::breathing_displacement(m, t_peak + h) -
                        csibreath::breathing_displacement(m, t_peak - h)) /
                       (2.0 * h);
  CHECK(std::abs(slope) < 1e-4);
  CHECK(std::abs(csibreath::breathing_displacement(m, t_peak - 1e-9) -
                 csibreath::breathing_displacement(m, t_peak + 1e-9)) < 1e-11);

  for (int i = 0; i <= 50; ++i) {
    const double t = 0.083 * i;
    CHECK(csibreath::breathing_displacement(m, t) ==
          near(csibreath::breathing_displacement(m, t + period), 1e-10));
  }
}

TEST_CASE("mirror geometry path lengths") {
  CHECK(csibreath::reflection_path_length(5.5, 0.0) == 5.5);
  CHECK_THROWS_AS(csibreath::reflection_path_length(-1.0, 2.0),
                  std::invalid_argument);

  // A 5.5 m link with the reflector pushed from 5.83 m to 5.99 m off the
  // midpoint stretches the round trip by almost exactly 0.29 m.
  const double d1 = csibreath::reflection_path_length(5.5, 5.83);
  const double d2 = csibreath::reflection_path_length(5.5, 5.99);
  const double ref =
      static_cast<double>(path_ld(5.5L, 5.99L) - path_ld(5.5L, 5.83L));
  CHECK(d2 - d1 == doctest::Approx(ref).epsilon(1e-12));
  CHECK(d2 - d1 == near(0.29, 5e-3));

  // A 4 m link, reflector 2.55 m out, pushed 3.6 cm: one wavelength at
  // 5.24 GHz within one percent.
  const double lambda = csibreath::kSpeedOfLight / 5.24e9;
  const double e1 = csibreath::reflection_path_length(4.0, 2.55);
  const double e2 = csibreath::reflection_path_length(4.0, 2.586);
  const double eref =
      static_cast<double>(path_ld(4.0L, 2.586L) - path_ld(4.0L, 2.55L));
  CHECK(e2 - e1 == doctest::Approx(eref).epsilon(1e-12));
  CHECK(e2 - e1 == doctest::Approx(lambda).epsilon(0.01));
}

TEST_CASE("scene paths match the mirror formula and wavelength the carrier") {
  SceneSpec spec;
  spec.target = {2.0, 2.55, 1.0};
  const SimScene scene = csibreath::build_scene(spec, 3);
  CHECK(scene.wavelength_m == csibreath::kSpeedOfLight / spec.carrier_hz);
  CHECK(csibreath::reflection_path(scene, 1, 0.0) ==
        doctest::Approx(csibreath::reflection_path_length(4.0, 2.55))
            .epsilon(1e-12));
  CHECK(csibreath::reflection_path(scene, 1, 0.036) ==
        doctest::Approx(csibreath::reflection_path_length(4.0, 2.586))
            .epsilon(1e-12));
  CHECK_THROWS_AS(csibreath::reflection_path(scene, 3, 0.0),
                  std::invalid_argument);
}

TEST_CASE("displacement_for_path_change inverts the path function") {
  const SimScene scene = csibreath::build_scene(SceneSpec{}, 4);
  const double base = csibreath::reflection_path(scene, 1, 0.0);
  for (double delta : {0.01, 0.29, scene.wavelength_m, -0.02}) {
    const double d = csibreath::displacement_for_path_change(scene, delta);
    CHECK(csibreath::reflection_path(scene, 1, d) - base ==
          near(delta, 1e-9));
  }
  CHECK(csibreath::displacement_for_path_change(scene, 0.0) == 0.0);
}

TEST_CASE("noise-free frames are exactly static plus rotating term") {
  SceneSpec spec;
  spec.subcarriers = 4;
  spec.dynamic_amp_range = {0.0, 0.0};  // no moving reflection at all
  const SimScene scene = csibreath::build_scene(spec, 9);
  const auto stream = csibreath::synthesize_with_displacement(
      scene, std::vector<double>(50, 0.0), 9);
  REQUIRE(stream.frames.size() == 50);
  for (const auto& f : stream.frames) {
    for (int a = 1; a <= 2; ++a) {
      for (int k = 1; k <= 4; ++k) {
        CHECK(f.at(a, k, 4) == scene.h_static[a - 1][k - 1]);
      }
    }
  }
  CHECK(stream.frames[7].timestamp_s == 7.0 / spec.fs_hz);
}

TEST_CASE("a one-wavelength path sweep traces a clockwise circle") {
  SceneSpec spec;
  spec.subcarriers = 6;
  const SimScene scene = csibreath::build_scene(spec, 11);
  const auto disp = path_sweep(scene, scene.wavelength_m, 201);
  const auto stream = csibreath::synthesize_with_displacement(scene, disp, 11);

  for (int a = 1; a <= 2; ++a) {
    for (int k : {1, 3, 6}) {
      const auto pts = locus(stream, a, k);
      const auto c = csibreath::fit_circle(pts);
      CHECK(c.rms_residual <= 1e-9 * c.radius);
      CHECK(std::abs(c.center - scene.h_static[a - 1][k - 1]) <=
            1e-6 * c.radius);
      CHECK(c.radius ==
            doctest::Approx(scene.dyn_amp[a - 1][k - 1]).epsilon(1e-6));
      CHECK(csibreath::rotation_orientation(pts) ==
            csibreath::Orientation::kClockwise);
      CHECK(csibreath::arc_radian(pts, c) ==
            doctest::Approx(-2.0 * M_PI).epsilon(1e-9));

      // First half of the sweep: half a turn, same circle.
      const ComplexSeries half(pts.begin(), pts.begin() + 101);
      const auto ch = csibreath::fit_circle(half);
      CHECK(ch.rms_residual <= 1e-9 * ch.radius);
      CHECK(csibreath::arc_radian(half, c) ==
            doctest::Approx(-M_PI).epsilon(1e-9));
    }
  }
}

TEST_CASE("ratio amplitude over a 0.29 m path sweep shows about five cycles") {
  SceneSpec spec;
  spec.subcarriers = 2;
  const SimScene scene = csibreath::build_scene(spec, 13);
  const auto disp = path_sweep(scene, 0.29, 400);
  const auto stream = csibreath::synthesize_with_displacement(scene, disp, 13);

  const auto ratio = csibreath::ratio_for_subcarrier(stream, 1, 1, 2);
  const auto amp = csibreath::amplitude(ratio.samples);
  const auto [mn, mx] = std::minmax_element(amp.begin(), amp.end());
  const int peaks = oracle::count_peaks(amp, 0.25 * (*mx - *mn));
  CHECK(peaks >= 4);
  CHECK(peaks <= 6);

  // Single-antenna amplitude cycles the same number of times.
  const auto one = csibreath::amplitude(locus(stream, 1, 1));
  const auto [mn1, mx1] = std::minmax_element(one.begin(), one.end());
  const int peaks1 = oracle::count_peaks(one, 0.25 * (*mx1 - *mn1));
  CHECK(peaks1 >= 4);
  CHECK(peaks1 <= 6);
}

TEST_CASE("synthesize is deterministic in the seed") {
  SceneSpec spec;
  spec.subcarriers = 3;
  spec.noise.complex_sigma = 0.08;
  spec.noise.impulse_rate = 0.1;
  spec.noise.phase_offset = csibreath::PhaseOffsetMode::kUniformPerPacket;
  const auto r1 = csibreath::synthesize(spec, 5.0, 77);
  const auto r2 = csibreath::synthesize(spec, 5.0, 77);
  REQUIRE(r1.stream.frames.size() == r2.stream.frames.size());
  for (std::size_t i = 0; i < r1.stream.frames.size(); ++i) {
    CHECK(r1.stream.frames[i].values == r2.stream.frames[i].values);
  }
  CHECK(r1.truth.displacement_m == r2.truth.displacement_m);
  CHECK(r1.truth.stationary == r2.truth.stationary);

  const auto r3 = csibreath::synthesize(spec, 5.0, 78);
  CHECK(r1.stream.frames[0].values != r3.stream.frames[0].values);
}

TEST_CASE("per-packet phase offsets leave the antenna ratio untouched") {
  SceneSpec spec;
  spec.subcarriers = 3;
  spec.noise.complex_sigma = 0.05;
  spec.noise.impulse_rate = 0.2;
  spec.noise.impulse_scale = 8.0;

  SceneSpec with = spec;
  with.noise.phase_offset = csibreath::PhaseOffsetMode::kUniformPerPacket;

  const auto a = csibreath::synthesize(spec, 6.0, 99);
  const auto b = csibreath::synthesize(with, 6.0, 99);
  for (int k = 1; k <= 3; ++k) {
    const auto ra = csibreath::ratio_for_subcarrier(a.stream, k, 1, 2);
    const auto rb = csibreath::ratio_for_subcarrier(b.stream, k, 1, 2);
    for (std::size_t i = 0; i < ra.samples.size(); ++i) {
      CHECK(std::abs(ra.samples[i] - rb.samples[i]) <=
            1e-10 * std::abs(ra.samples[i]));
    }
  }
}

TEST_CASE("stream shape, truth labels and peak count for a breathing run") {
  SceneSpec spec;
  const auto res = csibreath::synthesize(spec, 60.0, 5);
  CHECK(res.stream.frames.size() == 6000);
  CHECK(res.stream.subcarriers == 30);
  CHECK(res.stream.antennas == 2);
  CHECK(res.stream.frames[123].values.size() == 60);
  CHECK(res.truth.rate_bpm == spec.breathing.rate_bpm);
  CHECK(res.truth.has_target);
  CHECK(res.truth.stationary.size() == 6000);
  for (auto s : res.truth.stationary) CHECK(s == 1);

  // 18.2 bpm over 12 s is 3.64 cycles: expect 3 or 4 confirmed maxima.
  const auto short_run = csibreath::synthesize(spec, 12.0, 5);
  const int peaks = oracle::count_peaks(short_run.truth.displacement_m,
                                        0.5 * spec.breathing.chest_amplitude_m);
  CHECK(peaks >= 3);
  CHECK(peaks <= 4);
}

TEST_CASE("motion events mark frames non-stationary around the pulse peak") {
  SceneSpec spec;
  spec.motion_events.push_back({4.0, 5.0, 0.5});
  const auto res = csibreath::synthesize(spec, 10.0, 21);
  const auto& st = res.truth.stationary;
  REQUIRE(st.size() == 1000);
  REQUIRE(res.truth.events.size() == 1);
  CHECK(res.truth.events[0].amplitude_m == 0.5);

  for (std::size_t i = 430; i <= 470; ++i) CHECK(st[i] == 0);
  for (std::size_t i = 0; i < 400; ++i) CHECK(st[i] == 1);
  for (std::size_t i = 501; i < 1000; ++i) CHECK(st[i] == 1);

  // The displacement trace actually contains the pulse.
  CHECK(res.truth.displacement_m[450] > 0.4);
}

TEST_CASE("empty dynamic range reports no target") {
  SceneSpec spec;
  spec.dynamic_amp_range = {0.0, 0.0};
  const auto res = csibreath::synthesize(spec, 2.0, 1);
  CHECK_FALSE(res.truth.has_target);
}

TEST_CASE("scene validation rejects model violations") {
  SceneSpec spec;

  SUBCASE("antenna spacing too wide for a stable path difference") {
    spec.rx[1] = {6.0, 0.0, 1.0};
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("breathing rate out of range") {
    spec.breathing.rate_bpm = 9.0;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
    spec.breathing.rate_bpm = 38.0;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("chest amplitude out of range") {
    spec.breathing.chest_amplitude_m = 0.004;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
    spec.breathing.chest_amplitude_m = 0.013;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("inhale fraction must be interior") {
    spec.breathing.waveform = BreathingModel::Waveform::kAsymmetric;
    spec.breathing.inhale_fraction = 0.0;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("overlapping motion events") {
    spec.motion_events.push_back({1.0, 3.0, 0.5});
    spec.motion_events.push_back({2.0, 4.0, 0.5});
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("event past the end of the stream") {
    spec.motion_events.push_back({8.0, 11.0, 0.5});
    CHECK_NOTHROW(csibreath::build_scene(spec, 1));
    CHECK_THROWS_AS(csibreath::synthesize(spec, 10.0, 1),
                    csibreath::InvalidScene);
  }
  SUBCASE("negative noise sigma") {
    spec.noise.complex_sigma = -0.1;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("zero displacement axis") {
    spec.displacement_axis = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("no subcarriers") {
    spec.subcarriers = 0;
    CHECK_THROWS_AS(csibreath::build_scene(spec, 1), csibreath::InvalidScene);
  }
  SUBCASE("zero duration") {
    CHECK_THROWS_AS(csibreath::synthesize(spec, 0.0, 1),
                    std::invalid_argument);
  }
}
