#include "csibreath/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csibreath/errors.hpp"
#include "csibreath/rng.hpp"

namespace csibreath {

namespace {

double norm3(const Vec3& v) {
  return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
}

Vec3 sub(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

Vec3 axpy(const Vec3& p, const Vec3& dir, double s) {
  return {p.x + dir.x * s, p.y + dir.y * s, p.z + dir.z * s};
}

void validate_spec(const SceneSpec& spec) {
  if (spec.subcarriers < 1) throw InvalidScene("subcarrier count must be >= 1");
  if (!(spec.fs_hz > 0.0)) throw InvalidScene("sounding rate must be positive");
  if (!(spec.carrier_hz > 0.0)) throw InvalidScene("carrier must be positive");
  if (norm3(spec.displacement_axis) == 0.0) {
    throw InvalidScene("displacement axis must be nonzero");
  }
  const auto& b = spec.breathing;
  if (!(b.rate_bpm >= 10.0 && b.rate_bpm <= 37.0)) {
    throw InvalidScene("breathing rate outside [10, 37] bpm");
  }
  if (!(b.chest_amplitude_m >= 0.005 && b.chest_amplitude_m <= 0.012)) {
    throw InvalidScene("chest amplitude outside [0.005, 0.012] m");
  }
  if (b.waveform == BreathingModel::Waveform::kAsymmetric &&
      !(b.inhale_fraction > 0.0 && b.inhale_fraction < 1.0)) {
    throw InvalidScene("inhale fraction must lie in (0, 1)");
  }
  if (!(spec.static_mag_range[0] >= 0.0 &&
        spec.static_mag_range[1] >= spec.static_mag_range[0])) {
    throw InvalidScene("bad static magnitude range");
  }
  if (!(spec.dynamic_amp_range[0] >= 0.0 &&
        spec.dynamic_amp_range[1] >= spec.dynamic_amp_range[0])) {
    throw InvalidScene("bad dynamic amplitude range");
  }
  if (!(spec.noise.complex_sigma >= 0.0)) throw InvalidScene("negative sigma");
  if (!(spec.noise.impulse_rate >= 0.0 && spec.noise.impulse_rate <= 1.0)) {
    throw InvalidScene("impulse rate outside [0, 1]");
  }
  if (!(spec.noise.impulse_scale > 0.0)) {
    throw InvalidScene("impulse scale must be positive");
  }
  std::vector<MotionEvent> ev = spec.motion_events;
  std::sort(ev.begin(), ev.end(),
            [](const MotionEvent& x, const MotionEvent& y) {
              return x.start_s < y.start_s;
            });
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (!(ev[i].end_s > ev[i].start_s) || ev[i].start_s < 0.0) {
      throw InvalidScene("motion event has an empty or negative span");
    }
    if (!(ev[i].amplitude_m > 0.0)) {
      throw InvalidScene("motion event amplitude must be positive");
    }
    if (i > 0 && ev[i].start_s < ev[i - 1].end_s) {
      throw InvalidScene("motion events overlap");
    }
  }
}

double path_for_target(const SceneSpec& spec, const Vec3& target, int antenna0) {
  return norm3(sub(target, spec.tx)) + norm3(sub(spec.rx[antenna0], target));
}

double motion_pulse(const MotionEvent& ev, double t) {
  if (t < ev.start_s || t > ev.end_s) return 0.0;
  const double x = (t - ev.start_s) / (ev.end_s - ev.start_s);
  const double s = std::sin(M_PI * x);
  return ev.amplitude_m * s * s;
}

}  // namespace

double reflection_path_length(double los_m, double perpendicular_offset_m) {
  if (!(los_m >= 0.0)) {
    throw std::invalid_argument("reflection_path_length: negative separation");
  }
  return 2.0 * std::hypot(0.5 * los_m, perpendicular_offset_m);
}

double breathing_displacement(const BreathingModel& model, double t) {
  const double period = 60.0 / model.rate_bpm;
  const double amp = model.chest_amplitude_m;
  if (model.waveform == BreathingModel::Waveform::kSinusoid) {
    return amp * std::sin(2.0 * M_PI * t / period + model.phase0_rad);
  }
  const double f = model.inhale_fraction;
  double tau = t / period + model.phase0_rad / (2.0 * M_PI);
  tau -= std::floor(tau);
  if (tau < f) return -amp * std::cos(M_PI * tau / f);
  return amp * std::cos(M_PI * (tau - f) / (1.0 - f));
}

double reflection_path(const SimScene& scene, int antenna,
                       double displacement_m) {
  if (antenna < 1 || antenna > 2) {
    throw std::invalid_argument("reflection_path: antenna must be 1 or 2");
  }
  Vec3 axis = scene.spec.displacement_axis;
  const double n = norm3(axis);
  axis = {axis.x / n, axis.y / n, axis.z / n};
  const Vec3 target = axpy(scene.spec.target, axis, displacement_m);
  return path_for_target(scene.spec, target, antenna - 1);
}

SimScene build_scene(const SceneSpec& spec, std::uint64_t seed) {
  validate_spec(spec);

  SimScene scene;
  scene.spec = spec;
  scene.wavelength_m = kSpeedOfLight / spec.carrier_hz;

  Rng rng(seed, Rng::kScene);
  scene.h_static.assign(2, std::vector<ComplexSample>(spec.subcarriers));
  scene.dyn_amp.assign(2, std::vector<double>(spec.subcarriers));
  for (int a = 0; a < 2; ++a) {
    for (int k = 0; k < spec.subcarriers; ++k) {
      const double mag =
          rng.uniform(spec.static_mag_range[0], spec.static_mag_range[1]);
      const double ph = rng.uniform(0.0, 2.0 * M_PI);
      const double amp =
          rng.uniform(spec.dynamic_amp_range[0], spec.dynamic_amp_range[1]);
      scene.h_static[a][k] = std::polar(mag, ph);
      scene.dyn_amp[a][k] = amp;
    }
  }

  scene.base_path_m[0] = reflection_path(scene, 1, 0.0);
  scene.base_path_m[1] = reflection_path(scene, 2, 0.0);
  scene.delta_d_m = scene.base_path_m[1] - scene.base_path_m[0];

  // The constant-path-difference model only holds while the target stays
  // within the breathing envelope; check the drift there.
  const double amp = spec.breathing.chest_amplitude_m;
  double worst = 0.0;
  for (double d : {-amp, -0.5 * amp, 0.5 * amp, amp}) {
    const double dd =
        reflection_path(scene, 2, d) - reflection_path(scene, 1, d);
    worst = std::max(worst, std::abs(dd - scene.delta_d_m));
  }
  if (worst > scene.wavelength_m / 100.0) {
    throw InvalidScene(
        "antenna path difference drifts " + std::to_string(worst) +
        " m over the breathing envelope (limit wavelength/100)");
  }
  return scene;
}

double displacement_for_path_change(const SimScene& scene,
                                    double path_delta_m) {
  if (path_delta_m == 0.0) return 0.0;
  const double base = reflection_path(scene, 1, 0.0);
  const double sign = path_delta_m > 0.0 ? 1.0 : -1.0;

  double hi = 0.1;
  while (sign * (reflection_path(scene, 1, sign * hi) - base) <
         std::abs(path_delta_m)) {
    hi *= 2.0;
    if (hi > 1e6) {
      throw std::invalid_argument(
          "displacement_for_path_change: target path change unreachable");
    }
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double delta = reflection_path(scene, 1, sign * mid) - base;
    if (sign * delta < std::abs(path_delta_m)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return sign * 0.5 * (lo + hi);
}

CsiStream synthesize_with_displacement(
    const SimScene& scene, const std::vector<double>& displacement_m,
    std::uint64_t seed) {
  const SceneSpec& spec = scene.spec;
  const int K = spec.subcarriers;

  CsiStream stream;
  stream.fs_hz = spec.fs_hz;
  stream.carrier_hz = spec.carrier_hz;
  stream.antennas = 2;
  stream.subcarriers = K;
  stream.frames.resize(displacement_m.size());

  Rng noise_rng(seed, Rng::kNoise);
  Rng impulse_rng(seed, Rng::kImpulse);
  Rng offset_rng(seed, Rng::kOffset);

  const bool offsets = spec.noise.phase_offset == PhaseOffsetMode::kUniformPerPacket;
  const bool impulses = spec.noise.impulse_rate > 0.0;
  const double sigma = spec.noise.complex_sigma;
  const double two_pi_over_lambda = 2.0 * M_PI / scene.wavelength_m;

  for (std::size_t i = 0; i < displacement_m.size(); ++i) {
    CsiFrame& frame = stream.frames[i];
    frame.timestamp_s = static_cast<double>(i) / spec.fs_hz;
    frame.values.resize(static_cast<std::size_t>(2) * K);

    // Common per-frame factor: random sounding phase times any gain spike.
    // It multiplies the complete noisy sample for both antennas, which is
    // what lets the two-antenna ratio cancel it.
    ComplexSample common{1.0, 0.0};
    if (offsets) {
      common = std::polar(1.0, -offset_rng.uniform(0.0, 2.0 * M_PI));
    }
    if (impulses && impulse_rng.uniform01() < spec.noise.impulse_rate) {
      common *= spec.noise.impulse_scale;
    }

    const double d1 = reflection_path(scene, 1, displacement_m[i]);
    const double paths[2] = {d1, d1 + scene.delta_d_m};

    for (int a = 0; a < 2; ++a) {
      const ComplexSample rot = std::polar(1.0, -two_pi_over_lambda * paths[a]);
      for (int k = 0; k < K; ++k) {
        ComplexSample v = scene.h_static[a][k] + scene.dyn_amp[a][k] * rot;
        if (sigma > 0.0) v += noise_rng.circular_gaussian(sigma);
        frame.values[static_cast<std::size_t>(a) * K + k] = common * v;
      }
    }
  }
  return stream;
}

SimResult synthesize(const SceneSpec& spec, double duration_s,
                     std::uint64_t seed) {
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("synthesize: duration must be positive");
  }
  const SimScene scene = build_scene(spec, seed);
  for (const auto& ev : spec.motion_events) {
    if (ev.end_s > duration_s) {
      throw InvalidScene("motion event extends past the stream duration");
    }
  }

  const std::size_t n =
      static_cast<std::size_t>(std::llround(duration_s * spec.fs_hz));
  const bool has_target = spec.dynamic_amp_range[1] > 0.0;

  std::vector<double> breathing(n), total(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.fs_hz;
    double d = breathing_displacement(spec.breathing, t);
    double m = 0.0;
    for (const auto& ev : spec.motion_events) m += motion_pulse(ev, t);
    breathing[i] = d;
    total[i] = d + m;
  }

  SimResult result;
  result.stream = synthesize_with_displacement(scene, total, seed);

  GroundTruth& truth = result.truth;
  truth.fs_hz = spec.fs_hz;
  truth.rate_bpm = spec.breathing.rate_bpm;
  truth.has_target = has_target;
  truth.displacement_m = total;
  truth.events = spec.motion_events;
  truth.stationary.resize(n);
  // A frame counts as non-stationary once the motion component perturbs the
  // reflection path by more than wavelength/20 (an 18 degree phase swing);
  // below that the pulse tails are invisible to any detector.
  const double limit = scene.wavelength_m / 20.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = reflection_path(scene, 1, total[i]) -
                         reflection_path(scene, 1, breathing[i]);
    truth.stationary[i] = std::abs(delta) < limit ? 1 : 0;
  }
  return result;
}

}  // namespace csibreath
