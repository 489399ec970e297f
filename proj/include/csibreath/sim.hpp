#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "csibreath/csi.hpp"

namespace csibreath {

inline constexpr double kSpeedOfLight = 299792458.0;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct BreathingModel {
  enum class Waveform { kSinusoid, kAsymmetric };
  Waveform waveform = Waveform::kSinusoid;
  double rate_bpm = 18.2;           // valid range [10, 37]
  double chest_amplitude_m = 0.008; // valid range [0.005, 0.012]
  double inhale_fraction = 0.4;     // asymmetric waveform: rising fraction
  double phase0_rad = 0.0;
};

// Chest displacement at time t, signed meters along the displacement axis.
// Sinusoid: A sin(2 pi t / P + phase0). Asymmetric: half-cosine rise over
// inhale_fraction of the period, half-cosine fall over the rest; C1 at the
// junctions because both half-waves have zero slope at the extremes.
double breathing_displacement(const BreathingModel& model, double t);

enum class PhaseOffsetMode { kNone, kUniformPerPacket };

struct NoiseModel {
  double complex_sigma = 0.0;   // std of additive circular complex noise
  double impulse_rate = 0.0;    // per-frame probability of a gain spike
  double impulse_scale = 10.0;  // amplitude multiplier while a spike lasts
  PhaseOffsetMode phase_offset = PhaseOffsetMode::kNone;
};

// Large-displacement interruption: raised-cosine pulse that starts and ends
// at zero, peaking at amplitude_m halfway through [start_s, end_s].
struct MotionEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  double amplitude_m = 0.0;
};

// Scene description with per-subcarrier channel draws left as ranges.
struct SceneSpec {
  Vec3 tx{0.0, 0.0, 1.0};
  std::array<Vec3, 2> rx{{{4.0, 0.0, 1.0}, {4.0286, 0.0, 1.0}}};
  Vec3 target{2.0, 2.0, 1.0};
  Vec3 displacement_axis{0.0, 1.0, 0.0};
  double carrier_hz = 5.24e9;
  double fs_hz = 100.0;
  int subcarriers = 30;
  // |H_s| and A drawn uniformly per (antenna, subcarrier); H_s phase uniform.
  std::array<double, 2> static_mag_range{0.6, 1.4};
  std::array<double, 2> dynamic_amp_range{0.15, 0.25};
  BreathingModel breathing;
  NoiseModel noise;
  std::vector<MotionEvent> motion_events;
};

// Concrete scene: channel constants pinned by the seed's scene substream.
struct SimScene {
  SceneSpec spec;
  double wavelength_m = 0.0;
  // Indexed [antenna][subcarrier], antennas 0-based here.
  std::vector<std::vector<ComplexSample>> h_static;
  std::vector<std::vector<double>> dyn_amp;
  double base_path_m[2] = {0.0, 0.0};  // reflection path at zero displacement
  double delta_d_m = 0.0;              // antenna-2 minus antenna-1 path, t=0
};

struct GroundTruth {
  double fs_hz = 0.0;
  double rate_bpm = 0.0;
  bool has_target = true;
  std::vector<double> displacement_m;  // total target offset per frame
  std::vector<std::uint8_t> stationary;
  std::vector<MotionEvent> events;
};

struct SimResult {
  CsiStream stream;
  GroundTruth truth;
};

// Round-trip path via a reflector sitting `perpendicular_offset_m` off the
// midpoint of a `los_m` transmitter-receiver separation.
double reflection_path_length(double los_m, double perpendicular_offset_m);

// Validates the scene and draws per-subcarrier channel constants. Throws
// InvalidScene when the fixed antenna path difference assumption would not
// hold over the breathing envelope (drift > wavelength/100).
SimScene build_scene(const SceneSpec& spec, std::uint64_t seed);

// Exact reflection path for one antenna (1-based) with the target displaced
// along the scene axis.
double reflection_path(const SimScene& scene, int antenna,
                       double displacement_m);

// Target displacement that lengthens antenna 1's reflection path by
// `path_delta_m` (monotone in our geometry; solved by bisection).
double displacement_for_path_change(const SimScene& scene,
                                    double path_delta_m);

// Frame stream for an explicit per-frame displacement profile. Uses the
// seed's noise/impulse/offset substreams; the profile is taken as-is, so
// sweeps beyond breathing amplitudes are fine here.
CsiStream synthesize_with_displacement(const SimScene& scene,
                                       const std::vector<double>& displacement_m,
                                       std::uint64_t seed);

// Full run: breathing plus motion events, with ground truth. Deterministic
// in (spec, duration, seed).
SimResult synthesize(const SceneSpec& spec, double duration_s,
                     std::uint64_t seed);

}  // namespace csibreath
