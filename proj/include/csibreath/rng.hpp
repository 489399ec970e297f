#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace csibreath {

// Deterministic generator with explicitly separated substreams.
//
// Distribution code is hand-rolled on top of mt19937_64 so that a given
// (seed, stream) pair reproduces the same values on every platform and
// standard library. Substreams keep draws independent: toggling phase
// offsets must not shift the Gaussian noise sequence, or seed-matched
// A/B runs stop being comparable.
class Rng {
 public:
  // Stream ids used by the simulator. Anything else is free for tests.
  enum Stream : std::uint64_t {
    kScene = 1,
    kNoise = 2,
    kImpulse = 3,
    kOffset = 4,
    kBreathing = 5,
  };

  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix(seed, stream)) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal pair via the trigonometric Box-Muller transform;
  // exactly two engine draws per call, no rejection loop.
  std::complex<double> normal_pair() {
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard u1 == 0; log(0) would produce infinity.
    double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-64));
    double a = 2.0 * M_PI * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  // Circular complex Gaussian with E|n|^2 = sigma^2.
  std::complex<double> circular_gaussian(double sigma) {
    return normal_pair() * (sigma * M_SQRT1_2);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over (seed, stream); decorrelates nearby seeds.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace csibreath
