#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csibreath {

// Base for all domain errors. Contract violations (bad argument shapes,
// out-of-range parameters) use std::invalid_argument instead.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// |denominator| fell below the configured floor at `index`.
struct DenominatorUnderflow : Error {
  DenominatorUnderflow(std::size_t index, double magnitude)
      : Error("csi_ratio: denominator magnitude " + std::to_string(magnitude) +
              " below floor at sample " + std::to_string(index)),
        index(index),
        magnitude(magnitude) {}
  std::size_t index;
  double magnitude;
};

// Mobius evaluation at (or numerically on top of) the pole -D/C.
struct PoleHit : Error {
  explicit PoleHit(const std::string& what) : Error(what) {}
};

// Fewer than three usable points, or collinear within tolerance.
struct DegenerateInput : Error {
  explicit DegenerateInput(const std::string& what) : Error(what) {}
};

// A sample lies further than the allowed fraction from the fitted circle.
struct OffCircle : Error {
  OffCircle(std::size_t index, double deviation)
      : Error("arc_radian: sample " + std::to_string(index) +
              " deviates from the fitted circle by " + std::to_string(deviation) +
              " of the radius"),
        index(index),
        deviation(deviation) {}
  std::size_t index;
  double deviation;
};

struct BadFilterParams : Error {
  explicit BadFilterParams(const std::string& what) : Error(what) {}
};

// Series carries no energy after mean removal (constant input).
struct ZeroEnergy : Error {
  explicit ZeroEnergy(const std::string& what) : Error(what) {}
};

// Autocorrelation of a (numerically) constant series.
struct ZeroVariance : Error {
  explicit ZeroVariance(const std::string& what) : Error(what) {}
};

// No qualifying autocorrelation peak inside the configured lag range.
struct NoPeak : Error {
  explicit NoPeak(const std::string& what) : Error(what) {}
};

// Scene parameters violate a model assumption (e.g. antenna spacing).
struct InvalidScene : Error {
  explicit InvalidScene(const std::string& what) : Error(what) {}
};

// Input file rejected; `line` is 1-based, 0 when not line-specific.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? ("line " + std::to_string(line) + ": " + what) : what),
        line(line) {}
  std::size_t line;
};

}  // namespace csibreath
