#pragma once

#include <string>

#include "csibreath/rate.hpp"
#include "csibreath/sim.hpp"

namespace csibreath {

// One file drives both ends of the pipeline; either section may be omitted
// and every field has the library default.
struct RunConfig {
  double duration_s = 60.0;
  SceneSpec scene;
  EstimatorConfig estimator;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& config);

// "LO:HI" in breaths per minute, e.g. "10:37". Throws ParseError.
Band parse_band(const std::string& text);

}  // namespace csibreath
