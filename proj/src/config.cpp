#include "csibreath/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <string>

#include "csibreath/errors.hpp"
#include "json.hpp"

namespace csibreath {
namespace {

using nlohmann::json;

// Typos in config keys should fail loudly, not silently use a default.
void reject_unknown_keys(const json& j, const char* context,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw ParseError(0, std::string("unknown key '") + item.key() + "' in " +
                              context);
  }
}

Vec3 vec3_from(const json& j, const char* context) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(0, std::string(context) + " must be [x, y, z]");
  return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::array<double, 2> range_from(const json& j, const char* context) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError(0, std::string(context) + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

BreathingModel breathing_from(const json& j) {
  reject_unknown_keys(j, "breathing",
                      {"waveform", "rate_bpm", "chest_amplitude_m",
                       "inhale_fraction", "phase0_rad"});
  BreathingModel m;
  if (j.contains("waveform")) {
    const std::string w = j.at("waveform").get<std::string>();
    if (w == "sinusoid")
      m.waveform = BreathingModel::Waveform::kSinusoid;
    else if (w == "asymmetric")
      m.waveform = BreathingModel::Waveform::kAsymmetric;
    else
      throw ParseError(0, "unknown waveform '" + w + "'");
  }
  if (j.contains("rate_bpm")) m.rate_bpm = j.at("rate_bpm").get<double>();
  if (j.contains("chest_amplitude_m"))
    m.chest_amplitude_m = j.at("chest_amplitude_m").get<double>();
  if (j.contains("inhale_fraction"))
    m.inhale_fraction = j.at("inhale_fraction").get<double>();
  if (j.contains("phase0_rad")) m.phase0_rad = j.at("phase0_rad").get<double>();
  return m;
}

NoiseModel noise_from(const json& j) {
  reject_unknown_keys(
      j, "noise",
      {"complex_sigma", "impulse_rate", "impulse_scale", "phase_offset"});
  NoiseModel n;
  if (j.contains("complex_sigma"))
    n.complex_sigma = j.at("complex_sigma").get<double>();
  if (j.contains("impulse_rate"))
    n.impulse_rate = j.at("impulse_rate").get<double>();
  if (j.contains("impulse_scale"))
    n.impulse_scale = j.at("impulse_scale").get<double>();
  if (j.contains("phase_offset")) {
    const std::string p = j.at("phase_offset").get<std::string>();
    if (p == "none")
      n.phase_offset = PhaseOffsetMode::kNone;
    else if (p == "uniform_per_packet")
      n.phase_offset = PhaseOffsetMode::kUniformPerPacket;
    else
      throw ParseError(0, "unknown phase_offset mode '" + p + "'");
  }
  return n;
}

SceneSpec scene_from(const json& j) {
  reject_unknown_keys(
      j, "scene",
      {"tx", "rx", "target", "displacement_axis", "carrier_hz", "fs_hz",
       "subcarriers", "static_mag_range", "dynamic_amp_range", "breathing",
       "noise", "motion_events"});
  SceneSpec s;
  if (j.contains("tx")) s.tx = vec3_from(j.at("tx"), "tx");
  if (j.contains("rx")) {
    const json& rx = j.at("rx");
    if (!rx.is_array() || rx.size() != 2)
      throw ParseError(0, "rx must list exactly two antenna positions");
    s.rx[0] = vec3_from(rx[0], "rx[0]");
    s.rx[1] = vec3_from(rx[1], "rx[1]");
  }
  if (j.contains("target")) s.target = vec3_from(j.at("target"), "target");
  if (j.contains("displacement_axis"))
    s.displacement_axis =
        vec3_from(j.at("displacement_axis"), "displacement_axis");
  if (j.contains("carrier_hz")) s.carrier_hz = j.at("carrier_hz").get<double>();
  if (j.contains("fs_hz")) s.fs_hz = j.at("fs_hz").get<double>();
  if (j.contains("subcarriers")) s.subcarriers = j.at("subcarriers").get<int>();
  if (j.contains("static_mag_range"))
    s.static_mag_range = range_from(j.at("static_mag_range"), "static_mag_range");
  if (j.contains("dynamic_amp_range"))
    s.dynamic_amp_range =
        range_from(j.at("dynamic_amp_range"), "dynamic_amp_range");
  if (j.contains("breathing")) s.breathing = breathing_from(j.at("breathing"));
  if (j.contains("noise")) s.noise = noise_from(j.at("noise"));
  if (j.contains("motion_events")) {
    for (const json& e : j.at("motion_events")) {
      reject_unknown_keys(e, "motion_events[]",
                          {"start_s", "end_s", "amplitude_m"});
      MotionEvent ev;
      ev.start_s = e.at("start_s").get<double>();
      ev.end_s = e.at("end_s").get<double>();
      ev.amplitude_m = e.at("amplitude_m").get<double>();
      s.motion_events.push_back(ev);
    }
  }
  return s;
}

MotionGateParams motion_from(const json& j) {
  reject_unknown_keys(j, "motion",
                      {"threshold", "significance", "winding_bound",
                       "resp_max_hz", "motion_min_hz", "motion_max_hz"});
  MotionGateParams m;
  if (j.contains("threshold")) m.threshold = j.at("threshold").get<double>();
  if (j.contains("significance"))
    m.significance = j.at("significance").get<double>();
  if (j.contains("winding_bound"))
    m.winding_bound = j.at("winding_bound").get<double>();
  if (j.contains("resp_max_hz"))
    m.resp_max_hz = j.at("resp_max_hz").get<double>();
  if (j.contains("motion_min_hz"))
    m.motion_min_hz = j.at("motion_min_hz").get<double>();
  if (j.contains("motion_max_hz"))
    m.motion_max_hz = j.at("motion_max_hz").get<double>();
  return m;
}

EstimatorConfig estimator_from(const json& j) {
  reject_unknown_keys(
      j, "estimator",
      {"window_s", "hop_s", "theta_step_rad", "band_bpm", "fft_size", "gate",
       "sg_window", "sg_order", "ratio_floor", "peak_prominence",
       "numerator_antenna", "denominator_antenna", "motion_window_s", "motion",
       "selection", "fixed_theta_rad"});
  EstimatorConfig c;
  if (j.contains("window_s")) c.window_s = j.at("window_s").get<double>();
  if (j.contains("hop_s")) c.hop_s = j.at("hop_s").get<double>();
  if (j.contains("theta_step_rad"))
    c.theta_step_rad = j.at("theta_step_rad").get<double>();
  if (j.contains("band_bpm")) {
    auto r = range_from(j.at("band_bpm"), "band_bpm");
    c.band.min_bpm = r[0];
    c.band.max_bpm = r[1];
  }
  if (j.contains("fft_size")) c.fft_size = j.at("fft_size").get<std::size_t>();
  if (j.contains("gate")) c.gate = j.at("gate").get<double>();
  if (j.contains("sg_window")) c.sg_window = j.at("sg_window").get<int>();
  if (j.contains("sg_order")) c.sg_order = j.at("sg_order").get<int>();
  if (j.contains("ratio_floor"))
    c.ratio_floor = j.at("ratio_floor").get<double>();
  if (j.contains("peak_prominence"))
    c.peak_prominence = j.at("peak_prominence").get<double>();
  if (j.contains("numerator_antenna"))
    c.numerator_antenna = j.at("numerator_antenna").get<int>();
  if (j.contains("denominator_antenna"))
    c.denominator_antenna = j.at("denominator_antenna").get<int>();
  if (j.contains("motion_window_s"))
    c.motion_window_s = j.at("motion_window_s").get<double>();
  if (j.contains("motion")) c.motion = motion_from(j.at("motion"));
  if (j.contains("selection")) {
    const std::string s = j.at("selection").get<std::string>();
    if (s == "band_peak_ratio")
      c.selection = Selection::kBandPeakRatio;
    else if (s == "variance")
      c.selection = Selection::kVariance;
    else if (s == "fixed_angle")
      c.selection = Selection::kFixedAngle;
    else
      throw ParseError(0, "unknown selection '" + s + "'");
  }
  if (j.contains("fixed_theta_rad"))
    c.fixed_theta_rad = j.at("fixed_theta_rad").get<double>();
  return c;
}

json scene_to(const SceneSpec& s) {
  json j;
  j["tx"] = vec3_to(s.tx);
  j["rx"] = json::array({vec3_to(s.rx[0]), vec3_to(s.rx[1])});
  j["target"] = vec3_to(s.target);
  j["displacement_axis"] = vec3_to(s.displacement_axis);
  j["carrier_hz"] = s.carrier_hz;
  j["fs_hz"] = s.fs_hz;
  j["subcarriers"] = s.subcarriers;
  j["static_mag_range"] = json::array({s.static_mag_range[0], s.static_mag_range[1]});
  j["dynamic_amp_range"] =
      json::array({s.dynamic_amp_range[0], s.dynamic_amp_range[1]});
  j["breathing"] = {
      {"waveform", s.breathing.waveform == BreathingModel::Waveform::kSinusoid
                       ? "sinusoid"
                       : "asymmetric"},
      {"rate_bpm", s.breathing.rate_bpm},
      {"chest_amplitude_m", s.breathing.chest_amplitude_m},
      {"inhale_fraction", s.breathing.inhale_fraction},
      {"phase0_rad", s.breathing.phase0_rad}};
  j["noise"] = {{"complex_sigma", s.noise.complex_sigma},
                {"impulse_rate", s.noise.impulse_rate},
                {"impulse_scale", s.noise.impulse_scale},
                {"phase_offset", s.noise.phase_offset == PhaseOffsetMode::kNone
                                     ? "none"
                                     : "uniform_per_packet"}};
  json events = json::array();
  for (const MotionEvent& e : s.motion_events)
    events.push_back({{"start_s", e.start_s},
                      {"end_s", e.end_s},
                      {"amplitude_m", e.amplitude_m}});
  j["motion_events"] = std::move(events);
  return j;
}

json estimator_to(const EstimatorConfig& c) {
  json j;
  j["window_s"] = c.window_s;
  j["hop_s"] = c.hop_s;
  j["theta_step_rad"] = c.theta_step_rad;
  j["band_bpm"] = json::array({c.band.min_bpm, c.band.max_bpm});
  j["fft_size"] = c.fft_size;
  j["gate"] = c.gate;
  j["sg_window"] = c.sg_window;
  j["sg_order"] = c.sg_order;
  j["ratio_floor"] = c.ratio_floor;
  j["peak_prominence"] = c.peak_prominence;
  j["numerator_antenna"] = c.numerator_antenna;
  j["denominator_antenna"] = c.denominator_antenna;
  j["motion_window_s"] = c.motion_window_s;
  j["motion"] = {{"threshold", c.motion.threshold},
                 {"significance", c.motion.significance},
                 {"winding_bound", c.motion.winding_bound},
                 {"resp_max_hz", c.motion.resp_max_hz},
                 {"motion_min_hz", c.motion.motion_min_hz},
                 {"motion_max_hz", c.motion.motion_max_hz}};
  switch (c.selection) {
    case Selection::kBandPeakRatio:
      j["selection"] = "band_peak_ratio";
      break;
    case Selection::kVariance:
      j["selection"] = "variance";
      break;
    case Selection::kFixedAngle:
      j["selection"] = "fixed_angle";
      break;
  }
  j["fixed_theta_rad"] = c.fixed_theta_rad;
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(0, "config root must be an object");
  reject_unknown_keys(j, "config", {"duration_s", "scene", "estimator"});
  RunConfig config;
  try {
    if (j.contains("duration_s"))
      config.duration_s = j.at("duration_s").get<double>();
    if (j.contains("scene")) config.scene = scene_from(j.at("scene"));
    if (j.contains("estimator"))
      config.estimator = estimator_from(j.at("estimator"));
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad config value: ") + e.what());
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string config_to_json(const RunConfig& config) {
  json j;
  j["duration_s"] = config.duration_s;
  j["scene"] = scene_to(config.scene);
  j["estimator"] = estimator_to(config.estimator);
  return j.dump(2);
}

Band parse_band(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw ParseError(0, "band must be LO:HI in breaths per minute");
  char* end = nullptr;
  Band band;
  band.min_bpm = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + colon)
    throw ParseError(0, "bad band lower bound '" + text + "'");
  const char* hi = text.c_str() + colon + 1;
  band.max_bpm = std::strtod(hi, &end);
  if (end == hi || *end != '\0')
    throw ParseError(0, "bad band upper bound '" + text + "'");
  if (!(band.min_bpm > 0.0) || !(band.max_bpm > band.min_bpm))
    throw ParseError(0, "band must satisfy 0 < LO < HI");
  return band;
}

}  // namespace csibreath
