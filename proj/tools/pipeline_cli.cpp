// csibreath: channel simulation, respiration-rate estimation, and ratio-model
// verification behind one deterministic command-line surface.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csibreath/config.hpp"
#include "csibreath/csi.hpp"
#include "csibreath/errors.hpp"
#include "csibreath/io.hpp"
#include "csibreath/mobius.hpp"
#include "csibreath/rate.hpp"
#include "csibreath/sim.hpp"
#include "json.hpp"

namespace {

using csibreath::Band;
using csibreath::ComplexSeries;
using csibreath::CsiStream;
using csibreath::FittedCircle;
using csibreath::Orientation;
using csibreath::RunConfig;
using csibreath::SceneSpec;
using csibreath::SimScene;
using nlohmann::json;

// Every failure path emits one machine-readable record on stderr.
int fail(const std::string& type, const std::string& message,
         std::size_t line = 0, int code = 1) {
  json record{{"error", {{"type", type}, {"message", message}}}};
  if (line) record["error"]["line"] = line;
  std::cerr << record.dump() << '\n';
  return code;
}

struct EstimateOverrides {
  double theta_step = 0.0;  // 0 = keep config
  double gate = -1.0;       // < 0 = keep config
  std::string band;         // empty = keep config
};

void apply_overrides(csibreath::EstimatorConfig& config,
                     const EstimateOverrides& ov) {
  if (ov.theta_step > 0.0) config.theta_step_rad = ov.theta_step;
  if (ov.gate >= 0.0) config.gate = ov.gate;
  if (!ov.band.empty()) config.band = csibreath::parse_band(ov.band);
}

int run_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_path) {
  RunConfig config =
      config_path.empty() ? RunConfig{} : csibreath::load_config(config_path);
  csibreath::SimResult result =
      csibreath::synthesize(config.scene, config.duration_s, seed);
  csibreath::write_stream(out_path, result.stream);
  const std::string truth_path = csibreath::truth_path_for(out_path);
  csibreath::write_ground_truth(truth_path, result.truth);
  std::cout << "wrote " << result.stream.frames.size() << " frames ("
            << result.stream.antennas << " antennas x "
            << result.stream.subcarriers << " subcarriers) to " << out_path
            << "\nground truth: " << truth_path << '\n';
  return 0;
}

int run_estimate(const std::string& in_path, const std::string& config_path,
                 const std::string& out_path, const EstimateOverrides& ov) {
  RunConfig config =
      config_path.empty() ? RunConfig{} : csibreath::load_config(config_path);
  apply_overrides(config.estimator, ov);
  CsiStream stream = csibreath::read_stream(in_path);
  std::vector<csibreath::RateEstimate> estimates =
      csibreath::estimate_rate(stream, config.estimator);
  csibreath::write_estimates(out_path, estimates);
  std::cout << "wrote " << estimates.size() << " window records to "
            << out_path << '\n';
  return 0;
}

int run_check(const std::string& in_path) {
  std::size_t n = csibreath::check_estimates_file(in_path);
  std::cout << "ok: " << n << " records\n";
  return 0;
}

// ---- model verification -------------------------------------------------
//
// All checks run noise-free and offset-free: they probe the geometry of the
// ratio locus, not the estimator. A linear path sweep stands in for any
// monotone target motion.

SceneSpec quiet_scene(const RunConfig& config) {
  SceneSpec spec = config.scene;
  spec.noise = csibreath::NoiseModel{};
  spec.noise.complex_sigma = 0.0;
  spec.noise.impulse_rate = 0.0;
  spec.noise.phase_offset = csibreath::PhaseOffsetMode::kNone;
  spec.motion_events.clear();
  return spec;
}

std::vector<ComplexSeries> ratio_loci(const SimScene& scene,
                                      double path_delta_m, int steps,
                                      std::uint64_t seed) {
  std::vector<double> displacement(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i)
    displacement[static_cast<std::size_t>(i)] =
        csibreath::displacement_for_path_change(
            scene, path_delta_m * static_cast<double>(i) / steps);
  CsiStream stream =
      csibreath::synthesize_with_displacement(scene, displacement, seed);
  std::vector<ComplexSeries> loci;
  loci.reserve(static_cast<std::size_t>(scene.spec.subcarriers));
  for (int k = 1; k <= scene.spec.subcarriers; ++k)
    loci.push_back(csibreath::ratio_for_subcarrier(stream, k, 1, 2).samples);
  return loci;
}

const char* orientation_name(Orientation o) {
  switch (o) {
    case Orientation::kClockwise:
      return "clockwise";
    case Orientation::kCounterClockwise:
      return "counterclockwise";
    case Orientation::kIndeterminate:
      return "indeterminate";
  }
  return "unknown";
}

// Orientation agreement over several seeds. Expectation per subcarrier comes
// from the drawn channel: a denominator-antenna static component stronger
// than its dynamic amplitude keeps the locus turning with the path sweep
// (clockwise); weaker flips it. Draws within 5% of the boundary are skipped.
json orientation_check(const char* name, const SceneSpec& base, int seeds,
                       bool& pass) {
  int counted = 0, agree = 0, skipped = 0;
  for (int s = 0; s < seeds; ++s) {
    SimScene scene = csibreath::build_scene(base, 1000 + static_cast<std::uint64_t>(s));
    std::vector<ComplexSeries> loci =
        ratio_loci(scene, scene.wavelength_m, 240, 1000 + static_cast<std::uint64_t>(s));
    for (int k = 0; k < base.subcarriers; ++k) {
      const double hs = std::abs(scene.h_static[1][static_cast<std::size_t>(k)]);
      const double a = scene.dyn_amp[1][static_cast<std::size_t>(k)];
      if (hs > 0.95 * a && hs < 1.05 * a) {
        ++skipped;
        continue;
      }
      const Orientation expected = hs > a ? Orientation::kClockwise
                                          : Orientation::kCounterClockwise;
      const Orientation got =
          csibreath::rotation_orientation(loci[static_cast<std::size_t>(k)]);
      ++counted;
      if (got == expected) ++agree;
    }
  }
  const bool ok = counted > 0 && agree == counted;
  pass = ok;
  return json{{"name", name},     {"seeds", seeds},     {"counted", counted},
              {"agree", agree},   {"skipped", skipped}, {"tolerance", "exact"},
              {"pass", ok}};
}

int run_verify(const std::string& config_path, const std::string& out_path) {
  RunConfig config =
      config_path.empty() ? RunConfig{} : csibreath::load_config(config_path);
  const SceneSpec base = quiet_scene(config);
  json checks = json::array();
  bool all_pass = true;

  // Full-wavelength sweep on the configured scene: locus circularity and
  // total swept angle.
  {
    SimScene scene = csibreath::build_scene(base, 42);
    std::vector<ComplexSeries> loci =
        ratio_loci(scene, scene.wavelength_m, 400, 42);
    double worst_residual = 0.0;
    double worst_arc_err = 0.0;
    double worst_arc = -2.0 * M_PI;
    for (const ComplexSeries& locus : loci) {
      FittedCircle fit = csibreath::fit_circle(locus);
      worst_residual = std::max(worst_residual, fit.rms_residual / fit.radius);
      const double arc = csibreath::arc_radian(locus, fit);
      const double err = std::abs(std::abs(arc) - 2.0 * M_PI) / (2.0 * M_PI);
      if (err > worst_arc_err) {
        worst_arc_err = err;
        worst_arc = arc;
      }
    }
    const bool residual_ok = worst_residual < 1e-6;
    checks.push_back({{"name", "circle_residual"},
                      {"subcarriers", base.subcarriers},
                      {"max_relative_residual", worst_residual},
                      {"tolerance", 1e-6},
                      {"pass", residual_ok}});
    all_pass = all_pass && residual_ok;

    const bool arc_ok = worst_arc_err < 0.02;
    checks.push_back({{"name", "arc_full_wavelength"},
                      {"expected_rad", -2.0 * M_PI},
                      {"worst_arc_rad", worst_arc},
                      {"max_relative_error", worst_arc_err},
                      {"tolerance", 0.02},
                      {"pass", arc_ok}});
    all_pass = all_pass && arc_ok;
  }

  // Sixth-wavelength sweep. Measured on a strongly static-dominant channel:
  // the locus angle tracks the path phase uniformly only when the map's pole
  // sits far outside the unit circle, which is the regime the full-circle
  // claim generalizes from. Sub-wavelength arcs on weakly dominant channels
  // are systematically stretched or compressed around the circle.
  {
    SceneSpec strong = base;
    strong.static_mag_range = {8.0, 8.0};
    strong.dynamic_amp_range = {0.2, 0.2};
    SimScene scene = csibreath::build_scene(strong, 43);
    std::vector<ComplexSeries> arcs =
        ratio_loci(scene, scene.wavelength_m / 6.0, 120, 43);
    // A sixth of a circle is too short for a stable fit of its own; take
    // each subcarrier's circle from a complete sweep of the same scene.
    std::vector<ComplexSeries> full =
        ratio_loci(scene, scene.wavelength_m, 240, 43);
    double worst_err = 0.0;
    double worst_arc = 0.0;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const double arc =
          csibreath::arc_radian(arcs[k], csibreath::fit_circle(full[k]));
      const double err = std::abs(std::abs(arc) - M_PI / 3.0) / (M_PI / 3.0);
      if (err >= worst_err) {
        worst_err = err;
        worst_arc = arc;
      }
    }
    const bool ok = worst_err < 0.10;
    checks.push_back({{"name", "arc_sixth_wavelength"},
                      {"expected_abs_rad", M_PI / 3.0},
                      {"worst_arc_rad", worst_arc},
                      {"max_relative_error", worst_err},
                      {"tolerance", 0.10},
                      {"pass", ok}});
    all_pass = all_pass && ok;
  }

  // Orientation vs the static/dynamic magnitude ordering, on both sides.
  {
    SceneSpec dominant = base;
    dominant.static_mag_range = {0.6, 1.4};
    dominant.dynamic_amp_range = {0.15, 0.25};
    bool ok = false;
    checks.push_back(
        orientation_check("orientation_static_dominant", dominant, 10, ok));
    all_pass = all_pass && ok;

    SceneSpec attenuated = base;
    attenuated.static_mag_range = {0.02, 0.08};
    attenuated.dynamic_amp_range = {0.15, 0.25};
    checks.push_back(
        orientation_check("orientation_static_attenuated", attenuated, 10, ok));
    all_pass = all_pass && ok;
  }

  // Equal magnitudes put the map's pole on the sample circle; the locus
  // degenerates toward a line and direction is reported indeterminate.
  // Excluded from pass/fail by design.
  {
    SceneSpec boundary = base;
    boundary.static_mag_range = {0.2, 0.2};
    boundary.dynamic_amp_range = {0.2, 0.2};
    SimScene scene = csibreath::build_scene(boundary, 44);
    std::vector<ComplexSeries> loci =
        ratio_loci(scene, scene.wavelength_m, 240, 44);
    std::string result = "indeterminate";
    for (const ComplexSeries& locus : loci) {
      Orientation o = Orientation::kIndeterminate;
      try {
        o = csibreath::rotation_orientation(locus);
      } catch (const csibreath::DegenerateInput&) {
        o = Orientation::kIndeterminate;
      }
      if (o != Orientation::kIndeterminate) {
        result = orientation_name(o);
        break;
      }
    }
    checks.push_back({{"name", "orientation_boundary"},
                      {"result", result},
                      {"excluded", true}});
  }

  json report{{"wavelength_m",
               csibreath::kSpeedOfLight / config.scene.carrier_hz},
              {"checks", checks},
              {"pass", all_pass}};
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw csibreath::Error("cannot open for writing: " + out_path);
    out << report.dump(2) << '\n';
    if (!out) throw csibreath::Error("write failed: " + out_path);
  }
  for (const json& c : checks) {
    if (c.contains("pass"))
      std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ")
                << c["name"].get<std::string>() << '\n';
    else
      std::cout << "INFO " << c["name"].get<std::string>() << " ("
                << c["result"].get<std::string>() << ", excluded)\n";
  }
  if (!all_pass)
    return fail("verification_failed",
                "one or more model checks failed; see " + out_path, 0, 3);
  std::cout << "report: " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI-ratio respiration sensing: simulate, estimate, verify"};
  app.require_subcommand(1);

  std::string config_path, in_path, out_path;
  std::uint64_t seed = 0;
  EstimateOverrides overrides;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Synthesize a CSI stream and its ground-truth sidecar");
  sim->add_option("--config", config_path, "JSON config (defaults if omitted)")
      ->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "RNG seed; fixes all randomness")->required();
  sim->add_option("--out", out_path, "output stream path (.gz to compress)")
      ->required();

  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate respiration rate per sliding window");
  est->add_option("--in", in_path, "input CSI stream")->required();
  est->add_option("--config", config_path, "JSON config (defaults if omitted)")
      ->check(CLI::ExistingFile);
  est->add_option("--out", out_path, "output records path (one JSON per line)")
      ->required();
  est->add_option("--theta-step", overrides.theta_step,
                  "projection angle step in radians (override)")
      ->check(CLI::PositiveNumber);
  est->add_option("--gate", overrides.gate,
                  "subcarrier fusion gate as a fraction of the best "
                  "periodicity score (override)")
      ->check(CLI::Range(0.0, 1.0));
  est->add_option("--band", overrides.band,
                  "respiration band LO:HI in breaths per minute (override)");

  CLI::App* verify = app.add_subcommand(
      "verify-model", "Check circularity, orientation, and arc length of the "
                      "ratio locus on noise-free scenes");
  verify->add_option("--config", config_path,
                     "JSON config (defaults if omitted)")
      ->check(CLI::ExistingFile);
  verify->add_option("--out", out_path, "report path (JSON)")->required();

  CLI::App* check = app.add_subcommand(
      "check-results", "Validate the schema of an estimate records file");
  check->add_option("--in", in_path, "records file to validate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 0,
                e.get_exit_code() ? e.get_exit_code() : 2);
  }

  try {
    if (sim->parsed()) return run_simulate(config_path, seed, out_path);
    if (est->parsed())
      return run_estimate(in_path, config_path, out_path, overrides);
    if (verify->parsed()) return run_verify(config_path, out_path);
    if (check->parsed()) return run_check(in_path);
  } catch (const csibreath::ParseError& e) {
    return fail("parse_error", e.what(), e.line);
  } catch (const csibreath::InvalidScene& e) {
    return fail("invalid_scene", e.what());
  } catch (const csibreath::DenominatorUnderflow& e) {
    return fail("denominator_underflow", e.what());
  } catch (const csibreath::ZeroEnergy& e) {
    return fail("zero_energy", e.what());
  } catch (const csibreath::ZeroVariance& e) {
    return fail("zero_variance", e.what());
  } catch (const csibreath::NoPeak& e) {
    return fail("no_peak", e.what());
  } catch (const csibreath::BadFilterParams& e) {
    return fail("bad_filter_params", e.what());
  } catch (const csibreath::DegenerateInput& e) {
    return fail("degenerate_input", e.what());
  } catch (const csibreath::OffCircle& e) {
    return fail("off_circle", e.what());
  } catch (const csibreath::PoleHit& e) {
    return fail("pole_hit", e.what());
  } catch (const csibreath::Error& e) {
    return fail("error", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return fail("usage", "no subcommand", 0, 2);
}
