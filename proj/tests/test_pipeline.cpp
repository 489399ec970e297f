#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "csibreath/config.hpp"
#include "csibreath/io.hpp"
#include "csibreath/rate.hpp"
#include "csibreath/sim.hpp"
#include "doctest.h"

using csibreath::EstimatorConfig;
using csibreath::RateEstimate;
using csibreath::SceneSpec;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("estimates survive the file round trip unchanged") {
  SceneSpec spec;
  spec.subcarriers = 4;
  spec.noise.complex_sigma = 0.03;
  spec.noise.phase_offset = csibreath::PhaseOffsetMode::kUniformPerPacket;
  const auto sim = csibreath::synthesize(spec, 15.0, 201);

  EstimatorConfig cfg;
  const auto direct = csibreath::estimate_rate(sim.stream, cfg);
  REQUIRE(direct.size() == 4);

  const std::string path = "pipeline_stream.csv";
  csibreath::write_stream(path, sim.stream);
  const auto loaded = csibreath::read_stream(path);
  const auto via_file = csibreath::estimate_rate(loaded, cfg);

  REQUIRE(via_file.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    // Identical records, down to the serialized text.
    CHECK(csibreath::estimate_record(via_file[i]) ==
          csibreath::estimate_record(direct[i]));
  }
  std::remove(path.c_str());
}

TEST_CASE("simulate twice with one seed gives byte-identical files") {
  SceneSpec spec;
  spec.subcarriers = 3;
  spec.noise.complex_sigma = 0.05;
  spec.noise.impulse_rate = 0.1;

  const std::string p1 = "pipeline_seed_a.csv";
  const std::string p2 = "pipeline_seed_b.csv";
  csibreath::write_stream(p1, csibreath::synthesize(spec, 3.0, 42).stream);
  csibreath::write_stream(p2, csibreath::synthesize(spec, 3.0, 42).stream);
  CHECK(slurp(p1) == slurp(p2));

  const std::string p3 = "pipeline_seed_c.csv";
  csibreath::write_stream(p3, csibreath::synthesize(spec, 3.0, 43).stream);
  CHECK(slurp(p1) != slurp(p3));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
  std::remove(p3.c_str());
}

TEST_CASE("default run shape: 60 s, 49 hops, full frame grid") {
  SceneSpec spec;
  spec.subcarriers = 2;  // keep the sweep cheap; grid shape is what matters
  const auto sim = csibreath::synthesize(spec, 60.0, 7);
  CHECK(sim.stream.frames.size() == 6000);
  CHECK(sim.stream.frames[5999].timestamp_s == 5999.0 / 100.0);

  const auto estimates = csibreath::estimate_rate(sim.stream, EstimatorConfig{});
  CHECK(estimates.size() == 49);
  CHECK(estimates.front().window_start_s == 0.0);
  CHECK(estimates.back().window_start_s == 48.0);
}

TEST_CASE("ground truth sidecar reflects the scene") {
  SceneSpec still;
  still.subcarriers = 2;
  still.dynamic_amp_range = {0.0, 0.0};
  const auto sim = csibreath::synthesize(still, 2.0, 11);

  const std::string path = "pipeline_truth.csv";
  csibreath::write_stream(path, sim.stream);
  csibreath::write_ground_truth(csibreath::truth_path_for(path), sim.truth);
  const auto truth =
      csibreath::read_ground_truth(csibreath::truth_path_for(path));
  CHECK_FALSE(truth.has_target);
  CHECK(truth.fs_hz == 100.0);
  CHECK(truth.displacement_m.size() == 200);
  std::remove(path.c_str());
  std::remove(csibreath::truth_path_for(path).c_str());
}

TEST_CASE("config file drives both simulation and estimation") {
  const auto cfg = csibreath::parse_config(R"({
    "duration_s": 14,
    "scene": {"subcarriers": 3, "noise": {"complex_sigma": 0.02}},
    "estimator": {"hop_s": 2}
  })");
  const auto sim = csibreath::synthesize(cfg.scene, cfg.duration_s, 5);
  CHECK(sim.stream.frames.size() == 1400);
  const auto estimates = csibreath::estimate_rate(sim.stream, cfg.estimator);
  REQUIRE(estimates.size() == 2);  // starts at 0 s and 2 s
  for (const auto& e : estimates) {
    CHECK(e.status == RateEstimate::Status::kOk);
    CHECK(std::abs(e.rate_bpm - 18.2) <= 0.5);
  }
}
