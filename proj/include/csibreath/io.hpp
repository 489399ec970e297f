#pragma once

#include <string>
#include <vector>

#include "csibreath/csi.hpp"
#include "csibreath/rate.hpp"
#include "csibreath/sim.hpp"

namespace csibreath {

// CSI stream files: '#'-prefixed header (format tag, sounding rate, antenna
// and subcarrier counts, carrier) followed by one CSV row per value:
// timestamp_s,antenna,subcarrier,re,im. Values print with 17 significant
// digits so a write/read round trip is bit-exact. Paths ending in .gz are
// written gzip-compressed; reads are gzip-transparent either way.
void write_stream(const std::string& path, const CsiStream& stream);
CsiStream read_stream(const std::string& path);

// Ground truth sidecar (JSON). simulate places it next to the stream file.
std::string truth_path_for(const std::string& stream_path);
void write_ground_truth(const std::string& path, const GroundTruth& truth);
GroundTruth read_ground_truth(const std::string& path);

// Estimator output: one self-describing JSON record per line per window.
std::string estimate_record(const RateEstimate& estimate);
void write_estimates(const std::string& path,
                     const std::vector<RateEstimate>& estimates);
std::vector<RateEstimate> read_estimates(const std::string& path);

// Schema check for a result file; throws ParseError with the line number on
// the first violation. Returns the record count.
std::size_t check_estimates_file(const std::string& path);

}  // namespace csibreath
