#include "csibreath/io.hpp"

#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "csibreath/errors.hpp"
#include "json.hpp"

namespace csibreath {
namespace {

using nlohmann::json;

constexpr const char* kStreamMagic = "# csibreath-csi v1";

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Single sink for plain or gzip output so the writer code stays linear.
class LineWriter {
 public:
  LineWriter(const std::string& path, bool gzip) : gzip_(gzip) {
    if (gzip_) {
      gz_ = gzopen(path.c_str(), "wb");
      if (!gz_) throw Error("cannot open for writing: " + path);
    } else {
      file_ = std::fopen(path.c_str(), "wb");
      if (!file_) throw Error("cannot open for writing: " + path);
    }
  }
  ~LineWriter() {
    if (gz_) gzclose(gz_);
    if (file_) std::fclose(file_);
  }
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void line(const std::string& text) {
    if (gzip_) {
      if (gzputs(gz_, text.c_str()) < 0 || gzputc(gz_, '\n') < 0)
        throw Error("write failed (gzip)");
    } else {
      if (std::fputs(text.c_str(), file_) == EOF ||
          std::fputc('\n', file_) == EOF)
        throw Error("write failed");
    }
  }

  void close() {
    if (gz_) {
      if (gzclose(gz_) != Z_OK) throw Error("gzip close failed");
      gz_ = nullptr;
    }
    if (file_) {
      int rc = std::fclose(file_);
      file_ = nullptr;
      if (rc != 0) throw Error("close failed");
    }
  }

 private:
  bool gzip_;
  gzFile gz_ = nullptr;
  std::FILE* file_ = nullptr;
};

// gzgets-based reader; reads plain files unchanged (zlib falls back to
// transparent mode when no gzip magic is present).
class LineReader {
 public:
  explicit LineReader(const std::string& path) {
    gz_ = gzopen(path.c_str(), "rb");
    if (!gz_) throw Error("cannot open for reading: " + path);
  }
  ~LineReader() {
    if (gz_) gzclose(gz_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Returns false at EOF. Strips the trailing newline (and CR, if any).
  bool next(std::string& out, std::size_t& line_no) {
    char buf[65536];
    if (gzgets(gz_, buf, sizeof(buf)) == nullptr) {
      int err = 0;
      const char* msg = gzerror(gz_, &err);
      if (err != Z_OK && err != Z_STREAM_END)
        throw ParseError(line_no_ + 1, std::string("read failed: ") + msg);
      return false;
    }
    ++line_no_;
    line_no = line_no_;
    out = buf;
    if (!out.empty() && out.back() == '\n')
      out.pop_back();
    else if (out.size() + 1 == sizeof(buf))
      throw ParseError(line_no_, "line too long");
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  }

 private:
  gzFile gz_;
  std::size_t line_no_ = 0;
};

double parse_number(const std::string& field, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(line_no, "bad number '" + field + "'");
  return v;
}

long parse_int(const std::string& field, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(line_no, "bad integer '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON in ") + path + ": " +
                            e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

const char* status_name(RateEstimate::Status s) {
  switch (s) {
    case RateEstimate::Status::kOk:
      return "ok";
    case RateEstimate::Status::kNonStationary:
      return "non_stationary";
    case RateEstimate::Status::kNoPeak:
      return "no_peak";
  }
  return "unknown";
}

RateEstimate::Status status_from_name(const std::string& name,
                                      std::size_t line_no) {
  if (name == "ok") return RateEstimate::Status::kOk;
  if (name == "non_stationary") return RateEstimate::Status::kNonStationary;
  if (name == "no_peak") return RateEstimate::Status::kNoPeak;
  throw ParseError(line_no, "unknown status '" + name + "'");
}

}  // namespace

void write_stream(const std::string& path, const CsiStream& stream) {
  validate_stream(stream);
  LineWriter w(path, ends_with(path, ".gz"));
  w.line(kStreamMagic);
  w.line(std::string("# fs_hz ") + format_double(stream.fs_hz));
  w.line(std::string("# antennas ") + std::to_string(stream.antennas));
  w.line(std::string("# subcarriers ") + std::to_string(stream.subcarriers));
  w.line(std::string("# carrier_hz ") + format_double(stream.carrier_hz));
  w.line("# columns timestamp_s,antenna,subcarrier,re,im");
  for (const CsiFrame& frame : stream.frames) {
    const std::string ts = format_double(frame.timestamp_s);
    for (int a = 1; a <= stream.antennas; ++a) {
      for (int k = 1; k <= stream.subcarriers; ++k) {
        const std::complex<double> v = frame.at(a, k, stream.subcarriers);
        w.line(ts + "," + std::to_string(a) + "," + std::to_string(k) + "," +
               format_double(v.real()) + "," + format_double(v.imag()));
      }
    }
  }
  w.close();
}

CsiStream read_stream(const std::string& path) {
  LineReader r(path);
  std::string line;
  std::size_t line_no = 0;

  if (!r.next(line, line_no) || line != kStreamMagic)
    throw ParseError(1, "missing stream header tag");

  CsiStream stream;
  bool have_fs = false, have_ant = false, have_sub = false;
  // Header block: '# key value' lines until the first data row.
  std::string pending;
  bool have_pending = false;
  while (r.next(line, line_no)) {
    if (line.empty()) continue;
    if (line[0] != '#') {
      pending = line;
      have_pending = true;
      break;
    }
    std::istringstream hs(line.substr(1));
    std::string key;
    hs >> key;
    std::string value;
    std::getline(hs, value);
    if (!value.empty() && value[0] == ' ') value.erase(0, 1);
    if (key == "fs_hz") {
      stream.fs_hz = parse_number(value, line_no);
      have_fs = true;
    } else if (key == "antennas") {
      stream.antennas = static_cast<int>(parse_int(value, line_no));
      have_ant = true;
    } else if (key == "subcarriers") {
      stream.subcarriers = static_cast<int>(parse_int(value, line_no));
      have_sub = true;
    } else if (key == "carrier_hz") {
      stream.carrier_hz = parse_number(value, line_no);
    }
    // Unknown header keys are ignored for forward compatibility.
  }
  if (!have_fs || !have_ant || !have_sub)
    throw ParseError(line_no, "incomplete header: need fs_hz, antennas, subcarriers");
  if (stream.antennas < 1 || stream.antennas > 64 ||
      stream.subcarriers < 1 || stream.subcarriers > 1024)
    throw ParseError(line_no, "implausible antenna/subcarrier counts");

  const std::size_t per_frame = static_cast<std::size_t>(stream.antennas) *
                                static_cast<std::size_t>(stream.subcarriers);
  CsiFrame frame;
  std::vector<char> seen(per_frame, 0);
  std::size_t filled = 0;
  bool in_frame = false;
  std::size_t frame_start_line = 0;

  auto flush_frame = [&]() {
    if (!in_frame) return;
    if (filled != per_frame)
      throw ParseError(frame_start_line, "incomplete frame: expected " +
                                             std::to_string(per_frame) +
                                             " rows, got " +
                                             std::to_string(filled));
    stream.frames.push_back(frame);
    std::fill(seen.begin(), seen.end(), 0);
    filled = 0;
    in_frame = false;
  };

  while (have_pending || r.next(line, line_no)) {
    if (have_pending) {
      line = pending;
      have_pending = false;
    }
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 5)
      throw ParseError(line_no, "expected 5 fields, got " +
                                    std::to_string(fields.size()));
    double ts = parse_number(fields[0], line_no);
    long a = parse_int(fields[1], line_no);
    long k = parse_int(fields[2], line_no);
    double re = parse_number(fields[3], line_no);
    double im = parse_number(fields[4], line_no);
    if (a < 1 || a > stream.antennas)
      throw ParseError(line_no, "antenna index out of range");
    if (k < 1 || k > stream.subcarriers)
      throw ParseError(line_no, "subcarrier index out of range");

    if (!in_frame || ts != frame.timestamp_s) {
      flush_frame();
      in_frame = true;
      frame_start_line = line_no;
      frame.timestamp_s = ts;
      frame.values.assign(per_frame, {0.0, 0.0});
    }
    std::size_t idx = static_cast<std::size_t>(a - 1) *
                          static_cast<std::size_t>(stream.subcarriers) +
                      static_cast<std::size_t>(k - 1);
    if (seen[idx])
      throw ParseError(line_no, "duplicate antenna/subcarrier row in frame");
    seen[idx] = 1;
    ++filled;
    frame.values[idx] = {re, im};
  }
  flush_frame();

  if (stream.frames.empty()) throw ParseError(line_no, "no data rows");
  validate_stream(stream);
  return stream;
}

std::string truth_path_for(const std::string& stream_path) {
  return stream_path + ".truth.json";
}

void write_ground_truth(const std::string& path, const GroundTruth& truth) {
  json j;
  j["version"] = 1;
  j["fs_hz"] = truth.fs_hz;
  j["has_target"] = truth.has_target;
  j["rate_bpm"] = truth.rate_bpm;
  j["displacement_m"] = truth.displacement_m;
  json stat = json::array();
  for (bool s : truth.stationary) stat.push_back(s ? 1 : 0);
  j["stationary"] = std::move(stat);
  json events = json::array();
  for (const MotionEvent& e : truth.events) {
    events.push_back({{"start_s", e.start_s},
                      {"end_s", e.end_s},
                      {"amplitude_m", e.amplitude_m}});
  }
  j["events"] = std::move(events);
  save_json_file(path, j);
}

GroundTruth read_ground_truth(const std::string& path) {
  json j = load_json_file(path);
  GroundTruth truth;
  try {
    if (j.at("version").get<int>() != 1)
      throw Error("unsupported ground truth version");
    truth.fs_hz = j.at("fs_hz").get<double>();
    truth.has_target = j.at("has_target").get<bool>();
    truth.rate_bpm = j.at("rate_bpm").get<double>();
    truth.displacement_m = j.at("displacement_m").get<std::vector<double>>();
    truth.stationary.clear();
    for (const auto& v : j.at("stationary"))
      truth.stationary.push_back(v.get<int>() != 0);
    for (const auto& e : j.at("events")) {
      MotionEvent ev;
      ev.start_s = e.at("start_s").get<double>();
      ev.end_s = e.at("end_s").get<double>();
      ev.amplitude_m = e.at("amplitude_m").get<double>();
      truth.events.push_back(ev);
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad ground truth file: ") + e.what());
  }
  return truth;
}

std::string estimate_record(const RateEstimate& e) {
  json j;
  j["window_start_s"] = e.window_start_s;
  j["window_end_s"] = e.window_end_s;
  j["status"] = status_name(e.status);
  j["stationary"] = e.stationary;
  if (e.status == RateEstimate::Status::kOk) {
    j["rate_bpm"] = e.rate_bpm;
    j["first_peak_lag"] = e.first_peak_lag;
    j["out_of_band"] = e.out_of_band;
    j["subcarriers"] = e.subcarriers;
  }
  if (e.status != RateEstimate::Status::kNonStationary) {
    json bnr = json::array();
    for (const auto& [id, value] : e.per_subcarrier_bnr)
      bnr.push_back({{"subcarrier", id}, {"bnr", value}});
    j["bnr"] = std::move(bnr);
  }
  return j.dump();
}

void write_estimates(const std::string& path,
                     const std::vector<RateEstimate>& estimates) {
  LineWriter w(path, ends_with(path, ".gz"));
  for (const RateEstimate& e : estimates) w.line(estimate_record(e));
  w.close();
}

namespace {

RateEstimate estimate_from_json(const json& j, std::size_t line_no) {
  RateEstimate e;
  try {
    e.window_start_s = j.at("window_start_s").get<double>();
    e.window_end_s = j.at("window_end_s").get<double>();
    e.status = status_from_name(j.at("status").get<std::string>(), line_no);
    e.stationary = j.at("stationary").get<bool>();
    if (e.status == RateEstimate::Status::kOk) {
      e.rate_bpm = j.at("rate_bpm").get<double>();
      long long lag = j.at("first_peak_lag").get<long long>();
      if (lag < 1) throw ParseError(line_no, "first_peak_lag must be >= 1");
      e.first_peak_lag = static_cast<std::size_t>(lag);
      e.out_of_band = j.at("out_of_band").get<bool>();
      e.subcarriers = j.at("subcarriers").get<std::vector<int>>();
    }
    if (j.contains("bnr")) {
      for (const auto& item : j.at("bnr"))
        e.per_subcarrier_bnr.emplace_back(item.at("subcarrier").get<int>(),
                                          item.at("bnr").get<double>());
    }
  } catch (const json::exception& ex) {
    throw ParseError(line_no, std::string("bad estimate record: ") + ex.what());
  }
  return e;
}

}  // namespace

std::vector<RateEstimate> read_estimates(const std::string& path) {
  LineReader r(path);
  std::vector<RateEstimate> out;
  std::string line;
  std::size_t line_no = 0;
  while (r.next(line, line_no)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    out.push_back(estimate_from_json(j, line_no));
  }
  return out;
}

std::size_t check_estimates_file(const std::string& path) {
  LineReader r(path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  double prev_start = -1e300;
  while (r.next(line, line_no)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    RateEstimate e = estimate_from_json(j, line_no);
    if (!(e.window_end_s > e.window_start_s))
      throw ParseError(line_no, "window_end_s must exceed window_start_s");
    if (e.window_start_s < prev_start)
      throw ParseError(line_no, "windows out of order");
    prev_start = e.window_start_s;
    if (e.status == RateEstimate::Status::kOk) {
      if (!(e.rate_bpm > 0.0))
        throw ParseError(line_no, "rate_bpm must be positive");
      if (e.subcarriers.empty())
        throw ParseError(line_no, "ok record with empty subcarrier set");
    }
    for (const auto& [id, value] : e.per_subcarrier_bnr) {
      if (id < 1) throw ParseError(line_no, "bnr subcarrier index < 1");
      if (!(value >= 0.0 && value <= 1.0))
        throw ParseError(line_no, "bnr outside [0, 1]");
    }
    ++count;
  }
  if (count == 0) throw ParseError(line_no, "empty result file");
  return count;
}

}  // namespace csibreath
