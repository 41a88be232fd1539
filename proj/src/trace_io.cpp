#include "rabibeat/trace_io.hpp"

#include "rabibeat/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rabibeat {

void validate(const SampledTrace& trace) {
  if (trace.times.size() != trace.values.size())
    throw ValidationError("times and values differ in length", "trace");
  if (trace.times.size() < 2) throw ValidationError("trace needs at least 2 samples", "trace");
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (!std::isfinite(trace.times[i]) || !std::isfinite(trace.values[i]))
      throw ValidationError("non-finite sample at index " + std::to_string(i), "trace");
    if (i > 0 && !(trace.times[i] > trace.times[i - 1]))
      throw ValidationError("times must be strictly increasing (index " + std::to_string(i) + ")", "trace");
  }
}

std::optional<double> uniform_step(const std::vector<double>& times) {
  if (times.size() < 2) return std::nullopt;
  const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs((times[i] - times[i - 1]) - step) > 1e-6 * step) return std::nullopt;
  return step;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || first == last)
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void write_columns(std::ostream& os, const char* header, const char* columns, const std::vector<double>& a,
                   const std::vector<double>& b) {
  os << header << '\n' << columns << '\n';
  for (std::size_t i = 0; i < a.size(); ++i) os << format_number(a[i]) << ',' << format_number(b[i]) << '\n';
}

}  // namespace

void write_trace_csv(const SampledTrace& trace, std::ostream& os) {
  validate(trace);
  write_columns(os, kTraceHeader, "time_us,signal", trace.times, trace.values);
}

SampledTrace read_trace_csv(std::istream& is, const std::string& source) {
  SampledTrace trace;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(is, line)) throw ParseError(source, 1, "empty file");
  ++lineno;
  if (strip_cr(line) != kTraceHeader)
    throw ParseError(source, lineno, std::string("expected header '") + kTraceHeader + "'");
  if (!std::getline(is, line) || strip_cr(line) != "time_us,signal")
    throw ParseError(source, lineno + 1, "expected column header 'time_us,signal'");
  ++lineno;

  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError(source, lineno, "expected two comma-separated fields");
    try {
      trace.times.push_back(parse_number(line.substr(0, comma)));
      trace.values.push_back(parse_number(line.substr(comma + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
    if (trace.times.size() > 1 && !(trace.times.back() > trace.times[trace.times.size() - 2]))
      throw ParseError(source, lineno, "time_us must be strictly increasing");
  }
  if (trace.times.size() < 2) throw ParseError(source, lineno, "trace needs at least 2 samples");
  return trace;
}

nlohmann::ordered_json meta_to_json(const TraceMeta& meta) {
  nlohmann::ordered_json j;
  j["units"] = {{"time", "us"}, {"frequency", "MHz"}, {"signal", "dimensionless"}};

  nlohmann::ordered_json drive;
  drive["kind"] = meta.drive_kind.empty() ? "unknown" : meta.drive_kind;
  if (meta.drive_kind == "two-level") {
    drive["omega0_MHz"] = meta.omega0;
    drive["amplitude_mode"] = meta.amplitude_mode;
  } else if (meta.drive_kind == "vtype") {
    drive["lambda_MHz"] = meta.lambda;
  }
  drive["detunings_MHz"] = meta.detunings;
  drive["weights"] = meta.weights;
  j["drive"] = drive;

  nlohmann::ordered_json decay;
  decay["kind"] = meta.decay_kind;
  if (meta.decay_kind == "exponential") decay["t1_rho_us"] = meta.t1_rho;
  j["decay"] = decay;

  nlohmann::ordered_json prov;
  prov["generator"] = "rabibeat";
  prov["format"] = "rabibeat-trace v1";
  prov["experiment"] = meta.experiment;
  if (!meta.preset.empty()) prov["preset"] = meta.preset;
  if (meta.seed) prov["seed"] = *meta.seed;
  prov["labels"] = meta.labels;
  j["provenance"] = prov;
  return j;
}

TraceMeta meta_from_json(const nlohmann::json& j) {
  TraceMeta m;
  try {
    const auto& drive = j.at("drive");
    m.drive_kind = drive.value("kind", std::string("unknown"));
    m.omega0 = drive.value("omega0_MHz", 0.0);
    m.lambda = drive.value("lambda_MHz", 0.0);
    m.amplitude_mode = drive.value("amplitude_mode", std::string());
    m.detunings = drive.value("detunings_MHz", std::vector<double>{});
    m.weights = drive.value("weights", std::vector<double>{});
    const auto& decay = j.at("decay");
    m.decay_kind = decay.value("kind", std::string("none"));
    m.t1_rho = decay.value("t1_rho_us", 0.0);
    const auto& prov = j.at("provenance");
    m.experiment = prov.value("experiment", std::string());
    m.preset = prov.value("preset", std::string());
    if (prov.contains("seed")) m.seed = prov.at("seed").get<std::uint64_t>();
    m.labels = prov.value("labels", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed trace metadata: ") + e.what(), "metadata");
  }
  return m;
}

void write_spectrum_csv(const Spectrum& s, std::ostream& os) {
  write_columns(os, kSpectrumHeader, "freq_MHz,magnitude", s.freqs, s.magnitudes);
}

void write_esr_csv(const EsrLineshape& s, std::ostream& os) {
  write_columns(os, kEsrHeader, "freq_MHz,signal", s.freqs, s.signal);
}

SampledTrace load_trace(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open trace file " + csv.string());
  SampledTrace trace = read_trace_csv(in, csv.string());

  auto sidecar = csv;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    std::ifstream js(sidecar);
    nlohmann::json j;
    try {
      js >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(sidecar.string(), 1, e.what());
    }
    trace.meta = meta_from_json(j);
  }
  return trace;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void save_trace(const SampledTrace& trace, const std::filesystem::path& dir, const std::string& stem) {
  std::ostringstream csv;
  write_trace_csv(trace, csv);
  write_text_file(dir / (stem + ".csv"), csv.str());
  write_text_file(dir / (stem + ".json"), meta_to_json(trace.meta).dump(2) + "\n");
}

}  // namespace rabibeat
