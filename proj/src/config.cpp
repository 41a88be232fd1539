#include "rabibeat/config.hpp"

#include "rabibeat/errors.hpp"
#include "rabibeat/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rabibeat {

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::rabi_single: return "rabi-single";
    case ExperimentKind::rabi_vtype: return "rabi-vtype";
    case ExperimentKind::esr: return "esr";
    case ExperimentKind::drift: return "drift";
    case ExperimentKind::imaging_demo: return "imaging-demo";
    case ExperimentKind::analyze: return "analyze";
  }
  return "?";
}

TimeGrid GridSpec::make() const {
  if (!(t_end_us > t_start_us)) throw ValidationError("must exceed grid.t_start_us", "grid.t_end_us");
  if (n_points != 0) return TimeGrid::uniform(t_start_us, t_end_us, n_points);
  return TimeGrid::stepped(t_start_us, t_end_us, dt_us);
}

const std::vector<SchemaEntry>& config_schema() {
  static const std::vector<SchemaEntry> schema = {
      {"experiment.kind", "enum", "rabi-single|rabi-vtype|esr|drift|imaging-demo|analyze", "experiment to run (required)"},
      {"experiment.name", "string", "", "free-form label copied into provenance"},
      {"run.seed", "u64", "", "random seed; mandatory for drift runs unless --seed is given"},
      {"nv.D_MHz", "number", "", "zero-field splitting D (default 2870)"},
      {"nv.E_MHz", "number", "", "strain splitting E (default 0)"},
      {"nv.gamma_MHz_per_G", "number", "", "effective gyromagnetic ratio (default 2.8)"},
      {"nv.B_axial_G", "number", "", "axial DC field (default 0)"},
      {"nv.A_hf_MHz", "number", "", "14N hyperfine splitting (default 2.18)"},
      {"drive.omega0_MHz", "number", "", "resonant two-level Rabi frequency (default 22.2)"},
      {"drive.lambda_MHz", "number", "", "V-system coupling lambda"},
      {"drive.base_MHz", "number", "", "V-system base oscillation 2 sqrt(2) lambda; alternative to lambda"},
      {"drive.carrier_MHz", "number", "", "microwave carrier, used for the RWA check"},
      {"drive.Delta_MHz", "number", "", "carrier detuning from the V midpoint (rabi-vtype needs 0)"},
      {"drive.amplitude_mode", "enum", "exact|equal_cosine", "two-level component amplitudes"},
      {"manifolds.detunings_MHz", "list", "", "per-manifold detunings / half-splittings (default 0, A, 2A)"},
      {"manifolds.weights", "list", "", "manifold weights summing to 1 (default equal)"},
      {"decay.kind", "enum", "none|exponential", "Rabi envelope model"},
      {"decay.t1_rho_us", "number", "", "envelope decay time"},
      {"grid.t_start_us", "number", "", "first sample time"},
      {"grid.t_end_us", "number", "", "last sample time"},
      {"grid.dt_us", "number", "", "sample spacing"},
      {"grid.n_points", "count", "", "number of samples; overrides dt"},
      {"drift.trajectory", "knots", "", "wall-clock hours:relative power pairs, e.g. 0:1, 24:1.002"},
      {"drift.jitter_sigma", "number", "", "relative Gaussian power jitter per sweep"},
      {"drift.sweeps", "count", "", "number of averaged acquisitions"},
      {"drift.duration_h", "number", "", "wall-clock span of the acquisition"},
      {"drift.threads", "count", "", "worker threads for the average (result independent of it)"},
      {"analysis.mode", "enum", "single|vtype", "beat-to-detuning inversion"},
      {"analysis.window", "enum", "hann|rectangular", "FFT window"},
      {"analysis.zero_pad", "count", "", "zero-padding factor"},
      {"analysis.input_trace", "string", "", "trace CSV to analyze (relative to this file)"},
      {"analysis.input_preset", "string", "", "simulate this preset in memory and analyze it"},
      {"esr.transitions_MHz", "list", "", "dip positions"},
      {"esr.contrasts", "list", "", "dip contrasts in (0,1); a single value applies to all"},
      {"esr.fwhm_MHz", "number", "", "Lorentzian full width (default 0.8)"},
      {"esr.f_start_MHz", "number", "", "frequency axis start"},
      {"esr.f_end_MHz", "number", "", "frequency axis end"},
      {"esr.n_points", "count", "", "frequency axis points"},
      {"imaging.gap_um", "number", "", "waveguide gap G"},
      {"imaging.center_width_um", "number", "", "centre conductor width"},
      {"imaging.drive_scale_MHz", "number", "", "resonant Rabi frequency at the gap midpoint"},
      {"imaging.cutoff_um", "number", "", "edge-singularity cutoff"},
      {"imaging.branch", "enum", "left|right", "monotone half of the gap used for inversion"},
      {"imaging.map_points", "count", "", "field map nodes across the gap"},
      {"imaging.emitter_x_um", "number", "", "true emitter position, x axis"},
      {"imaging.emitter_y_um", "number", "", "true emitter position, y axis (enables two-axis demo)"},
      {"imaging.map_file", "string", "", "measured field map CSV instead of the analytic model"},
      {"imaging.budget_t1_us", "number", "", "T1 for the limiting-resolution budget"},
      {"imaging.budget_rabi_MHz", "number", "", "Rabi frequency for the limiting-resolution budget"},
      {"imaging.budget_n", "number", "", "oscillation count for the G/N budget line"},
  };
  return schema;
}

std::string schema_text() {
  std::ostringstream os;
  os << "# rabibeat config schema v1\n";
  for (const auto& e : config_schema()) {
    os << e.key << " : " << e.type;
    if (!e.choices.empty()) os << " {" << e.choices << "}";
    os << "  -- " << e.help << '\n';
  }
  return os.str();
}

namespace {

const SchemaEntry* find_entry(const std::string& key) {
  const auto& s = config_schema();
  const auto it = std::find_if(s.begin(), s.end(), [&](const SchemaEntry& e) { return e.key == key; });
  return it == s.end() ? nullptr : &*it;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

// Typed accessors over a document; every error names the key.
class Reader {
 public:
  explicit Reader(const ConfigDocument& d) : doc_(d) {}

  bool has(const std::string& key) const { return doc_.get(key).has_value(); }

  double number(const std::string& key, double def) const {
    const auto v = doc_.get(key);
    if (!v) return def;
    try {
      const double x = parse_number(*v);
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite");
      return x;
    } catch (const std::invalid_argument&) {
      throw ValidationError("expected a number, got '" + *v + "'", key);
    }
  }

  double positive(const std::string& key, double def) const {
    const double x = number(key, def);
    if (!(x > 0.0)) throw ValidationError("must be positive", key);
    return x;
  }

  std::size_t count(const std::string& key, std::size_t def) const {
    const auto v = doc_.get(key);
    if (!v) return def;
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
      if (v->empty() || (*v)[0] == '-') throw std::invalid_argument("negative");
      x = std::stoull(*v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v->size()) throw ValidationError("expected a non-negative integer, got '" + *v + "'", key);
    return static_cast<std::size_t>(x);
  }

  std::string text(const std::string& key, const std::string& def) const { return doc_.get(key).value_or(def); }

  std::string choice(const std::string& key, const std::string& def) const {
    const std::string v = text(key, def);
    const SchemaEntry* e = find_entry(key);
    const auto options = split(e->choices, '|');
    if (std::find(options.begin(), options.end(), v) == options.end())
      throw ValidationError("expected one of {" + e->choices + "}, got '" + v + "'", key);
    return v;
  }

  std::vector<double> list(const std::string& key) const {
    const auto v = doc_.get(key);
    std::vector<double> out;
    if (!v || trim(*v).empty()) return out;
    for (const auto& item : split(*v, ',')) {
      try {
        out.push_back(parse_number(item));
      } catch (const std::invalid_argument&) {
        throw ValidationError("expected a comma-separated list of numbers, bad item '" + item + "'", key);
      }
    }
    return out;
  }

  std::vector<DriftKnot> knots(const std::string& key) const {
    const auto v = doc_.get(key);
    std::vector<DriftKnot> out;
    if (!v || trim(*v).empty()) return out;
    for (const auto& item : split(*v, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ValidationError("expected hours:power pairs, bad item '" + item + "'", key);
      try {
        out.push_back({parse_number(trim(item.substr(0, colon))), parse_number(trim(item.substr(colon + 1)))});
      } catch (const std::invalid_argument&) {
        throw ValidationError("expected hours:power pairs, bad item '" + item + "'", key);
      }
    }
    return out;
  }

 private:
  const ConfigDocument& doc_;
};

ExperimentKind kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::rabi_single, ExperimentKind::rabi_vtype, ExperimentKind::esr, ExperimentKind::drift,
                 ExperimentKind::imaging_demo, ExperimentKind::analyze})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown experiment kind '" + s + "'", "experiment.kind");
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  doc.source_ = source;
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError(source, lineno, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ParseError(source, lineno, "empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
    if (section.empty()) throw ParseError(source, lineno, "key outside of any [section]");
    const std::string key = section + "." + trim(t.substr(0, eq));
    if (doc.entries_.count(key)) throw ParseError(source, lineno, "duplicate key '" + key + "'");
    if (!find_entry(key)) throw ParseError(source, lineno, "unknown key '" + key + "'");
    doc.entries_[key] = trim(t.substr(eq + 1));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path_or_preset) {
  const std::filesystem::path p(path_or_preset);
  if (std::filesystem::is_regular_file(p)) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open config " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    ConfigDocument doc = parse(ss.str(), p.string());
    doc.base_dir_ = std::filesystem::absolute(p).parent_path();
    return doc;
  }
  if (const auto text = preset_text(path_or_preset)) {
    ConfigDocument doc = parse(*text, "preset:" + path_or_preset);
    doc.base_dir_ = std::filesystem::current_path();
    return doc;
  }
  throw IoError("no config file or bundled preset named '" + path_or_preset + "'");
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
  if (!find_entry(key)) throw ValidationError("unknown key", key);
  entries_[key] = trim(value);
}

std::optional<std::string> ConfigDocument::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

RunConfig resolve(const ConfigDocument& doc) {
  const Reader r(doc);
  RunConfig c;

  if (!r.has("experiment.kind")) throw ValidationError("required", "experiment.kind");
  c.kind = kind_from_string(r.choice("experiment.kind", ""));
  c.name = r.text("experiment.name", "");
  if (r.has("run.seed")) {
    const auto v = *doc.get("run.seed");
    try {
      std::size_t pos = 0;
      if (v.empty() || v[0] == '-') throw std::invalid_argument("negative");
      c.seed = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("expected an unsigned 64-bit integer, got '" + v + "'", "run.seed");
    }
  }

  c.nv.D = r.number("nv.D_MHz", c.nv.D);
  c.nv.E = r.number("nv.E_MHz", c.nv.E);
  c.nv.gamma_e = r.number("nv.gamma_MHz_per_G", c.nv.gamma_e);
  c.nv.B_axial = r.number("nv.B_axial_G", c.nv.B_axial);
  c.nv.A_hf = r.number("nv.A_hf_MHz", c.nv.A_hf);
  for (auto& w : validate(c.nv)) c.warnings.push_back(std::move(w));

  c.omega0_MHz = r.positive("drive.omega0_MHz", c.omega0_MHz);
  c.carrier_MHz = r.number("drive.carrier_MHz", 0.0);
  c.Delta_MHz = r.number("drive.Delta_MHz", 0.0);
  c.amplitude_mode =
      r.choice("drive.amplitude_mode", "exact") == "exact" ? AmplitudeMode::exact : AmplitudeMode::equal_cosine;
  if (r.has("drive.lambda_MHz") && r.has("drive.base_MHz"))
    throw ValidationError("give either drive.lambda_MHz or drive.base_MHz, not both", "drive.base_MHz");
  if (r.has("drive.lambda_MHz")) c.lambda_MHz = r.positive("drive.lambda_MHz", 0.0);
  if (r.has("drive.base_MHz")) c.lambda_MHz = r.positive("drive.base_MHz", 0.0) / (2.0 * std::sqrt(2.0));

  c.manifolds.detunings = r.list("manifolds.detunings_MHz");
  if (c.manifolds.detunings.empty()) c.manifolds.detunings = ManifoldSpec::hyperfine_triplet(c.nv.A_hf).detunings;
  c.manifolds.weights = r.list("manifolds.weights");
  if (c.manifolds.weights.empty()) c.manifolds = ManifoldSpec::equal(c.manifolds.detunings);
  validate(c.manifolds);

  const std::string decay = r.choice("decay.kind", r.has("decay.t1_rho_us") ? "exponential" : "none");
  if (decay == "exponential") {
    if (!r.has("decay.t1_rho_us")) throw ValidationError("required for exponential decay", "decay.t1_rho_us");
    c.decay = DecayModel::exponential(r.positive("decay.t1_rho_us", 0.0));
  }

  c.grid.t_start_us = r.number("grid.t_start_us", c.grid.t_start_us);
  c.grid.t_end_us = r.number("grid.t_end_us", c.grid.t_end_us);
  c.grid.dt_us = r.number("grid.dt_us", c.grid.dt_us);
  c.grid.n_points = r.count("grid.n_points", 0);
  if (!(c.grid.t_end_us > c.grid.t_start_us))
    throw ValidationError("must exceed grid.t_start_us (zero or negative duration)", "grid.t_end_us");
  if (c.grid.n_points == 0 && !(c.grid.dt_us > 0.0)) throw ValidationError("must be positive", "grid.dt_us");
  if (r.has("grid.n_points") && c.grid.n_points < 2) throw ValidationError("need at least 2 points", "grid.n_points");

  c.drift.trajectory = r.knots("drift.trajectory");
  c.drift.jitter_sigma = r.number("drift.jitter_sigma", 0.0);
  validate(c.drift);
  c.drift_sweeps = r.count("drift.sweeps", 1);
  if (c.drift_sweeps == 0) throw ValidationError("must be at least 1", "drift.sweeps");
  c.drift_duration_h = r.number("drift.duration_h", 24.0);
  if (c.drift_duration_h < 0.0) throw ValidationError("must be non-negative", "drift.duration_h");
  c.drift_threads = static_cast<unsigned>(std::max<std::size_t>(1, r.count("drift.threads", 1)));

  c.analysis_mode = beat_mode_from_string(r.choice("analysis.mode", "single"));
  c.spectrum.window = r.choice("analysis.window", "hann") == "hann" ? Window::hann : Window::rectangular;
  c.spectrum.zero_pad = r.count("analysis.zero_pad", 4);
  if (c.spectrum.zero_pad == 0) throw ValidationError("must be at least 1", "analysis.zero_pad");
  c.input_trace = r.text("analysis.input_trace", "");
  if (!c.input_trace.empty() && std::filesystem::path(c.input_trace).is_relative() && !doc.base_dir().empty())
    c.input_trace = (doc.base_dir() / c.input_trace).string();
  c.input_preset = r.text("analysis.input_preset", "");

  c.esr_transitions = r.list("esr.transitions_MHz");
  c.esr_contrasts = r.list("esr.contrasts");
  if (c.esr_contrasts.size() == 1 && c.esr_transitions.size() > 1)
    c.esr_contrasts.assign(c.esr_transitions.size(), c.esr_contrasts.front());
  c.esr_fwhm_MHz = r.positive("esr.fwhm_MHz", c.esr_fwhm_MHz);
  c.esr_f_start_MHz = r.number("esr.f_start_MHz", c.esr_f_start_MHz);
  c.esr_f_end_MHz = r.number("esr.f_end_MHz", c.esr_f_end_MHz);
  c.esr_points = r.count("esr.n_points", c.esr_points);

  c.geometry.gap_um = r.positive("imaging.gap_um", c.geometry.gap_um);
  c.geometry.center_width_um = r.positive("imaging.center_width_um", c.geometry.center_width_um);
  c.geometry.drive_scale_MHz = r.positive("imaging.drive_scale_MHz", c.geometry.drive_scale_MHz);
  c.geometry.cutoff_um = r.positive("imaging.cutoff_um", c.geometry.cutoff_um);
  c.branch = r.choice("imaging.branch", "left") == "left" ? Branch::left : Branch::right;
  c.map_points = r.count("imaging.map_points", c.map_points);
  c.emitter_x_um = r.number("imaging.emitter_x_um", c.emitter_x_um);
  if (r.has("imaging.emitter_y_um")) c.emitter_y_um = r.number("imaging.emitter_y_um", 0.0);
  c.map_file = r.text("imaging.map_file", "");
  if (!c.map_file.empty() && std::filesystem::path(c.map_file).is_relative() && !doc.base_dir().empty())
    c.map_file = (doc.base_dir() / c.map_file).string();
  c.budget_t1_us = r.positive("imaging.budget_t1_us", c.budget_t1_us);
  c.budget_rabi_MHz = r.positive("imaging.budget_rabi_MHz", c.budget_rabi_MHz);
  c.budget_n = r.positive("imaging.budget_n", c.budget_n);

  // Kind-specific requirements.
  switch (c.kind) {
    case ExperimentKind::rabi_vtype: {
      if (!(c.lambda_MHz > 0.0))
        throw ValidationError("required for rabi-vtype (or give drive.base_MHz)", "drive.lambda_MHz");
      if (c.Delta_MHz != 0.0)
        throw ValidationError("rabi-vtype traces use the Delta = 0 closed form; Delta must be 0", "drive.Delta_MHz");
      DriveParams d{c.lambda_MHz, c.carrier_MHz, c.Delta_MHz, 0.0};
      for (auto& w : validate(d)) c.warnings.push_back(std::move(w));
      for (double delta : c.manifolds.detunings)
        if (auto w = small_detuning_warning(2.0 * std::sqrt(2.0) * c.lambda_MHz, delta)) c.warnings.push_back(*w);
      break;
    }
    case ExperimentKind::rabi_single:
    case ExperimentKind::drift:
      for (double delta : c.manifolds.detunings)
        if (auto w = small_detuning_warning(c.omega0_MHz, delta)) c.warnings.push_back(*w);
      break;
    case ExperimentKind::analyze:
      if (c.input_trace.empty() && c.input_preset.empty())
        throw ValidationError("analyze needs analysis.input_trace or analysis.input_preset", "analysis.input_trace");
      break;
    case ExperimentKind::esr:
      if (c.esr_transitions.size() != c.esr_contrasts.size())
        throw ValidationError("needs one contrast per transition (or a single shared value)", "esr.contrasts");
      for (double x : c.esr_contrasts)
        if (!(x > 0.0 && x < 1.0)) throw ValidationError("contrasts must lie in (0, 1)", "esr.contrasts");
      if (!(c.esr_f_end_MHz > c.esr_f_start_MHz)) throw ValidationError("must exceed esr.f_start_MHz", "esr.f_end_MHz");
      if (c.esr_points < 2) throw ValidationError("need at least 2 points", "esr.n_points");
      break;
    case ExperimentKind::imaging_demo:
      validate(c.geometry);
      break;
  }
  return c;
}

}  // namespace rabibeat
