#include "rabibeat/runner.hpp"

#include "rabibeat/errors.hpp"
#include "rabibeat/esr.hpp"
#include "rabibeat/evolve.hpp"
#include "rabibeat/imaging.hpp"
#include "rabibeat/signal.hpp"
#include "rabibeat/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rabibeat {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::analyze: return "analyze";
    case Command::esr: return "esr";
    case Command::imaging_demo: return "imaging-demo";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  for (auto c : {Command::simulate, Command::analyze, Command::esr, Command::imaging_demo})
    if (s == to_string(c)) return c;
  throw ValidationError("unknown command '" + s + "'", "command");
}

bool command_accepts(Command c, ExperimentKind k) {
  switch (c) {
    case Command::simulate:
      return k == ExperimentKind::rabi_single || k == ExperimentKind::rabi_vtype || k == ExperimentKind::drift;
    case Command::analyze: return k == ExperimentKind::analyze;
    case Command::esr: return k == ExperimentKind::esr;
    case Command::imaging_demo: return k == ExperimentKind::imaging_demo;
  }
  return false;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::string json_text(const ojson& j) { return j.dump(2) + "\n"; }

std::string gnuplot_stub(const std::string& data, const std::string& xlabel, const std::string& ylabel,
                         const std::string& title) {
  std::ostringstream os;
  os << "# gnuplot script; run: gnuplot -p " << "<this file>\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel '" << xlabel << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "set title '" << title << "'\n"
     << "plot '" << data << "' using 1:2 with lines notitle\n";
  return os.str();
}

TraceMeta base_meta(const RunConfig& cfg) {
  TraceMeta m;
  m.experiment = to_string(cfg.kind);
  m.detunings = cfg.manifolds.detunings;
  m.weights = cfg.manifolds.weights;
  if (cfg.decay.kind == DecayModel::Kind::exponential) {
    m.decay_kind = "exponential";
    m.t1_rho = cfg.decay.t1_rho;
  }
  m.preset = cfg.name;
  for (const auto& w : cfg.warnings) m.labels.push_back("warning: " + w);
  return m;
}

std::uint64_t require_seed(const RunConfig& cfg, std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  if (cfg.seed) return *cfg.seed;
  throw ValidationError("required for stochastic (drift) runs; set run.seed or pass --seed", "run.seed");
}

TraceGenerator two_level_generator(const RunConfig& cfg, const TimeGrid& grid) {
  return [&cfg, grid](double scale) {
    return rabi_trace_incoherent(cfg.omega0_MHz * scale, cfg.manifolds, grid, cfg.decay, cfg.amplitude_mode);
  };
}

AcquisitionSchedule schedule_for(const RunConfig& cfg, std::uint64_t seed) {
  AcquisitionSchedule acq;
  acq.n_sweeps = cfg.drift_sweeps;
  acq.duration_h = cfg.drift_duration_h;
  acq.seed = seed;
  acq.threads = cfg.drift_threads;
  return acq;
}

ojson peaks_json(const PeakSet& peaks) {
  ojson a = ojson::array();
  for (const auto& p : peaks) a.push_back({{"frequency_MHz", p.frequency}, {"magnitude", p.magnitude}});
  return a;
}

ojson drift_summary(const RunConfig& cfg, std::uint64_t seed, const SampledTrace& averaged) {
  const auto power = drift_power_samples(cfg.drift, schedule_for(cfg, seed));
  const double n = static_cast<double>(power.size());
  const double mean = std::accumulate(power.begin(), power.end(), 0.0) / n;
  double var = 0.0;
  for (double p : power) var += (p - mean) * (p - mean);
  const double sd = power.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;

  const double p_start = cfg.drift.rel_power_at(0.0);
  const double p_end = cfg.drift.rel_power_at(cfg.drift_duration_h);
  const double dp = p_end / p_start - 1.0;

  ojson j;
  j["format"] = "rabibeat-drift v1";
  j["seed"] = seed;
  j["sweeps"] = cfg.drift_sweeps;
  j["duration_h"] = cfg.drift_duration_h;
  j["jitter_sigma"] = cfg.drift.jitter_sigma;
  j["power_samples"] = {{"mean", mean},
                        {"std", sd},
                        {"min", *std::min_element(power.begin(), power.end())},
                        {"max", *std::max_element(power.begin(), power.end())}};
  j["trajectory_rel_power_change"] = dp;
  if (std::abs(dp) < 1.0) {
    j["rel_period_change_linear"] = drift_relation(dp);
    j["rel_period_change_exact"] = drift_relation_exact(dp);
  }
  const double f_ref = cfg.omega0_MHz * std::sqrt(mean);
  const auto decay = envelope_decay_time(averaged, f_ref);
  j["reference_frequency_MHz"] = f_ref;
  if (decay)
    j["envelope_decay_us"] = *decay;
  else
    j["envelope_decay_us"] = nullptr;
  return j;
}

RunResult cmd_simulate(const RunConfig& cfg, const fs::path& out, std::optional<std::uint64_t> seed) {
  RunResult r;
  const SampledTrace trace = simulate_trace(cfg, seed);
  save_trace(trace, out, "trace");
  r.files = {out / "trace.csv", out / "trace.json"};
  write_text_file(out / "plot_trace.gp", gnuplot_stub("trace.csv", "time (us)", "signal", cfg.name));
  r.files.push_back(out / "plot_trace.gp");

  r.summary["command"] = "simulate";
  r.summary["experiment"] = to_string(cfg.kind);
  r.summary["samples"] = trace.size();
  r.summary["duration_us"] = trace.duration();
  if (cfg.kind == ExperimentKind::drift) {
    const std::uint64_t s = require_seed(cfg, seed);
    const ojson d = drift_summary(cfg, s, trace);
    write_text_file(out / "drift.json", json_text(d));
    r.files.push_back(out / "drift.json");
    r.summary["seed"] = s;
    r.summary["envelope_decay_us"] = d["envelope_decay_us"];
  }
  r.summary["warnings"] = cfg.warnings;
  return r;
}

SampledTrace analysis_input(const RunConfig& cfg, std::string& source) {
  if (!cfg.input_trace.empty()) {
    source = cfg.input_trace;
    return load_trace(cfg.input_trace);
  }
  const auto text = preset_text(cfg.input_preset);
  if (!text) throw ValidationError("unknown preset '" + cfg.input_preset + "'", "analysis.input_preset");
  const RunConfig inner = resolve(ConfigDocument::parse(*text, "preset:" + cfg.input_preset));
  if (!command_accepts(Command::simulate, inner.kind))
    throw ValidationError("preset '" + cfg.input_preset + "' does not produce a trace", "analysis.input_preset");
  source = "preset:" + cfg.input_preset;
  return simulate_trace(inner);
}

RunResult cmd_analyze(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  std::string source;
  const SampledTrace trace = analysis_input(cfg, source);
  const ojson report = analysis_report(trace, cfg.analysis_mode, cfg.spectrum, source);
  write_text_file(out / "report.json", json_text(report));

  std::ostringstream csv;
  write_spectrum_csv(fft_spectrum(trace, cfg.spectrum), csv);
  write_text_file(out / "spectrum.csv", csv.str());
  write_text_file(out / "plot_spectrum.gp", gnuplot_stub("spectrum.csv", "frequency (MHz)", "|FFT|", cfg.name));
  r.files = {out / "report.json", out / "spectrum.csv", out / "plot_spectrum.gp"};

  r.summary["command"] = "analyze";
  r.summary["source"] = source;
  r.summary["base_frequency_MHz"] = report["base_frequency_MHz"];
  r.summary["beat_frequencies_MHz"] = report["beat_frequencies_MHz"];
  r.summary["recovered_detunings_MHz"] = report["recovered_detunings_MHz"];
  return r;
}

RunResult cmd_esr(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  std::vector<double> grid(cfg.esr_points);
  const double step = (cfg.esr_f_end_MHz - cfg.esr_f_start_MHz) / static_cast<double>(cfg.esr_points - 1);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = i + 1 == grid.size() ? cfg.esr_f_end_MHz : cfg.esr_f_start_MHz + step * static_cast<double>(i);
  const EsrLineshape s = synthesize_esr(cfg.esr_transitions, cfg.esr_contrasts, cfg.esr_fwhm_MHz, grid);

  std::ostringstream csv;
  write_esr_csv(s, csv);
  write_text_file(out / "esr.csv", csv.str());

  ojson j;
  j["format"] = "rabibeat-esr-report v1";
  j["transitions_MHz"] = cfg.esr_transitions;
  j["contrasts"] = cfg.esr_contrasts;
  j["fwhm_MHz"] = cfg.esr_fwhm_MHz;
  ojson dips = ojson::array();
  for (const auto& d : find_dips(s)) dips.push_back({{"frequency_MHz", d.frequency}, {"depth", d.depth}});
  j["dips"] = dips;
  write_text_file(out / "esr.json", json_text(j));
  write_text_file(out / "plot_esr.gp", gnuplot_stub("esr.csv", "detuning (MHz)", "fluorescence", cfg.name));
  r.files = {out / "esr.csv", out / "esr.json", out / "plot_esr.gp"};

  r.summary["command"] = "esr";
  r.summary["dips"] = dips;
  return r;
}

// Forward-simulates one axis, measures the emitter's Rabi frequency from its
// trace and inverts it through the map.
ojson localize_axis(const RunConfig& cfg, const FieldMap& map, bool analytic, double x_true, const char* axis,
                    SampledTrace* trace_out) {
  if (x_true < map.region_lo || x_true > map.region_hi) {
    std::ostringstream os;
    os << axis << " axis: emitter at " << x_true << " um is outside the " << (cfg.branch == Branch::left ? "left" : "right")
       << " branch [" << map.region_lo << ", " << map.region_hi << "] um";
    throw RangeError(os.str());
  }
  const double rabi_true = analytic ? cfg.geometry.drive_scale_MHz * field_profile(cfg.geometry, x_true)
                                    : rabi_at(map, x_true);
  const TimeGrid grid = cfg.grid.make();
  SampledTrace trace = rabi_trace_incoherent(rabi_true, ManifoldSpec::equal({0.0}), grid, cfg.decay);
  TraceMeta meta = base_meta(cfg);
  meta.drive_kind = "two-level";
  meta.omega0 = rabi_true;
  meta.amplitude_mode = "exact";
  meta.detunings = {0.0};
  meta.weights = {1.0};
  meta.labels.push_back(std::string("emitter ") + axis + " axis");
  trace.meta = meta;

  const Spectrum spec = fft_spectrum(trace);
  const PeakSet peaks = find_peaks(spec, PeakOptions{0.5, 0.0, 2.0 * spec.bin_width, -1.0, true});
  if (peaks.empty()) throw RangeError(std::string(axis) + " axis: no Rabi oscillation found in the emitter trace");
  const auto top = std::max_element(peaks.begin(), peaks.end(),
                                    [](const Peak& a, const Peak& b) { return a.magnitude < b.magnitude; });
  const double measured = fit_tone_frequency(trace, top->frequency);

  const double t1 = cfg.decay.kind == DecayModel::Kind::exponential ? cfg.decay.t1_rho : trace.duration();
  const ResolutionBudget budget = resolution_budget(cfg.geometry.gap_um, t1, measured);
  const double resolvable = resolution_estimate(measured, budget.n_osc).delta_cyclic;
  Localization loc;
  try {
    loc = position_from_rabi(measured, map, resolvable);
  } catch (const RangeError& e) {
    throw RangeError(std::string(axis) + " axis: " + e.what());
  }

  const double error_nm = std::abs(loc.x_um - x_true) * 1000.0;
  if (trace_out) *trace_out = std::move(trace);
  ojson j;
  j["true_um"] = x_true;
  j["true_rabi_MHz"] = rabi_true;
  j["measured_rabi_MHz"] = measured;
  j["recovered_um"] = loc.x_um;
  j["error_nm"] = error_nm;
  j["budget_delta_x_nm"] = budget.delta_x_nm;
  j["within_budget"] = error_nm <= budget.delta_x_nm;
  j["frequency_resolution_MHz"] = resolvable;
  j["position_uncertainty_um"] = loc.uncertainty_um;
  return j;
}

RunResult cmd_imaging_demo(const RunConfig& cfg, const fs::path& out) {
  RunResult r;
  const bool analytic = cfg.map_file.empty();
  FieldMap map = analytic ? make_field_map(cfg.geometry, cfg.map_points, cfg.branch) : load_field_map(cfg.map_file);

  std::ostringstream csv;
  write_field_map_csv(map, csv);
  write_text_file(out / "fieldmap.csv", csv.str());

  ojson j;
  j["format"] = "rabibeat-imaging v1";
  j["model"] = map.model;
  j["geometry"] = {{"gap_um", cfg.geometry.gap_um},
                   {"center_width_um", cfg.geometry.center_width_um},
                   {"drive_scale_MHz", cfg.geometry.drive_scale_MHz},
                   {"cutoff_um", cfg.geometry.cutoff_um}};
  j["branch"] = {{"side", cfg.branch == Branch::left ? "left" : "right"},
                 {"region_um", {map.region_lo, map.region_hi}}};

  SampledTrace trace_x;
  j["x"] = localize_axis(cfg, map, analytic, cfg.emitter_x_um, "x", &trace_x);
  if (cfg.emitter_y_um) j["y"] = localize_axis(cfg, map, analytic, *cfg.emitter_y_um, "y", nullptr);
  save_trace(trace_x, out, "emitter_trace");

  const double t1 = cfg.decay.kind == DecayModel::Kind::exponential ? cfg.decay.t1_rho : trace_x.duration();
  const ResolutionBudget demo = resolution_budget(cfg.geometry.gap_um, t1, cfg.geometry.drive_scale_MHz);
  j["budget"] = {{"gap_um", cfg.geometry.gap_um},
                 {"t1_rho_us", demo.t1_rho_us},
                 {"base_rabi_MHz", demo.base_rabi_MHz},
                 {"n_oscillations", demo.n_osc},
                 {"delta_x_nm", demo.delta_x_nm},
                 {"stability_required", demo.stability_required}};
  j["budget_target"] = {
      {"n_oscillations", cfg.budget_n},
      {"delta_x_nm", resolution_from_count(cfg.geometry.gap_um, cfg.budget_n)},
      {"t1_us", cfg.budget_t1_us},
      {"rabi_MHz", cfg.budget_rabi_MHz},
      {"t1_limited_delta_x_nm", t1_limited_resolution(cfg.geometry.gap_um, cfg.budget_t1_us, cfg.budget_rabi_MHz)}};
  write_text_file(out / "imaging.json", json_text(j));
  r.files = {out / "fieldmap.csv", out / "emitter_trace.csv", out / "emitter_trace.json", out / "imaging.json"};

  r.summary["command"] = "imaging-demo";
  r.summary["x"] = j["x"];
  if (cfg.emitter_y_um) r.summary["y"] = j["y"];
  r.summary["budget"] = j["budget"];
  r.summary["budget_target"] = j["budget_target"];
  return r;
}

}  // namespace

SampledTrace simulate_trace(const RunConfig& cfg, std::optional<std::uint64_t> seed) {
  const TimeGrid grid = cfg.grid.make();
  TraceMeta meta = base_meta(cfg);
  SampledTrace trace;
  switch (cfg.kind) {
    case ExperimentKind::rabi_single:
      trace = rabi_trace_incoherent(cfg.omega0_MHz, cfg.manifolds, grid, cfg.decay, cfg.amplitude_mode);
      break;
    case ExperimentKind::rabi_vtype:
      trace = rabi_trace_vtype(cfg.lambda_MHz, cfg.manifolds, grid, cfg.decay);
      break;
    case ExperimentKind::drift: {
      const std::uint64_t s = require_seed(cfg, seed);
      trace = apply_power_drift(two_level_generator(cfg, grid), cfg.drift, schedule_for(cfg, s));
      meta.seed = s;
      break;
    }
    default:
      throw ValidationError(std::string("experiment kind '") + to_string(cfg.kind) + "' does not produce a trace",
                            "experiment.kind");
  }
  if (cfg.kind == ExperimentKind::rabi_vtype) {
    meta.drive_kind = "vtype";
    meta.lambda = cfg.lambda_MHz;
  } else {
    meta.drive_kind = "two-level";
    meta.omega0 = cfg.omega0_MHz;
    meta.amplitude_mode = cfg.amplitude_mode == AmplitudeMode::exact ? "exact" : "equal_cosine";
  }
  for (const auto& l : trace.meta.labels) meta.labels.push_back(l);
  trace.meta = std::move(meta);
  return trace;
}

ojson analysis_report(const SampledTrace& trace, BeatMode mode, const SpectrumOptions& spectrum,
                      const std::string& source) {
  BeatOptions opts;
  opts.spectrum = spectrum;
  const BeatReport b = extract_beats(trace, mode, opts);
  const Spectrum s = fft_spectrum(trace, spectrum);

  ojson j;
  j["format"] = "rabibeat-report v1";
  j["input"] = {{"source", source},
                {"samples", trace.size()},
                {"duration_us", trace.duration()},
                {"dt_us", uniform_step(trace.times).value_or(0.0)}};
  j["mode"] = to_string(mode);
  j["spectrum"] = {{"window", spectrum.window == Window::hann ? "hann" : "rectangular"},
                   {"zero_pad", spectrum.zero_pad},
                   {"bin_width_MHz", s.bin_width},
                   {"interpolated_step_MHz", s.step()}};
  j["base_frequency_MHz"] = b.base_frequency;
  j["fft_peaks"] = peaks_json(b.fft_peaks);
  j["fft_beats_MHz"] = b.fft_beats;
  j["envelope_lines"] = peaks_json(b.envelope_peaks);
  j["beat_frequencies_MHz"] = b.beat_frequencies;
  j["recovered_detunings_MHz"] = b.recovered_detunings;

  ojson res;
  if (b.base_frequency > 0.0) {
    double t1 = 0.0;
    std::string t1_source;
    if (trace.meta.decay_kind == "exponential" && trace.meta.t1_rho > 0.0) {
      t1 = trace.meta.t1_rho;
      t1_source = "metadata t1_rho";
    } else if (const auto d = envelope_decay_time(trace, b.base_frequency)) {
      t1 = *d;
      t1_source = "measured envelope decay";
    } else {
      t1 = trace.duration();
      t1_source = "trace duration";
    }
    const double n = oscillation_count(b.base_frequency, t1);
    const ResolutionEstimate e = resolution_estimate(b.base_frequency, n);
    res = {{"t1_us", t1},
           {"t1_source", t1_source},
           {"n_oscillations", n},
           {"delta_cyclic_MHz", e.delta_cyclic},
           {"delta_angular_rad_per_us", e.delta_angular}};
  }
  j["resolution"] = res;
  j["diagnostics"] = b.diagnostics;
  return j;
}

RunResult run(const RunConfig& cfg, Command cmd, const fs::path& out_dir, std::optional<std::uint64_t> seed) {
  if (!command_accepts(cmd, cfg.kind))
    throw ValidationError(std::string("experiment kind '") + to_string(cfg.kind) + "' cannot be run by '" +
                              to_string(cmd) + "'",
                          "experiment.kind");
  switch (cmd) {
    case Command::simulate: return cmd_simulate(cfg, out_dir, seed);
    case Command::analyze: return cmd_analyze(cfg, out_dir);
    case Command::esr: return cmd_esr(cfg, out_dir);
    case Command::imaging_demo: return cmd_imaging_demo(cfg, out_dir);
  }
  throw ValidationError("unknown command", "command");
}

}  // namespace rabibeat
