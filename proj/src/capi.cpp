#include "rabibeat/rabibeat.h"

#include "rabibeat/config.hpp"
#include "rabibeat/errors.hpp"
#include "rabibeat/evolve.hpp"
#include "rabibeat/imaging.hpp"
#include "rabibeat/runner.hpp"
#include "rabibeat/signal.hpp"
#include "rabibeat/spinmodel.hpp"
#include "rabibeat/trace_io.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

using namespace rabibeat;

struct rb_trace {
  SampledTrace trace;
};

struct rb_beat_report {
  BeatReport report;
  nlohmann::ordered_json json;
};

struct rb_config {
  ConfigDocument doc;
};

namespace {

thread_local std::string g_last_error;

rb_status fail(rb_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, translating exceptions to status codes.  Validation failures map to
// `validation` (RB_ERR_CONFIG for config paths, RB_ERR_INVALID for arguments).
template <class F>
rb_status guard(F&& f, rb_status validation = RB_ERR_INVALID) noexcept {
  g_last_error.clear();
  try {
    f();
    return RB_OK;
  } catch (const ParseError& e) {
    return fail(RB_ERR_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(RB_ERR_IO, e.what());
  } catch (const std::out_of_range& e) {
    return fail(RB_ERR_RANGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(validation, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RB_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* name) {
  if (!p) throw std::invalid_argument(std::string(name) + " must not be null");
}

BeatMode to_mode(rb_beat_mode m) {
  if (m == RB_MODE_SINGLE) return BeatMode::single;
  if (m == RB_MODE_VTYPE) return BeatMode::vtype;
  throw std::invalid_argument("unknown beat mode");
}

std::optional<std::uint64_t> opt_seed(uint64_t seed, int has_seed) {
  if (has_seed) return seed;
  return std::nullopt;
}

}  // namespace

extern "C" {

const char* rb_version(void) { return "0.3.0"; }

const char* rb_last_error(void) { return g_last_error.c_str(); }

const char* rb_status_name(rb_status s) {
  switch (s) {
    case RB_OK: return "ok";
    case RB_ERR_INVALID: return "invalid argument";
    case RB_ERR_CONFIG: return "config error";
    case RB_ERR_PARSE: return "parse error";
    case RB_ERR_RANGE: return "range error";
    case RB_ERR_IO: return "i/o error";
    case RB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void rb_string_free(char* s) { std::free(s); }

rb_status rb_rabi_frequency(double omega0, double delta, double* out) {
  return guard([&] {
    require(out, "out");
    *out = rabi_frequency(omega0, delta);
  });
}

rb_status rb_beat_shift_two_level(double omega0, double delta, double* out) {
  return guard([&] {
    require(out, "out");
    *out = beat_shift_two_level(omega0, delta);
  });
}

rb_status rb_beat_shift_vtype(double omega0_base, double delta, double* out) {
  return guard([&] {
    require(out, "out");
    *out = beat_shift_vtype(omega0_base, delta);
  });
}

rb_status rb_detuning_from_beat(double beat, double base, rb_beat_mode mode, double* out) {
  return guard([&] {
    require(out, "out");
    *out = detuning_from_beat(beat, base, to_mode(mode));
  });
}

rb_status rb_vtype_population(double lambda, double delta, double t, double* out) {
  return guard([&] {
    require(out, "out");
    *out = vtype_population(lambda, delta, t);
  });
}

rb_status rb_drift_relation(double rel_power_change, double* linear, double* exact) {
  return guard([&] {
    require(linear, "linear");
    require(exact, "exact");
    const double lin = drift_relation(rel_power_change);
    const double ex = drift_relation_exact(rel_power_change);
    *linear = lin;
    *exact = ex;
  });
}

rb_status rb_resolution_estimate(double base, double n_oscillations, double* delta_cyclic, double* delta_angular) {
  return guard([&] {
    require(delta_cyclic, "delta_cyclic");
    require(delta_angular, "delta_angular");
    const ResolutionEstimate e = resolution_estimate(base, n_oscillations);
    *delta_cyclic = e.delta_cyclic;
    *delta_angular = e.delta_angular;
  });
}

rb_status rb_resolution_budget(double gap_um, double t1_rho_us, double base_rabi, double* n_osc,
                               double* delta_x_nm) {
  return guard([&] {
    require(n_osc, "n_osc");
    require(delta_x_nm, "delta_x_nm");
    const ResolutionBudget b = resolution_budget(gap_um, t1_rho_us, base_rabi);
    *n_osc = b.n_osc;
    *delta_x_nm = b.delta_x_nm;
  });
}

rb_status rb_trace_load(const char* csv_path, rb_trace** out) {
  return guard([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    *out = new rb_trace{load_trace(csv_path)};
  });
}

rb_status rb_trace_from_arrays(const double* times, const double* values, size_t n, rb_trace** out) {
  return guard([&] {
    require(times, "times");
    require(values, "values");
    require(out, "out");
    SampledTrace t;
    t.times.assign(times, times + n);
    t.values.assign(values, values + n);
    t.meta.experiment = "external";
    t.meta.drive_kind = "unknown";
    validate(t);
    *out = new rb_trace{std::move(t)};
  });
}

rb_status rb_trace_simulate(const rb_config* cfg, uint64_t seed, int has_seed, rb_trace** out) {
  return guard(
      [&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = new rb_trace{simulate_trace(resolve(cfg->doc), opt_seed(seed, has_seed))};
      },
      RB_ERR_CONFIG);
}

size_t rb_trace_length(const rb_trace* t) { return t ? t->trace.size() : 0; }

rb_status rb_trace_data(const rb_trace* t, const double** times, const double** values) {
  return guard([&] {
    require(t, "trace");
    if (times) *times = t->trace.times.data();
    if (values) *values = t->trace.values.data();
  });
}

rb_status rb_trace_save(const rb_trace* t, const char* dir, const char* stem) {
  return guard([&] {
    require(t, "trace");
    require(dir, "dir");
    require(stem, "stem");
    save_trace(t->trace, dir, stem);
  });
}

void rb_trace_free(rb_trace* t) { delete t; }

rb_status rb_analyze(const rb_trace* t, rb_beat_mode mode, rb_beat_report** out) {
  return guard([&] {
    require(t, "trace");
    require(out, "out");
    const BeatMode m = to_mode(mode);
    auto r = std::make_unique<rb_beat_report>();
    r->report = extract_beats(t->trace, m);
    r->json = analysis_report(t->trace, m, SpectrumOptions{}, "memory");
    *out = r.release();
  });
}

double rb_report_base_frequency(const rb_beat_report* r) { return r ? r->report.base_frequency : 0.0; }

size_t rb_report_beat_count(const rb_beat_report* r) { return r ? r->report.beat_frequencies.size() : 0; }

double rb_report_beat(const rb_beat_report* r, size_t i) {
  return r && i < r->report.beat_frequencies.size() ? r->report.beat_frequencies[i] : 0.0;
}

size_t rb_report_detuning_count(const rb_beat_report* r) { return r ? r->report.recovered_detunings.size() : 0; }

double rb_report_detuning(const rb_beat_report* r, size_t i) {
  return r && i < r->report.recovered_detunings.size() ? r->report.recovered_detunings[i] : 0.0;
}

rb_status rb_report_json(const rb_beat_report* r, char** json) {
  return guard([&] {
    require(r, "report");
    require(json, "json");
    *json = dup_string(r->json.dump(2) + "\n");
  });
}

void rb_report_free(rb_beat_report* r) { delete r; }

rb_status rb_config_load(const char* path_or_preset, rb_config** out) {
  return guard(
      [&] {
        require(path_or_preset, "path_or_preset");
        require(out, "out");
        *out = new rb_config{ConfigDocument::load(path_or_preset)};
      },
      RB_ERR_CONFIG);
}

rb_status rb_config_parse(const char* text, rb_config** out) {
  return guard(
      [&] {
        require(text, "text");
        require(out, "out");
        *out = new rb_config{ConfigDocument::parse(text)};
      },
      RB_ERR_CONFIG);
}

rb_status rb_config_set(rb_config* cfg, const char* key, const char* value) {
  return guard(
      [&] {
        require(cfg, "cfg");
        require(key, "key");
        require(value, "value");
        cfg->doc.set(key, value);
      },
      RB_ERR_CONFIG);
}

rb_status rb_config_get(const rb_config* cfg, const char* key, char** value) {
  return guard([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    const auto v = cfg->doc.get(key);
    *value = v ? dup_string(*v) : nullptr;
  });
}

rb_status rb_config_clone(const rb_config* cfg, rb_config** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new rb_config{cfg->doc};
  });
}

rb_status rb_config_kind(const rb_config* cfg, char** kind) {
  return guard(
      [&] {
        require(cfg, "cfg");
        require(kind, "kind");
        *kind = dup_string(to_string(resolve(cfg->doc).kind));
      },
      RB_ERR_CONFIG);
}

rb_status rb_config_warnings(const rb_config* cfg, char** text) {
  return guard(
      [&] {
        require(cfg, "cfg");
        require(text, "text");
        std::string s;
        for (const auto& w : resolve(cfg->doc).warnings) s += w + "\n";
        *text = dup_string(s);
      },
      RB_ERR_CONFIG);
}

void rb_config_free(rb_config* cfg) { delete cfg; }

size_t rb_preset_count(void) { return preset_names().size(); }

const char* rb_preset_name(size_t i) { return i < preset_names().size() ? preset_names()[i].c_str() : nullptr; }

rb_status rb_preset_text(const char* name, char** text) {
  return guard([&] {
    require(name, "name");
    require(text, "text");
    const auto t = preset_text(name);
    if (!t) throw std::invalid_argument(std::string("no bundled preset named '") + name + "'");
    *text = dup_string(*t);
  });
}

rb_status rb_schema_text(char** text) {
  return guard([&] {
    require(text, "text");
    *text = dup_string(schema_text());
  });
}

rb_status rb_run(const rb_config* cfg, const char* command, const char* out_dir, uint64_t seed, int has_seed,
                 char** summary) {
  return guard(
      [&] {
        require(cfg, "cfg");
        require(command, "command");
        require(out_dir, "out_dir");
        const RunConfig rc = resolve(cfg->doc);
        RunResult r = run(rc, command_from_string(command), out_dir, opt_seed(seed, has_seed));
        if (summary) {
          nlohmann::ordered_json j = r.summary;
          nlohmann::ordered_json files = nlohmann::ordered_json::array();
          for (const auto& f : r.files) files.push_back(f.string());
          j["files"] = files;
          *summary = dup_string(j.dump(2) + "\n");
        }
      },
      RB_ERR_CONFIG);
}

uint64_t rb_derive_seed(uint64_t root, uint64_t index) { return derive_seed(root, index); }

}  // extern "C"
