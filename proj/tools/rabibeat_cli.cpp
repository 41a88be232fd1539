// rabibeat command-line front end.  Talks to the library only through the C
// API.  Exit codes: 0 success, 2 invalid input (config, arguments, malformed
// files), 3 runtime failure (I/O, model range, internal).

#include "rabibeat/rabibeat.h"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr const char* kDefaultOut = "rabibeat_out";

struct Failure {
  rb_status status;
  std::string message;
};

int exit_code(rb_status s) {
  switch (s) {
    case RB_OK: return 0;
    case RB_ERR_INVALID:
    case RB_ERR_CONFIG:
    case RB_ERR_PARSE: return kExitValidation;
    default: return kExitRuntime;
  }
}

void check(rb_status s) {
  if (s != RB_OK) throw Failure{s, rb_last_error()};
}

struct ConfigDeleter {
  void operator()(rb_config* c) const { rb_config_free(c); }
};
using ConfigPtr = std::unique_ptr<rb_config, ConfigDeleter>;

struct CString {
  char* p = nullptr;
  ~CString() { rb_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::string format_value(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// key=start:stop:count (inclusive linear grid) or key=a,b,c (verbatim).
SweepAxis parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw Failure{RB_ERR_INVALID, "--sweep: expected key=start:stop:count or key=a,b,c, got '" + spec + "'"};
  SweepAxis axis{spec.substr(0, eq), {}};
  const std::string range = spec.substr(eq + 1);
  if (range.find(':') != std::string::npos) {
    double start = 0, stop = 0;
    unsigned long count = 0;
    const char* p = range.data();
    const char* end = p + range.size();
    auto r1 = std::from_chars(p, end, start);
    bool ok = r1.ec == std::errc() && r1.ptr < end && *r1.ptr == ':';
    if (ok) {
      auto r2 = std::from_chars(r1.ptr + 1, end, stop);
      ok = r2.ec == std::errc() && r2.ptr < end && *r2.ptr == ':';
      if (ok) {
        auto r3 = std::from_chars(r2.ptr + 1, end, count);
        ok = r3.ec == std::errc() && r3.ptr == end && count >= 1;
      }
    }
    if (!ok) throw Failure{RB_ERR_INVALID, "--sweep " + axis.key + ": bad range '" + range + "'"};
    for (unsigned long i = 0; i < count; ++i) {
      const double v = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / (count - 1);
      axis.values.push_back(format_value(i + 1 == count ? stop : v));
    }
  } else {
    std::string item;
    std::size_t pos = 0;
    while (pos <= range.size()) {
      const auto comma = range.find(',', pos);
      item = range.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (item.empty()) throw Failure{RB_ERR_INVALID, "--sweep " + axis.key + ": empty value in '" + range + "'"};
      axis.values.push_back(item);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return axis;
}

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sweeps;
  std::vector<std::string> sets;
  // analyze conveniences
  std::string trace;
  std::string mode = "single";
  unsigned jobs = 0;
};

std::string output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("RABIBEAT_OUT"); env && *env) return env;
  return kDefaultOut;
}

ConfigPtr load_config(const std::string& command, const Options& o) {
  rb_config* raw = nullptr;
  if (command == "analyze" && !o.trace.empty()) {
    const std::string text = "[experiment]\nkind = analyze\n";
    check(rb_config_parse(text.c_str(), &raw));
    ConfigPtr cfg(raw);
    check(rb_config_set(cfg.get(), "analysis.input_trace", std::filesystem::absolute(o.trace).string().c_str()));
    check(rb_config_set(cfg.get(), "analysis.mode", o.mode.c_str()));
    return cfg;
  }
  if (o.config.empty()) throw Failure{RB_ERR_INVALID, command + ": --config is required"};
  check(rb_config_load(o.config.c_str(), &raw));
  return ConfigPtr(raw);
}

void apply_sets(rb_config* cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Failure{RB_ERR_INVALID, "--set: expected key=value, got '" + s + "'"};
    check(rb_config_set(cfg, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
  }
}

void print_warnings(const rb_config* cfg) {
  CString w;
  if (rb_config_warnings(cfg, &w.p) == RB_OK && w.p && *w.p) {
    std::string text = w.str();
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      std::cerr << "warning: " << text.substr(pos, nl - pos) << '\n';
      pos = nl == std::string::npos ? text.size() : nl + 1;
    }
  }
}

std::optional<std::uint64_t> config_seed(const rb_config* cfg) {
  CString v;
  check(rb_config_get(cfg, "run.seed", &v.p));
  if (!v.p) return std::nullopt;
  std::uint64_t s = 0;
  const std::string str = v.str();
  const auto r = std::from_chars(str.data(), str.data() + str.size(), s);
  if (r.ec != std::errc() || r.ptr != str.data() + str.size())
    throw Failure{RB_ERR_CONFIG, "run.seed: expected an unsigned 64-bit integer, got '" + str + "'"};
  return s;
}

int run_single(const std::string& command, const Options& o) {
  ConfigPtr cfg = load_config(command, o);
  apply_sets(cfg.get(), o.sets);
  print_warnings(cfg.get());
  const std::string out = output_dir(o);
  CString summary;
  check(rb_run(cfg.get(), command.c_str(), out.c_str(), o.seed.value_or(0), o.seed.has_value(), &summary.p));
  std::cout << summary.str();
  return 0;
}

struct SweepRun {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::optional<std::uint64_t> seed;
  rb_status status = RB_OK;
  std::string message;
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Expands the cartesian product of the sweep axes (last axis fastest) into
// run_### directories and executes them on a worker pool.  Seeds derive from
// the root seed and the run index only, so results do not depend on
// scheduling.
int run_sweep(const std::string& command, const Options& o) {
  ConfigPtr base = load_config(command, o);
  apply_sets(base.get(), o.sets);

  std::vector<SweepAxis> axes;
  for (const auto& s : o.sweeps) axes.push_back(parse_sweep(s));
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();

  const std::optional<std::uint64_t> root = o.seed ? o.seed : config_seed(base.get());
  std::vector<SweepRun> runs(total);
  for (std::size_t i = 0; i < total; ++i) {
    runs[i].index = i;
    std::size_t rem = i;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& axis = axes[a];
      runs[i].params.insert(runs[i].params.begin(), {axis.key, axis.values[rem % axis.values.size()]});
      rem /= axis.values.size();
    }
    if (root) runs[i].seed = rb_derive_seed(*root, i);
  }

  const std::filesystem::path out = output_dir(o);
  auto run_dir = [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", i);
    return out / name;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      SweepRun& r = runs[i];
      try {
        rb_config* raw = nullptr;
        check(rb_config_clone(base.get(), &raw));
        ConfigPtr cfg(raw);
        for (const auto& [k, v] : r.params) check(rb_config_set(cfg.get(), k.c_str(), v.c_str()));
        check(rb_run(cfg.get(), command.c_str(), run_dir(i).string().c_str(), r.seed.value_or(0), r.seed.has_value(),
                     nullptr));
      } catch (const Failure& f) {
        r.status = f.status;
        r.message = f.message;
      }
    }
  };
  unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Manifest in index order; written after all runs so it is deterministic.
  std::string manifest = "{\n  \"format\": \"rabibeat-sweep v1\",\n  \"command\": \"" + command + "\",\n";
  manifest += "  \"runs\": [\n";
  int worst = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const SweepRun& r = runs[i];
    manifest += "    {\"index\": " + std::to_string(i) + ", \"dir\": \"" + run_dir(i).filename().string() + "\"";
    if (r.seed) manifest += ", \"seed\": " + std::to_string(*r.seed);
    manifest += ", \"params\": {";
    for (std::size_t p = 0; p < r.params.size(); ++p)
      manifest += (p ? ", " : "") + std::string("\"") + json_escape(r.params[p].first) + "\": \"" +
                  json_escape(r.params[p].second) + "\"";
    manifest += "}, \"status\": \"" + std::string(rb_status_name(r.status)) + "\"";
    if (r.status != RB_OK) manifest += ", \"error\": \"" + json_escape(r.message) + "\"";
    manifest += i + 1 < total ? "},\n" : "}\n";
    if (r.status != RB_OK) {
      std::cerr << "error: " << run_dir(i).filename().string() << ": " << r.message << '\n';
      worst = std::max(worst, exit_code(r.status));
    }
  }
  manifest += "  ]\n}\n";
  std::filesystem::create_directories(out);
  std::ofstream(out / "sweep.json", std::ios::binary) << manifest;
  std::cout << manifest;
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rabibeat: Rabi-beat spin dynamics, spectra and imaging"};
  app.set_version_flag("--version", std::string(rb_version()));
  app.require_subcommand(1);

  Options o;
  auto add_run_options = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config,-c", o.config, "config file or bundled preset name");
    if (config_required) c->required();
    sub->add_option("--out,-o", o.out, "output directory (default: $RABIBEAT_OUT, else ./rabibeat_out)");
    sub->add_option("--seed", o.seed, "root random seed (overrides run.seed)");
    sub->add_option("--sweep", o.sweeps, "parameter grid: key=start:stop:count or key=a,b,c (repeatable)");
    sub->add_option("--set", o.sets, "override one config entry: key=value (repeatable)");
    sub->add_option("--jobs,-j", o.jobs, "concurrent sweep runs (default: hardware threads)");
  };

  auto* simulate = app.add_subcommand("simulate", "simulate a Rabi trace (rabi-single, rabi-vtype, drift)");
  add_run_options(simulate, true);
  auto* analyze = app.add_subcommand("analyze", "spectrum, beats and recovered detunings of a trace");
  add_run_options(analyze, false);
  analyze->add_option("--trace", o.trace, "trace CSV to analyze instead of a config");
  analyze->add_option("--mode", o.mode, "beat inversion for --trace")->check(CLI::IsMember({"single", "vtype"}));
  auto* esr = app.add_subcommand("esr", "synthesize a CW ESR lineshape");
  add_run_options(esr, true);
  auto* imaging = app.add_subcommand("imaging-demo", "forward-simulate and localize an emitter in a waveguide gap");
  add_run_options(imaging, true);

  std::string preset_name;
  auto* presets = app.add_subcommand("presets", "list bundled presets, or print one");
  presets->add_option("name", preset_name, "preset to print");
  auto* schema = app.add_subcommand("schema", "print the config schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (presets->parsed()) {
      if (preset_name.empty()) {
        for (std::size_t i = 0; i < rb_preset_count(); ++i) std::cout << rb_preset_name(i) << '\n';
      } else {
        CString text;
        check(rb_preset_text(preset_name.c_str(), &text.p));
        std::cout << text.str();
      }
      return 0;
    }
    if (schema->parsed()) {
      CString text;
      check(rb_schema_text(&text.p));
      std::cout << text.str();
      return 0;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "analyze" && o.trace.empty() && o.config.empty())
      throw Failure{RB_ERR_INVALID, "analyze: give --config or --trace"};
    return o.sweeps.empty() ? run_single(command, o) : run_sweep(command, o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
