#pragma once

// Run configuration: an INI-style document ([section] + key = value) checked
// against a fixed schema, resolved into a typed RunConfig.

#include "rabibeat/evolve.hpp"
#include "rabibeat/imaging.hpp"
#include "rabibeat/signal.hpp"
#include "rabibeat/spinmodel.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rabibeat {

enum class ExperimentKind { rabi_single, rabi_vtype, esr, drift, imaging_demo, analyze };

const char* to_string(ExperimentKind k);

struct GridSpec {
  double t_start_us = 0.0;
  double t_end_us = 25.0;
  double dt_us = 0.005;
  std::size_t n_points = 0;  // overrides dt when non-zero

  TimeGrid make() const;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::rabi_single;
  std::string name;
  std::optional<std::uint64_t> seed;

  NVParams nv;

  double omega0_MHz = 22.2;
  double lambda_MHz = 0.0;  // rabi-vtype; derived from base_MHz when that is given
  double carrier_MHz = 0.0;
  double Delta_MHz = 0.0;
  AmplitudeMode amplitude_mode = AmplitudeMode::exact;
  ManifoldSpec manifolds;
  DecayModel decay;
  GridSpec grid;

  DriftModel drift;
  std::size_t drift_sweeps = 1;
  double drift_duration_h = 24.0;
  unsigned drift_threads = 1;

  BeatMode analysis_mode = BeatMode::single;
  SpectrumOptions spectrum;
  std::string input_trace;   // absolute, or relative to the config file
  std::string input_preset;  // simulate this preset in memory instead

  std::vector<double> esr_transitions;
  std::vector<double> esr_contrasts;
  double esr_fwhm_MHz = 0.8;
  double esr_f_start_MHz = -3.0;
  double esr_f_end_MHz = 7.0;
  std::size_t esr_points = 2001;

  WaveguideGeometry geometry;
  Branch branch = Branch::left;
  std::size_t map_points = 2001;
  double emitter_x_um = 3.21;
  std::optional<double> emitter_y_um;
  std::string map_file;
  double budget_t1_us = 1000.0;
  double budget_rabi_MHz = 2880.0;
  double budget_n = 1e6;

  std::vector<std::string> warnings;
};

struct SchemaEntry {
  std::string key;        // section.name
  std::string type;       // number | count | u64 | string | list | knots | enum
  std::string choices;    // enum values, '|' separated
  std::string help;
};

const std::vector<SchemaEntry>& config_schema();
std::string schema_text();

// Raw key/value document; keys are "section.name".
class ConfigDocument {
 public:
  static ConfigDocument parse(const std::string& text, const std::string& source = "<config>");
  // Preset name ("paper-fig3", ...) or a path to a config file.
  static ConfigDocument load(const std::string& path_or_preset);

  // Throws ValidationError for keys not in the schema.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::map<std::string, std::string> entries_;
  std::filesystem::path base_dir_;
  std::string source_;
};

// Type-checks every entry, applies defaults and validates the physics
// parameters.  Errors carry the offending key path.
RunConfig resolve(const ConfigDocument& doc);

// Bundled presets for the reference regimes.
const std::vector<std::string>& preset_names();
std::optional<std::string> preset_text(const std::string& name);

}  // namespace rabibeat
