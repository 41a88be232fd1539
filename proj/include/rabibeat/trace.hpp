#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rabibeat {

// Acquisition metadata carried alongside a trace.  Serialized as the JSON
// sidecar with sections units / drive / decay / provenance.
struct TraceMeta {
  std::string experiment;            // rabi-single, rabi-vtype, drift, ...
  std::string drive_kind;            // two-level | vtype | unknown
  double omega0 = 0.0;               // resonant Rabi frequency, MHz (two-level)
  double lambda = 0.0;               // V-system coupling, MHz (vtype)
  std::vector<double> detunings;     // manifold detunings / half-splittings, MHz
  std::vector<double> weights;
  std::string amplitude_mode;        // exact | equal_cosine (two-level only)
  std::string decay_kind = "none";   // none | exponential
  double t1_rho = 0.0;               // us
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::vector<std::string> labels;   // free-form provenance labels and warnings
};

// Time samples (us) and dimensionless signal values of equal length.
struct SampledTrace {
  std::vector<double> times;
  std::vector<double> values;
  TraceMeta meta;

  std::size_t size() const noexcept { return times.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

// Throws ValidationError unless lengths match, n >= 2 and times strictly increase.
void validate(const SampledTrace& trace);

// Uniform sample spacing, or nullopt when spacing varies by more than 1e-6 relative.
std::optional<double> uniform_step(const std::vector<double>& times);

}  // namespace rabibeat
