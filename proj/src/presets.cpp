#include "rabibeat/config.hpp"

#include <map>

namespace rabibeat {

namespace {

// Sampling for the two-level regime: 25 us at 5 ns resolves the three lines
// near 22 MHz (bin 0.04 MHz, 0.01 MHz after 4x padding) and the 0.1 MHz beat.
const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table = {
      {"paper-fig2", R"(# CW ESR of the m_s=0 -> -1 transition: resolved 14N triplet.
[experiment]
kind = esr
name = paper-fig2

[esr]
transitions_MHz = 0, 2.18, 4.36
contrasts = 0.02
fwhm_MHz = 0.8
f_start_MHz = -3
f_end_MHz = 7.36
n_points = 2073
)"},
      {"paper-fig3", R"(# Rabi beats of three incoherently summed hyperfine manifolds.
[experiment]
kind = rabi-single
name = paper-fig3

[drive]
omega0_MHz = 22.2
amplitude_mode = exact

[manifolds]
detunings_MHz = 0, 2.18, 4.36
weights = 0.333333333333333333, 0.333333333333333333, 0.333333333333333333

[decay]
kind = exponential
t1_rho_us = 25

[grid]
t_start_us = 0
t_end_us = 25
dt_us = 0.005
)"},
      {"paper-fig4", R"(# Spectrum and beat analysis of the paper-fig3 trace.
[experiment]
kind = analyze
name = paper-fig4

[analysis]
mode = single
window = hann
zero_pad = 4
input_preset = paper-fig3
)"},
      {"paper-fig5", R"(# Field tuned so that the +1 and -1 triplets overlap: five dips, doubled centre.
[experiment]
kind = esr
name = paper-fig5

[esr]
transitions_MHz = -4.36, -2.18, 0, 0, 2.18, 4.36
contrasts = 0.02
fwhm_MHz = 0.8
f_start_MHz = -7.5
f_end_MHz = 7.5
n_points = 3001
)"},
      {"paper-fig6", R"(# Power-jitter Monte Carlo: averaged resonant Rabi trace decaying through drift alone.
[experiment]
kind = drift
name = paper-fig6

[run]
seed = 6

[drive]
omega0_MHz = 22.2

[manifolds]
detunings_MHz = 0
weights = 1

[decay]
kind = none

[grid]
t_start_us = 0
t_end_us = 60
dt_us = 0.005

[drift]
trajectory = 0:1, 24:1
jitter_sigma = 8.1e-4
sweeps = 4000
duration_h = 24
threads = 1
)"},
      {"paper-fig7", R"(# V-type drive of the central dip: three manifolds, base oscillation near 42 MHz.
[experiment]
kind = rabi-vtype
name = paper-fig7

[drive]
base_MHz = 42

[manifolds]
detunings_MHz = 0, 2.18, 4.36
weights = 0.333333333333333333, 0.333333333333333333, 0.333333333333333333

[decay]
kind = exponential
t1_rho_us = 25

[grid]
t_start_us = 0
t_end_us = 30
dt_us = 0.01
)"},
      {"paper-fig8", R"(# Spectrum and beat analysis of the paper-fig7 trace.
[experiment]
kind = analyze
name = paper-fig8

[analysis]
mode = vtype
window = hann
zero_pad = 4
input_preset = paper-fig7
)"},
      {"imaging-demo", R"(# Emitter localization in a coplanar-waveguide gap.
[experiment]
kind = imaging-demo
name = imaging-demo

[imaging]
gap_um = 10
center_width_um = 10
drive_scale_MHz = 22.2
cutoff_um = 0.5
branch = left
map_points = 2001
emitter_x_um = 3.21
budget_t1_us = 1000
budget_rabi_MHz = 1000
budget_n = 1000000

[decay]
kind = exponential
t1_rho_us = 25

[grid]
t_start_us = 0
t_end_us = 25
dt_us = 0.005
)"},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : presets()) v.push_back(k);
    return v;
  }();
  return names;
}

std::optional<std::string> preset_text(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) return std::nullopt;
  return it->second;
}

}  // namespace rabibeat
