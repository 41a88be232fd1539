#pragma once

// Rabi-beat imaging: coplanar-waveguide drive profile, oscillation-count and
// resolution budget, and position reconstruction from a measured Rabi
// frequency.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rabibeat {

// Gap between ground plane and centre conductor, positions measured from the
// ground-plane edge (x = 0) to the centre-conductor edge (x = gap).
struct WaveguideGeometry {
  double gap_um = 10.0;
  double center_width_um = 10.0;
  double drive_scale_MHz = 22.2;  // resonant Rabi frequency at the gap midpoint
  double cutoff_um = 0.5;         // softens the edge singularity
};

void validate(const WaveguideGeometry& g);

inline constexpr const char* kEdgeSingularModel = "edge-singular-cutoff";

// Relative drive amplitude (1 at the gap midpoint):
//   (G/2 + a) / sqrt((x + a)(G - x + a)),  0 <= x <= G, a = cutoff.
// Minimum at the midpoint, mirror-symmetric, monotone on each half gap.
// Throws RangeError outside the gap.
double field_profile(const WaveguideGeometry& g, double x_um);

// Tabulated position -> resonant Rabi frequency map.  Inversion is only
// performed inside [region_lo, region_hi], where the map must be strictly
// monotone.
struct FieldMap {
  std::vector<double> positions;  // um, strictly increasing
  std::vector<double> rabi;       // MHz, positive
  double region_lo = 0.0;
  double region_hi = 0.0;
  std::string model = "measured";
};

void validate(const FieldMap& m);

enum class Branch { left, right };

// Samples the whole gap with n_points (forced odd so the midpoint is a node);
// the monotone region is the requested half.
FieldMap make_field_map(const WaveguideGeometry& g, std::size_t n_points, Branch branch);

// Linear interpolation of the tabulated map; throws RangeError outside it.
double rabi_at(const FieldMap& m, double x_um);

// Oscillations visible within t1_rho: base_rabi (MHz) * t1_rho (us).  The 2 pi
// of the angular form cancels against the cyclic convention.
double oscillation_count(double base_rabi_MHz, double t1_rho_us);

// G / N, in nm.
double resolution_from_count(double gap_um, double n);

// G / (T1 * Omega) in nm, identical to resolution_from_count with N from
// oscillation_count.
double t1_limited_resolution(double gap_um, double t1_us, double base_rabi_MHz);

struct ResolutionBudget {
  double t1_rho_us = 0.0;
  double base_rabi_MHz = 0.0;
  double n_osc = 0.0;
  double delta_x_nm = 0.0;
  // Required relative power and positional stability, expressed as 1/N.
  double stability_required = 0.0;
};

ResolutionBudget resolution_budget(double gap_um, double t1_rho_us, double base_rabi_MHz);

struct Localization {
  double x_um = 0.0;
  double uncertainty_um = 0.0;
};

// Inverse interpolation on the monotone region.  The uncertainty is the
// resolvable Rabi-frequency change divided by the local map gradient.
Localization position_from_rabi(double measured_MHz, const FieldMap& map, double resolvable_MHz);

struct AxisMeasurement {
  const FieldMap* map = nullptr;
  double measured_MHz = 0.0;
  double resolvable_MHz = 0.0;
};

// Independent per-axis inversion; errors name the failing axis.
std::pair<Localization, Localization> two_axis_localize(const AxisMeasurement& x, const AxisMeasurement& y);

// "# rabibeat-fieldmap v1 model=<name>", optional "# region_um=<lo>,<hi>",
// then "position_um,rabi_MHz" and rows.  Without a region line the whole
// table must be monotone.
void write_field_map_csv(const FieldMap& m, std::ostream& os);
FieldMap read_field_map_csv(std::istream& is, const std::string& source = "<stream>");
FieldMap load_field_map(const std::filesystem::path& path);

}  // namespace rabibeat
