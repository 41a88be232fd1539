#include "rabibeat/imaging.hpp"

#include "rabibeat/errors.hpp"
#include "rabibeat/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rabibeat {

void validate(const WaveguideGeometry& g) {
  if (!(g.gap_um > 0.0)) throw ValidationError("must be positive", "imaging.gap_um");
  if (!(g.center_width_um > 0.0)) throw ValidationError("must be positive", "imaging.center_width_um");
  if (!(g.drive_scale_MHz > 0.0)) throw ValidationError("must be positive", "imaging.drive_scale_MHz");
  if (!(g.cutoff_um > 0.0)) throw ValidationError("must be positive", "imaging.cutoff_um");
}

double field_profile(const WaveguideGeometry& g, double x_um) {
  validate(g);
  if (!(x_um >= 0.0 && x_um <= g.gap_um)) {
    std::ostringstream os;
    os << "position " << x_um << " um is outside the modeled gap [0, " << g.gap_um << "]";
    throw RangeError(os.str());
  }
  const double a = g.cutoff_um;
  return (0.5 * g.gap_um + a) / std::sqrt((x_um + a) * (g.gap_um - x_um + a));
}

void validate(const FieldMap& m) {
  if (m.positions.size() != m.rabi.size()) throw ValidationError("positions and rabi differ in length", "fieldmap");
  if (m.positions.size() < 2) throw ValidationError("need at least 2 nodes", "fieldmap");
  for (std::size_t i = 0; i < m.positions.size(); ++i) {
    if (!(m.rabi[i] > 0.0)) throw ValidationError("Rabi frequencies must be positive", "fieldmap");
    if (i > 0 && !(m.positions[i] > m.positions[i - 1]))
      throw ValidationError("positions must be strictly increasing", "fieldmap");
  }
  if (!(m.region_lo < m.region_hi) || m.region_lo < m.positions.front() || m.region_hi > m.positions.back())
    throw ValidationError("monotone region must lie inside the tabulated positions", "fieldmap.region");

  int direction = 0;
  double prev_x = 0.0, prev_r = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < m.positions.size(); ++i) {
    if (m.positions[i] < m.region_lo || m.positions[i] > m.region_hi) continue;
    if (have_prev) {
      const int d = m.rabi[i] > prev_r ? 1 : (m.rabi[i] < prev_r ? -1 : 0);
      if (d == 0 || (direction != 0 && d != direction)) {
        std::ostringstream os;
        os << "map is not strictly monotone on the requested branch near x = " << prev_x << " um";
        throw ValidationError(os.str(), "fieldmap.region");
      }
      direction = d;
    }
    prev_x = m.positions[i];
    prev_r = m.rabi[i];
    have_prev = true;
  }
  if (direction == 0) throw ValidationError("monotone region contains fewer than 2 nodes", "fieldmap.region");
}

FieldMap make_field_map(const WaveguideGeometry& g, std::size_t n_points, Branch branch) {
  validate(g);
  if (n_points < 3) throw ValidationError("need at least 3 points", "imaging.map_points");
  if (n_points % 2 == 0) ++n_points;

  FieldMap m;
  m.model = kEdgeSingularModel;
  m.positions.resize(n_points);
  m.rabi.resize(n_points);
  const double h = g.gap_um / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    m.positions[i] = i + 1 == n_points ? g.gap_um : h * static_cast<double>(i);
    m.rabi[i] = g.drive_scale_MHz * field_profile(g, m.positions[i]);
  }
  const double mid = m.positions[n_points / 2];
  if (branch == Branch::left) {
    m.region_lo = 0.0;
    m.region_hi = mid;
  } else {
    m.region_lo = mid;
    m.region_hi = g.gap_um;
  }
  validate(m);
  return m;
}

double rabi_at(const FieldMap& m, double x_um) {
  if (m.positions.empty() || x_um < m.positions.front() || x_um > m.positions.back())
    throw RangeError("position outside the tabulated map");
  const auto it = std::upper_bound(m.positions.begin(), m.positions.end(), x_um);
  if (it == m.positions.end()) return m.rabi.back();
  const auto i = static_cast<std::size_t>(it - m.positions.begin()) - 1;
  const double f = (x_um - m.positions[i]) / (m.positions[i + 1] - m.positions[i]);
  return m.rabi[i] + f * (m.rabi[i + 1] - m.rabi[i]);
}

double oscillation_count(double base_rabi_MHz, double t1_rho_us) {
  if (!(base_rabi_MHz > 0.0) || !(t1_rho_us > 0.0)) throw ValidationError("inputs must be positive");
  return base_rabi_MHz * t1_rho_us;
}

double resolution_from_count(double gap_um, double n) {
  if (!(gap_um > 0.0)) throw ValidationError("gap must be positive");
  if (!(n >= 1.0)) throw ValidationError("need at least one oscillation");
  return gap_um * 1000.0 / n;
}

double t1_limited_resolution(double gap_um, double t1_us, double base_rabi_MHz) {
  if (!(gap_um > 0.0) || !(t1_us > 0.0) || !(base_rabi_MHz > 0.0))
    throw ValidationError("inputs must be positive");
  return gap_um * 1000.0 / (t1_us * base_rabi_MHz);
}

ResolutionBudget resolution_budget(double gap_um, double t1_rho_us, double base_rabi_MHz) {
  ResolutionBudget b;
  b.t1_rho_us = t1_rho_us;
  b.base_rabi_MHz = base_rabi_MHz;
  b.n_osc = oscillation_count(base_rabi_MHz, t1_rho_us);
  b.delta_x_nm = resolution_from_count(gap_um, b.n_osc);
  b.stability_required = 1.0 / b.n_osc;
  return b;
}

Localization position_from_rabi(double measured_MHz, const FieldMap& map, double resolvable_MHz) {
  validate(map);
  if (!(resolvable_MHz >= 0.0)) throw ValidationError("resolvable frequency change must be non-negative");

  std::size_t first = 0, last = 0;
  bool seen = false;
  for (std::size_t i = 0; i < map.positions.size(); ++i) {
    if (map.positions[i] < map.region_lo || map.positions[i] > map.region_hi) continue;
    if (!seen) first = i;
    last = i;
    seen = true;
  }
  const bool increasing = map.rabi[last] > map.rabi[first];
  const double r_min = std::min(map.rabi[first], map.rabi[last]);
  const double r_max = std::max(map.rabi[first], map.rabi[last]);
  if (!(measured_MHz >= r_min && measured_MHz <= r_max)) {
    std::ostringstream os;
    os << "measured Rabi frequency " << measured_MHz << " MHz is outside the branch range [" << r_min << ", "
       << r_max << "] MHz";
    throw RangeError(os.str());
  }

  // Segment [i, i+1] bracketing the measurement.
  std::size_t lo = first, hi = last;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const bool below = increasing ? map.rabi[mid] <= measured_MHz : map.rabi[mid] >= measured_MHz;
    (below ? lo : hi) = mid;
  }
  const double x0 = map.positions[lo], x1 = map.positions[hi];
  const double r0 = map.rabi[lo], r1 = map.rabi[hi];
  const double gradient = (r1 - r0) / (x1 - x0);

  Localization out;
  if (measured_MHz == r0)
    out.x_um = x0;
  else if (measured_MHz == r1)
    out.x_um = x1;
  else
    out.x_um = x0 + (measured_MHz - r0) / gradient;
  out.uncertainty_um = resolvable_MHz / std::abs(gradient);
  return out;
}

std::pair<Localization, Localization> two_axis_localize(const AxisMeasurement& x, const AxisMeasurement& y) {
  auto solve = [](const AxisMeasurement& a, const char* axis) {
    if (!a.map) throw ValidationError(std::string(axis) + " axis: missing field map");
    try {
      return position_from_rabi(a.measured_MHz, *a.map, a.resolvable_MHz);
    } catch (const RangeError& e) {
      throw RangeError(std::string(axis) + " axis: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(axis) + " axis: " + e.what());
    }
  };
  return {solve(x, "x"), solve(y, "y")};
}

void write_field_map_csv(const FieldMap& m, std::ostream& os) {
  os << "# rabibeat-fieldmap v1 model=" << m.model << '\n';
  os << "# region_um=" << format_number(m.region_lo) << ',' << format_number(m.region_hi) << '\n';
  os << "position_um,rabi_MHz\n";
  for (std::size_t i = 0; i < m.positions.size(); ++i)
    os << format_number(m.positions[i]) << ',' << format_number(m.rabi[i]) << '\n';
}

FieldMap read_field_map_csv(std::istream& is, const std::string& source) {
  FieldMap m;
  std::string line;
  std::size_t lineno = 0;
  bool have_region = false, have_columns = false;

  auto strip = [](std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  };

  if (!std::getline(is, line)) throw ParseError(source, 1, "empty file");
  ++lineno;
  line = strip(line);
  const std::string magic = "# rabibeat-fieldmap v1";
  if (line.rfind(magic, 0) != 0) throw ParseError(source, lineno, "expected header '" + magic + " model=...'");
  const auto mpos = line.find("model=");
  m.model = mpos == std::string::npos ? "measured" : line.substr(mpos + 6);
  if (m.model.empty()) m.model = "measured";

  while (std::getline(is, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string key = "# region_um=";
      if (line.rfind(key, 0) == 0) {
        const std::string rest = line.substr(key.size());
        const auto comma = rest.find(',');
        if (comma == std::string::npos) throw ParseError(source, lineno, "region needs '<lo>,<hi>'");
        try {
          m.region_lo = parse_number(rest.substr(0, comma));
          m.region_hi = parse_number(rest.substr(comma + 1));
        } catch (const std::invalid_argument& e) {
          throw ParseError(source, lineno, e.what());
        }
        have_region = true;
      }
      continue;
    }
    if (!have_columns) {
      if (line != "position_um,rabi_MHz") throw ParseError(source, lineno, "expected 'position_um,rabi_MHz'");
      have_columns = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError(source, lineno, "expected two comma-separated fields");
    try {
      m.positions.push_back(parse_number(line.substr(0, comma)));
      m.rabi.push_back(parse_number(line.substr(comma + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (m.positions.size() < 2) throw ParseError(source, lineno, "field map needs at least 2 rows");
  if (!have_region) {
    m.region_lo = m.positions.front();
    m.region_hi = m.positions.back();
  }
  validate(m);
  return m;
}

FieldMap load_field_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field map " + path.string());
  return read_field_map_csv(in, path.string());
}

}  // namespace rabibeat
