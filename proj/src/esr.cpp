#include "rabibeat/esr.hpp"

#include "rabibeat/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rabibeat {

double lorentzian(double offset, double fwhm) {
  const double x = 2.0 * offset / fwhm;
  return 1.0 / (1.0 + x * x);
}

EsrLineshape synthesize_esr(const std::vector<double>& transitions, const std::vector<double>& contrasts,
                            double linewidth_fwhm, const std::vector<double>& grid) {
  if (transitions.size() != contrasts.size())
    throw ValidationError("transitions and contrasts differ in length", "esr.contrasts");
  if (!(linewidth_fwhm > 0.0)) throw ValidationError("must be positive", "esr.fwhm_MHz");
  for (double c : contrasts)
    if (!(c > 0.0 && c < 1.0)) throw ValidationError("contrasts must lie in (0, 1)", "esr.contrasts");

  EsrLineshape out;
  out.freqs = grid;
  out.signal.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double dip = 0.0;
    for (std::size_t i = 0; i < transitions.size(); ++i)
      dip += contrasts[i] * lorentzian(grid[k] - transitions[i], linewidth_fwhm);
    out.signal[k] = std::max(0.0, 1.0 - dip);
  }
  return out;
}

std::vector<Dip> find_dips(const EsrLineshape& s, double min_depth) {
  std::vector<Dip> out;
  for (std::size_t i = 1; i + 1 < s.signal.size(); ++i) {
    const double v = s.signal[i];
    if (v < s.signal[i - 1] && v <= s.signal[i + 1] && 1.0 - v >= min_depth)
      out.push_back({s.freqs[i], 1.0 - v});
  }
  return out;
}

std::vector<double> degenerate_triplets(double a_hf) {
  return {-2.0 * a_hf, -a_hf, 0.0, 0.0, a_hf, 2.0 * a_hf};
}

}  // namespace rabibeat
