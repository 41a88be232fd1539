#pragma once

// Synthetic CW ESR spectra: unit-peak Lorentzian dips on a unity baseline.

#include <vector>

namespace rabibeat {

struct EsrLineshape {
  std::vector<double> freqs;   // MHz (absolute or detuning, as given)
  std::vector<double> signal;  // normalized fluorescence, clipped to [0, 1]
};

// Unit-peak Lorentzian with the given full width at half maximum.
double lorentzian(double offset, double fwhm);

// signal(f) = max(0, 1 - sum_i c_i L(f - f_i; fwhm)).  Contrasts must lie in
// (0, 1) and the linewidth must be positive.
EsrLineshape synthesize_esr(const std::vector<double>& transitions, const std::vector<double>& contrasts,
                            double linewidth_fwhm, const std::vector<double>& grid);

struct Dip {
  double frequency = 0.0;
  double depth = 0.0;  // 1 - signal at the local minimum
};

// Local minima of the lineshape deeper than min_depth, ascending in frequency.
std::vector<Dip> find_dips(const EsrLineshape& s, double min_depth = 1e-3);

// Lower triplet {-2a, -a, 0} and upper triplet {0, a, 2a}: the five-dip
// pattern seen when the branch splitting equals twice the hyperfine splitting.
std::vector<double> degenerate_triplets(double a_hf);

}  // namespace rabibeat
