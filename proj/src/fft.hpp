#pragma once

// Thin FFTW wrapper.  Plans are created with FFTW_ESTIMATE under a global
// lock (the FFTW planner is not thread-safe); execution is lock-free.

#include <complex>
#include <vector>

namespace rabibeat::detail {

// Forward transform of real input zero-padded to n; returns n/2+1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n);

// Unnormalized complex transforms (sign -1 forward, +1 inverse).
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

// Smallest 2^a 3^b 5^c >= n.
std::size_t good_size(std::size_t n);

}  // namespace rabibeat::detail
