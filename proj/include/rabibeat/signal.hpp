#pragma once

// Inverse pipeline: spectra, peak and beat extraction, beat-to-detuning
// inversion, resolution estimate and decay measurement.

#include "rabibeat/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rabibeat {

enum class Window { rectangular, hann };

struct SpectrumOptions {
  Window window = Window::hann;
  std::size_t zero_pad = 4;  // transform length = zero_pad * n
};

// Single-sided amplitude spectrum of the mean-removed trace.  Magnitudes are
// normalized so a noiseless cosine of amplitude A peaks near A.
struct Spectrum {
  std::vector<double> freqs;       // MHz, 0 .. Nyquist, step = bin_width / zero_pad
  std::vector<double> magnitudes;
  Window window = Window::hann;
  double bin_width = 0.0;          // 1 / (n dt), MHz
  std::size_t zero_pad = 1;

  double step() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
  double nyquist() const { return freqs.empty() ? 0.0 : freqs.back(); }
  // Linear interpolation of the magnitude at f (0 outside the range).
  double magnitude_at(double f) const;
};

// Rejects non-uniform grids and traces shorter than 8 samples.
Spectrum fft_spectrum(const SampledTrace& trace, const SpectrumOptions& opts = {});

struct Peak {
  double frequency = 0.0;  // MHz
  double magnitude = 0.0;
  bool interpolated = false;
};

using PeakSet = std::vector<Peak>;  // ascending in frequency

struct PeakOptions {
  double min_height_rel = 0.05;  // fraction of the largest magnitude in range
  double min_separation = 0.0;   // MHz; the larger peak wins a conflict
  double f_min = 0.0;
  double f_max = -1.0;           // < 0: up to Nyquist
  bool interpolate = true;       // parabolic vertex through the three top bins
};

PeakSet find_peaks(const Spectrum& s, const PeakOptions& opts = {});

enum class BeatMode { single, vtype };

const char* to_string(BeatMode m);
BeatMode beat_mode_from_string(const std::string& s);

struct BeatReport {
  BeatMode mode = BeatMode::single;
  double base_frequency = 0.0;             // strongest spectral peak, MHz
  std::vector<double> beat_frequencies;    // envelope-derived, ascending, MHz
  std::vector<double> recovered_detunings; // ascending, MHz
  PeakSet fft_peaks;                       // peaks in the band around the base
  std::vector<double> fft_beats;           // FFT peak spacings from the base, MHz
  PeakSet envelope_peaks;                  // all modulation lines of the envelope
  std::vector<std::string> diagnostics;
};

struct BeatOptions {
  SpectrumOptions spectrum;
  double band_rel = 0.25;        // analysis band is base * (1 +- band_rel)
  double min_modulation = 0.02;  // smallest relative envelope modulation reported
  double min_line_rel = 0.1;     // and at least this fraction of the strongest line
  double consistency_tol = 0.15; // envelope vs FFT beat agreement
};

// Base frequency from the strongest FFT line; beats from the spectrum of the
// band-limited (analytic-signal) envelope.  Modulation lines explained as the
// difference of two other beats are dropped in favour of those with spectral
// support next to the base line.
BeatReport extract_beats(const SampledTrace& trace, BeatMode mode, const BeatOptions& opts = {});

// Inverse of beat_shift_two_level (sqrt(2 base beat)) or beat_shift_vtype
// (sqrt(base beat / 2)).
double detuning_from_beat(double beat, double base, BeatMode mode);

struct ResolutionEstimate {
  double delta_cyclic = 0.0;   // base / sqrt(N), MHz
  double delta_angular = 0.0;  // 2 pi base / sqrt(N), rad/us
};

ResolutionEstimate resolution_estimate(double base, double n_oscillations);
// Same quantity via 2 pi / sqrt(T T1) with T = 1/base.
double resolution_angular_from_times(double period_us, double t1_us);

// Lock-in amplitude of the component at f_ref over consecutive windows of
// `window_us`; returns (window centre, amplitude) pairs.
struct EnvelopeSample {
  double t = 0.0;
  double amplitude = 0.0;
};
std::vector<EnvelopeSample> envelope_amplitude(const SampledTrace& trace, double f_ref, double window_us);

// Time at which the oscillation envelope first falls to 1/e of its initial
// value (initial value extrapolated from the first two windows); nullopt if it
// never does within the trace.
std::optional<double> envelope_decay_time(const SampledTrace& trace, double f_ref,
                                          double window_us = 0.5);

// Least-squares single-tone fit c + a cos(2 pi f t) + b sin(2 pi f t) refined
// by Gauss-Newton from f_guess.  Returns the fitted frequency.
double fit_tone_frequency(const SampledTrace& trace, double f_guess);

}  // namespace rabibeat
