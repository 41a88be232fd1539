#include "rabibeat/signal.hpp"

#include "fft.hpp"
#include "rabibeat/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rabibeat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<double> window_coefficients(Window w, std::size_t n) {
  std::vector<double> c(n, 1.0);
  if (w == Window::hann && n > 1)
    for (std::size_t i = 0; i < n; ++i)
      c[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1));
  return c;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Amplitude spectrum of arbitrary uniformly sampled data.
Spectrum amplitude_spectrum(const std::vector<double>& x, double dt, const SpectrumOptions& opts) {
  const std::size_t n = x.size();
  const std::size_t pad = std::max<std::size_t>(1, opts.zero_pad);
  const std::vector<double> w = window_coefficients(opts.window, n);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

  std::vector<double> xw(n);
  for (std::size_t i = 0; i < n; ++i) xw[i] = x[i] * w[i];
  const auto bins = detail::rfft(xw, pad * n);

  Spectrum s;
  s.window = opts.window;
  s.zero_pad = pad;
  s.bin_width = 1.0 / (static_cast<double>(n) * dt);
  const double df = 1.0 / (static_cast<double>(pad * n) * dt);
  s.freqs.resize(bins.size());
  s.magnitudes.resize(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    s.freqs[k] = df * static_cast<double>(k);
    s.magnitudes[k] = (k == 0 ? 1.0 : 2.0) * std::abs(bins[k]) / wsum;
  }
  return s;
}

}  // namespace

double Spectrum::magnitude_at(double f) const {
  if (freqs.size() < 2 || f < freqs.front() || f > freqs.back()) return 0.0;
  const double pos = (f - freqs.front()) / step();
  const auto i = std::min(static_cast<std::size_t>(pos), freqs.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return magnitudes[i] + frac * (magnitudes[i + 1] - magnitudes[i]);
}

Spectrum fft_spectrum(const SampledTrace& trace, const SpectrumOptions& opts) {
  validate(trace);
  if (trace.size() < 8) throw ValidationError("spectrum needs at least 8 samples", "trace");
  const auto dt = uniform_step(trace.times);
  if (!dt) throw ValidationError("non-uniform sampling grid; resample before spectral analysis", "trace.times");

  const double m = mean(trace.values);
  std::vector<double> x(trace.values.size());
  std::transform(trace.values.begin(), trace.values.end(), x.begin(), [m](double v) { return v - m; });
  return amplitude_spectrum(x, *dt, opts);
}

PeakSet find_peaks(const Spectrum& s, const PeakOptions& opts) {
  PeakSet out;
  const std::size_t n = s.magnitudes.size();
  if (n < 3) return out;
  const double f_max = opts.f_max < 0.0 ? s.nyquist() : opts.f_max;

  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (s.freqs[i] >= opts.f_min && s.freqs[i] <= f_max) top = std::max(top, s.magnitudes[i]);
  if (top <= 1e-12) return out;
  const double threshold = opts.min_height_rel * top;

  PeakSet candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double f = s.freqs[i];
    if (f < opts.f_min || f > f_max) continue;
    const double a = s.magnitudes[i - 1], b = s.magnitudes[i], c = s.magnitudes[i + 1];
    if (!(b > a && b >= c) || b < threshold) continue;
    Peak p{f, b, false};
    const double denom = a - 2.0 * b + c;
    if (opts.interpolate && denom < 0.0) {
      const double shift = 0.5 * (a - c) / denom;
      p.frequency = f + shift * s.step();
      p.magnitude = b - 0.25 * (a - c) * shift;
      p.interpolated = true;
    }
    candidates.push_back(p);
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Peak& x, const Peak& y) { return x.magnitude > y.magnitude; });
  for (const Peak& p : candidates) {
    const bool clash = std::any_of(out.begin(), out.end(), [&](const Peak& q) {
      return std::abs(q.frequency - p.frequency) < opts.min_separation;
    });
    if (!clash) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const Peak& x, const Peak& y) { return x.frequency < y.frequency; });
  return out;
}

const char* to_string(BeatMode m) { return m == BeatMode::single ? "single" : "vtype"; }

BeatMode beat_mode_from_string(const std::string& s) {
  if (s == "single") return BeatMode::single;
  if (s == "vtype") return BeatMode::vtype;
  throw ValidationError("expected 'single' or 'vtype', got '" + s + "'", "analysis.mode");
}

double detuning_from_beat(double beat, double base, BeatMode mode) {
  if (!(beat >= 0.0)) throw ValidationError("beat must be non-negative");
  if (!(base > 0.0)) throw ValidationError("base frequency must be positive");
  return mode == BeatMode::single ? std::sqrt(2.0 * base * beat) : std::sqrt(0.5 * base * beat);
}

namespace {

// |analytic signal|^2 of x restricted to [lo, hi] MHz, with raised-cosine
// band edges of width `taper`.
std::vector<double> band_envelope_power(const std::vector<double>& x, double dt, double lo, double hi,
                                        double taper) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> cx(x.begin(), x.end());
  auto spec = detail::fft(cx);
  const double df = 1.0 / (static_cast<double>(n) * dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = df * static_cast<double>(k);
    double gain = 0.0;
    if (k > 0 && k < (n + 1) / 2 && f > lo - taper && f < hi + taper) {
      gain = 2.0;
      if (f < lo) gain *= 0.5 + 0.5 * std::cos(M_PI * (lo - f) / taper);
      if (f > hi) gain *= 0.5 + 0.5 * std::cos(M_PI * (f - hi) / taper);
    }
    spec[k] *= gain;
  }
  const auto z = detail::ifft(spec);
  std::vector<double> e(n);
  const double norm = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = std::norm(z[i] * norm);
  return e;
}

// e / exp(q(t)) - 1 with q the least-squares quadratic through log e.
// Also returns, through slow_excursion, the peak-to-peak size of the quadratic
// part of the log trend after its linear part: modulation slower than the trace.
std::vector<double> relative_modulation(const std::vector<double>& t, const std::vector<double>& e,
                                        double* slow_excursion) {
  const std::size_t n = e.size();
  const double peak = *std::max_element(e.begin(), e.end());
  const double floor = std::max(peak * 1e-12, 1e-300);
  const double t0 = t.front();
  const double span = t.back() - t.front();

  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (t[i] - t0) / span;
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = u;
    a(static_cast<Eigen::Index>(i), 2) = u * u;
    y(static_cast<Eigen::Index>(i)) = std::log(std::max(e[i], floor));
  }
  const Eigen::Vector3d q = a.colPivHouseholderQr().solve(y);
  // u^2 - u + 1/6 spans [-1/12, 1/6] on [0, 1].
  if (slow_excursion) *slow_excursion = std::abs(q(2)) * 0.25;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (t[i] - t0) / span;
    out[i] = std::max(e[i], floor) / std::exp(q(0) + q(1) * u + q(2) * u * u) - 1.0;
  }
  return out;
}

}  // namespace

BeatReport extract_beats(const SampledTrace& trace, BeatMode mode, const BeatOptions& opts) {
  BeatReport report;
  report.mode = mode;

  const Spectrum spec = fft_spectrum(trace, opts.spectrum);
  const double dt = *uniform_step(trace.times);
  const double length = trace.duration();

  PeakOptions base_opts;
  base_opts.f_min = 2.0 * spec.bin_width;
  const PeakSet all = find_peaks(spec, base_opts);
  if (all.empty()) {
    report.diagnostics.push_back("no oscillation found in the spectrum");
    return report;
  }
  const Peak base = *std::max_element(all.begin(), all.end(),
                                      [](const Peak& a, const Peak& b) { return a.magnitude < b.magnitude; });
  report.base_frequency = base.frequency;

  const double lo = base.frequency * (1.0 - opts.band_rel);
  const double hi = base.frequency * (1.0 + opts.band_rel);

  PeakOptions band_opts;
  band_opts.f_min = lo;
  band_opts.f_max = hi;
  band_opts.min_height_rel = 0.1;
  band_opts.min_separation = spec.bin_width;
  report.fft_peaks = find_peaks(spec, band_opts);
  for (const Peak& p : report.fft_peaks)
    if (std::abs(p.frequency - base.frequency) > 0.5 * spec.step())
      report.fft_beats.push_back(std::abs(p.frequency - base.frequency));
  std::sort(report.fft_beats.begin(), report.fft_beats.end());

  // Envelope of the band around the base line.
  const double m = mean(trace.values);
  std::vector<double> x(trace.values.size());
  std::transform(trace.values.begin(), trace.values.end(), x.begin(), [m](double v) { return v - m; });
  const std::vector<double> power = band_envelope_power(x, dt, lo, hi, 0.05 * base.frequency);
  double slow = 0.0;
  const std::vector<double> modulation = relative_modulation(trace.times, power, &slow);

  SpectrumOptions env_opts{Window::hann, 8};
  const Spectrum env_spec = amplitude_spectrum(modulation, dt, env_opts);

  PeakOptions mod_opts;
  mod_opts.f_min = 1.0 / length;
  mod_opts.f_max = base.frequency * opts.band_rel;
  mod_opts.min_height_rel = 0.0;
  mod_opts.min_separation = env_spec.bin_width;
  // Window sidelobes of strong beats sit a few percent below them; the relative
  // floor keeps them out.  Leakage from a beat slower than the trace is judged
  // against the curvature of the trend.
  const PeakSet candidates = find_peaks(env_spec, mod_opts);
  double strongest = slow;
  for (const Peak& p : candidates) strongest = std::max(strongest, p.magnitude);
  PeakSet lines;
  for (const Peak& p : candidates)
    if (p.magnitude >= opts.min_modulation && p.magnitude >= opts.min_line_rel * strongest) lines.push_back(p);
  report.envelope_peaks = lines;
  if (slow > 0.0 && std::any_of(candidates.begin(), candidates.end(), [&](const Peak& p) {
        return p.magnitude >= opts.min_modulation && p.magnitude < opts.min_line_rel * slow;
      }))
    report.diagnostics.push_back("envelope varies on a time scale longer than the trace; weak lines treated as leakage");

  if (lines.empty()) {
    std::ostringstream os;
    os << "no envelope modulation above " << opts.min_modulation << " between " << mod_opts.f_min
       << " MHz (one beat period per trace length) and " << mod_opts.f_max << " MHz";
    report.diagnostics.push_back(os.str());
    return report;
  }

  // Spectral support of a beat: the larger of the base-line neighbours at +-f.
  auto support = [&](double f) {
    return std::max(spec.magnitude_at(base.frequency + f), spec.magnitude_at(base.frequency - f));
  };

  // A line that is the sum or difference of two others is ambiguous; drop the
  // member of such a triple with the least support beside the base line.
  const double tol = 0.75 * env_spec.bin_width;
  bool pruned = true;
  while (pruned && lines.size() >= 3) {
    pruned = false;
    for (std::size_t i = 0; i < lines.size() && !pruned; ++i)
      for (std::size_t j = i + 1; j < lines.size() && !pruned; ++j)
        for (std::size_t k = 0; k < lines.size() && !pruned; ++k) {
          if (k == i || k == j) continue;
          if (std::abs(lines[i].frequency + lines[j].frequency - lines[k].frequency) > tol) continue;
          std::size_t weakest = i;
          for (std::size_t c : {j, k})
            if (support(lines[c].frequency) < support(lines[weakest].frequency)) weakest = c;
          std::ostringstream os;
          os << "modulation at " << lines[weakest].frequency
             << " MHz treated as a combination of two other beats";
          report.diagnostics.push_back(os.str());
          lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(weakest));
          pruned = true;
        }
  }

  for (const Peak& p : lines) report.beat_frequencies.push_back(p.frequency);
  for (double b : report.beat_frequencies) {
    report.recovered_detunings.push_back(detuning_from_beat(b, base.frequency, mode));
    if (report.fft_beats.empty()) {
      std::ostringstream os;
      os << "beat " << b << " MHz is not resolved in the FFT";
      report.diagnostics.push_back(os.str());
      continue;
    }
    const double nearest = *std::min_element(report.fft_beats.begin(), report.fft_beats.end(),
                                             [b](double u, double v) { return std::abs(u - b) < std::abs(v - b); });
    if (std::abs(nearest - b) > opts.consistency_tol * b) {
      std::ostringstream os;
      os << "beat " << b << " MHz is not resolved in the FFT (nearest spacing " << nearest << " MHz)";
      report.diagnostics.push_back(os.str());
    }
  }
  std::sort(report.recovered_detunings.begin(), report.recovered_detunings.end());
  return report;
}

ResolutionEstimate resolution_estimate(double base, double n_oscillations) {
  if (!(base > 0.0)) throw ValidationError("base frequency must be positive");
  if (!(n_oscillations >= 1.0)) throw ValidationError("need at least one oscillation");
  const double root = std::sqrt(n_oscillations);
  return {base / root, kTwoPi * base / root};
}

double resolution_angular_from_times(double period_us, double t1_us) {
  if (!(period_us > 0.0) || !(t1_us > 0.0)) throw ValidationError("times must be positive");
  return kTwoPi / std::sqrt(period_us * t1_us);
}

std::vector<EnvelopeSample> envelope_amplitude(const SampledTrace& trace, double f_ref, double window_us) {
  validate(trace);
  if (!(f_ref > 0.0)) throw ValidationError("reference frequency must be positive");
  if (!(window_us > 0.0)) throw ValidationError("window must be positive");

  std::vector<EnvelopeSample> out;
  std::size_t start = 0;
  const std::size_t n = trace.size();
  while (start < n) {
    std::size_t end = start;
    while (end < n && trace.times[end] - trace.times[start] < window_us) ++end;
    if (end - start < 4 || trace.times[end - 1] - trace.times[start] < 0.5 * window_us) break;

    Eigen::MatrixXd a(static_cast<Eigen::Index>(end - start), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(end - start));
    for (std::size_t i = start; i < end; ++i) {
      const auto r = static_cast<Eigen::Index>(i - start);
      const double ph = kTwoPi * f_ref * trace.times[i];
      a(r, 0) = 1.0;
      a(r, 1) = std::cos(ph);
      a(r, 2) = std::sin(ph);
      y(r) = trace.values[i];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    out.push_back({0.5 * (trace.times[start] + trace.times[end - 1]), std::hypot(c(1), c(2))});
    start = end;
  }
  return out;
}

std::optional<double> envelope_decay_time(const SampledTrace& trace, double f_ref, double window_us) {
  const auto env = envelope_amplitude(trace, f_ref, window_us);
  if (env.size() < 3) throw ValidationError("trace too short for envelope analysis");

  double a0 = env[0].amplitude;
  if (env[1].amplitude < env[0].amplitude && env[1].amplitude > 0.0) {
    const double rate = std::log(env[0].amplitude / env[1].amplitude) / (env[1].t - env[0].t);
    a0 = env[0].amplitude * std::exp(rate * (env[0].t - trace.times.front()));
  }
  const double target = a0 / std::exp(1.0);
  for (std::size_t i = 1; i < env.size(); ++i) {
    if (env[i].amplitude > target) continue;
    const double la = std::log(env[i - 1].amplitude), lb = std::log(std::max(env[i].amplitude, 1e-300));
    const double lt = std::log(target);
    const double frac = la == lb ? 0.0 : (la - lt) / (la - lb);
    return env[i - 1].t + frac * (env[i].t - env[i - 1].t) - trace.times.front();
  }
  return std::nullopt;
}

double fit_tone_frequency(const SampledTrace& trace, double f_guess) {
  validate(trace);
  if (!(f_guess > 0.0)) throw ValidationError("initial frequency must be positive");
  const auto n = static_cast<Eigen::Index>(trace.size());
  const double t0 = trace.times.front();

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = trace.values[static_cast<std::size_t>(i)];

  // Linear amplitudes at the starting frequency.
  auto linear_fit = [&](double f) {
    Eigen::MatrixXd a(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ph = kTwoPi * f * (trace.times[static_cast<std::size_t>(i)] - t0);
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(ph);
      a(i, 2) = std::sin(ph);
    }
    return Eigen::Vector3d(a.colPivHouseholderQr().solve(y));
  };

  Eigen::Vector3d lin = linear_fit(f_guess);
  double f = f_guess;
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::MatrixXd j(n, 4);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = trace.times[static_cast<std::size_t>(i)] - t0;
      const double c = std::cos(kTwoPi * f * t), s = std::sin(kTwoPi * f * t);
      j(i, 0) = 1.0;
      j(i, 1) = c;
      j(i, 2) = s;
      j(i, 3) = kTwoPi * t * (-lin(1) * s + lin(2) * c);
      r(i) = y(i) - (lin(0) + lin(1) * c + lin(2) * s);
    }
    const Eigen::Vector4d step = j.colPivHouseholderQr().solve(r);
    lin += step.head<3>();
    f += step(3);
    if (std::abs(step(3)) <= 1e-15 * std::abs(f)) break;
  }
  return f;
}

}  // namespace rabibeat
