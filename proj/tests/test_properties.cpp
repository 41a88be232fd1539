// Seeded randomized checks of model invariants.
#include "rabibeat/esr.hpp"
#include "rabibeat/evolve.hpp"
#include "rabibeat/imaging.hpp"
#include "rabibeat/signal.hpp"
#include "rabibeat/spinmodel.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace rabibeat;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
};

constexpr int kCases = 200;

}  // namespace

TEST_CASE("property: generalized Rabi frequency squares to the sum of squares") {
  Gen g(1);
  for (int i = 0; i < kCases; ++i) {
    const double o = g.log_uniform(1e-3, 1e3), d = g.log_uniform(1e-3, 1e3);
    const double w = rabi_frequency(o, d);
    CHECK(std::abs(w * w - (o * o + d * d)) <= 1e-12 * (o * o + d * d));
    CHECK(w >= std::max(o, d));
  }
}

TEST_CASE("property: small-detuning beat matches the exact shift to second order") {
  Gen g(2);
  for (int i = 0; i < kCases; ++i) {
    const double o = g.uniform(1.0, 100.0), d = g.uniform(0.0, 0.3) * o;
    const double exact = rabi_frequency(o, d) - o;
    CHECK(std::abs(exact - beat_shift_two_level(o, d)) <= std::pow(d, 4) / (8.0 * std::pow(o, 3)) * (1.0 + 1e-9) + 1e-13);
  }
}

TEST_CASE("property: beat inversion round trips") {
  Gen g(3);
  for (int i = 0; i < kCases; ++i) {
    const double base = g.uniform(1.0, 100.0), d = g.uniform(0.0, 0.5) * base;
    CHECK(std::abs(detuning_from_beat(beat_shift_two_level(base, d), base, BeatMode::single) - d) <= 1e-12 * (1.0 + d));
    CHECK(std::abs(detuning_from_beat(beat_shift_vtype(base, d), base, BeatMode::vtype) - d) <= 1e-12 * (1.0 + d));
  }
}

TEST_CASE("property: rotating-frame V Hamiltonian is Hermitian with the closed-form spectrum") {
  Gen g(4);
  for (int i = 0; i < kCases; ++i) {
    DriveParams p;
    p.lambda = g.uniform(0.1, 30.0);
    p.delta_small = g.uniform(0.0, 10.0);
    p.Delta = 0.0;
    const Hamiltonian h = build_rot_frame_h(p);
    CHECK((h.matrix() - h.matrix().adjoint()).norm() == 0.0);
    const Eigen::VectorXd ev = h.eigenvalues();
    const double w = vtype_eigenfrequency(p.lambda, p.delta_small);
    // det(H - x) = -x (x^2 - W^2) at Delta = 0.
    Eigen::Vector3d expect(-w, 0.0, w);
    Eigen::VectorXd got = ev;
    std::sort(got.data(), got.data() + got.size());
    // Oracle: dense solver on an independently assembled matrix.
    Eigen::Matrix3d m;
    m << 0, p.lambda, p.lambda, p.lambda, -p.delta_small, 0, p.lambda, 0, p.delta_small;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(got(k) - es.eigenvalues()(k)) <= 1e-12 * (1.0 + w));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(got(k) - expect(k)) <= 1e-12 * (1.0 + w));
  }
}

TEST_CASE("property: propagation preserves the norm") {
  Gen g(5);
  for (int i = 0; i < 30; ++i) {
    DriveParams p;
    p.lambda = g.uniform(0.5, 20.0);
    p.delta_small = g.uniform(0.0, 5.0);
    p.Delta = g.uniform(-5.0, 5.0);
    Eigen::VectorXcd psi(3);
    psi << std::complex<double>(g.uniform(-1, 1), g.uniform(-1, 1)), g.uniform(-1, 1), g.uniform(-1, 1);
    psi.normalize();
    const Eigen::MatrixXd pops = propagate(build_rot_frame_h(p), psi, TimeGrid::uniform(0.0, 3.0, 61));
    for (Eigen::Index r = 0; r < pops.rows(); ++r) CHECK(std::abs(pops.row(r).sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("property: V-type population stays in range") {
  Gen g(6);
  for (int i = 0; i < kCases; ++i) {
    const double l = g.uniform(0.1, 30.0), d = g.uniform(0.0, 10.0), t = g.uniform(0.0, 10.0);
    const double p = vtype_population(l, d, t);
    CHECK(p >= vtype_min_population(l, d) - 1e-12);
    CHECK(p <= 1.0 + 1e-12);
  }
}

TEST_CASE("property: single tone peak lands within half a bin") {
  Gen g(7);
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 256 + static_cast<std::size_t>(g.uniform(0.0, 1800.0));
    const double dt = g.uniform(0.002, 0.02);
    const double nyq = 0.5 / dt;
    const double f = g.uniform(0.05, 0.8) * nyq;
    const double phase = g.uniform(0.0, kTwoPi);
    SampledTrace t;
    for (std::size_t k = 0; k < n; ++k) {
      t.times.push_back(dt * static_cast<double>(k));
      t.values.push_back(std::cos(kTwoPi * f * t.times.back() + phase));
    }
    const Spectrum s = fft_spectrum(t);
    PeakOptions po;
    po.min_height_rel = 0.5;
    const PeakSet peaks = find_peaks(s, po);
    REQUIRE_FALSE(peaks.empty());
    const auto top = std::max_element(peaks.begin(), peaks.end(),
                                      [](const Peak& a, const Peak& b) { return a.magnitude < b.magnitude; });
    CHECK(std::abs(top->frequency - f) <= 0.5 * s.bin_width);
  }
}

TEST_CASE("property: two-tone beat recovered from the envelope") {
  Gen g(8);
  for (int i = 0; i < 20; ++i) {
    const double f0 = g.uniform(15.0, 30.0);
    const double beat = g.uniform(0.2, 0.8);
    SampledTrace t;
    for (double x = 0.0; x <= 25.0 + 1e-9; x += 0.005) {
      t.times.push_back(x);
      t.values.push_back(0.5 * (std::cos(kTwoPi * f0 * x) + std::cos(kTwoPi * (f0 + beat) * x)));
    }
    const BeatReport r = extract_beats(t, BeatMode::single);
    REQUIRE(r.beat_frequencies.size() >= 1);
    CHECK(std::abs(r.beat_frequencies.front() - beat) <= 0.05 * beat);
  }
}

TEST_CASE("property: an isolated ESR dip has depth equal to its contrast") {
  Gen g(9);
  for (int i = 0; i < kCases; ++i) {
    const double f = g.uniform(-10.0, 10.0), c = g.uniform(0.001, 0.999), w = g.uniform(0.1, 2.0);
    const EsrLineshape s = synthesize_esr({f}, {c}, w, {f});
    CHECK(std::abs(1.0 - s.signal[0] - c) <= 1e-12);
  }
}

TEST_CASE("property: resolution and budget identities") {
  Gen g(10);
  for (int i = 0; i < kCases; ++i) {
    const double gap = g.uniform(1.0, 50.0), t1 = g.log_uniform(1.0, 1e4), r = g.log_uniform(1.0, 1e4);
    const double n = oscillation_count(r, t1);
    CHECK(std::abs(resolution_from_count(gap, n) - 1e3 * gap / n) <= 1e-12 * 1e3 * gap / n);
    CHECK(std::abs(t1_limited_resolution(gap, t1, r) - resolution_from_count(gap, n)) <=
          1e-12 * resolution_from_count(gap, n));
    const ResolutionBudget b = resolution_budget(gap, t1, r);
    CHECK(std::abs(b.stability_required * b.n_osc - 1.0) <= 1e-12);
    const ResolutionEstimate e = resolution_estimate(r, std::max(n, 1.0));
    CHECK(std::abs(e.delta_angular - kTwoPi * e.delta_cyclic) <= 1e-12 * e.delta_angular);
  }
}

TEST_CASE("property: field map nodes invert exactly and the profile is mirror symmetric") {
  Gen g(11);
  for (int i = 0; i < 20; ++i) {
    WaveguideGeometry geo;
    geo.gap_um = g.uniform(2.0, 30.0);
    geo.cutoff_um = g.uniform(0.1, 1.0);
    geo.drive_scale_MHz = g.uniform(5.0, 50.0);
    const Branch br = i % 2 ? Branch::left : Branch::right;
    const FieldMap m = make_field_map(geo, 401, br);
    for (std::size_t k = 0; k < m.positions.size(); k += 7) {
      const double x = m.positions[k];
      const double mirror = field_profile(geo, geo.gap_um - x);
      CHECK(std::abs(field_profile(geo, x) - mirror) <= 1e-12 * mirror);
      if (x >= m.region_lo && x <= m.region_hi) CHECK(position_from_rabi(m.rabi[k], m, 0.0).x_um == x);
    }
  }
}

TEST_CASE("property: linear drift relation is second-order accurate") {
  Gen g(12);
  for (int i = 0; i < kCases; ++i) {
    const double x = g.uniform(-0.5, 0.5);
    CHECK(std::abs(drift_relation(x) - drift_relation_exact(x)) <= x * x);
    CHECK(drift_relation(x) * x <= 0.0);
  }
}

TEST_CASE("property: a monotone power ramp never lengthens the envelope decay") {
  ManifoldSpec one = ManifoldSpec::equal({0.0});
  const TimeGrid grid = TimeGrid::stepped(0.0, 40.0, 0.005);
  auto gen = [&](double scale) {
    return rabi_trace_incoherent(22.2 * scale, one, grid, DecayModel::none());
  };
  AcquisitionSchedule acq;
  acq.n_sweeps = 200;
  acq.seed = 1;
  DriftModel flat;
  flat.trajectory = {{0.0, 1.0}, {24.0, 1.0}};
  flat.jitter_sigma = 1e-3;
  const SampledTrace base = apply_power_drift(gen, flat, acq);
  const auto ref = envelope_decay_time(base, 22.2);
  REQUIRE(ref.has_value());
  for (double slope : {0.001, 0.003, 0.01}) {
    DriftModel ramp = flat;
    ramp.trajectory = {{0.0, 1.0}, {24.0, 1.0 + slope}};
    const SampledTrace t = apply_power_drift(gen, ramp, acq);
    const auto d = envelope_decay_time(t, 22.2);
    if (d) CHECK(*d <= *ref * (1.0 + 1e-9));
  }
}
