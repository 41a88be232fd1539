#include "rabibeat/errors.hpp"
#include "rabibeat/spinmodel.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace rabibeat;

namespace {

// S=1 spin matrices in the |+1>, |0>, |-1> basis, built independently of the
// library's Hamiltonian constructor.
struct Spin1 {
  Eigen::Matrix3cd sx, sy, sz;
  Spin1() {
    const double r = 1.0 / std::sqrt(2.0);
    const std::complex<double> i(0.0, 1.0);
    sx << 0, r, 0, r, 0, r, 0, r, 0;
    sy << 0, -i * r, 0, i * r, 0, -i * r, 0, i * r, 0;
    sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
  }
};

Eigen::Vector3d oracle_levels(double d, double e, double gb) {
  const Spin1 s;
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  const Eigen::Matrix3cd h = d * (s.sz * s.sz - 2.0 / 3.0 * id) + e * (s.sx * s.sx - s.sy * s.sy) + gb * s.sz;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd>(h).eigenvalues();
}

}  // namespace

TEST_CASE("transition frequencies at zero field are degenerate") {
  NVParams p;
  p.D = 2880.0;
  const auto f = transition_frequencies(p);
  CHECK(f.f_minus == doctest::Approx(2880.0).epsilon(1e-12));
  CHECK(f.f_plus == doctest::Approx(2880.0).epsilon(1e-12));
}

TEST_CASE("transition frequencies near 150 G") {
  NVParams p;
  p.D = 2880.0;
  p.gamma_e = 2.8;
  p.B_axial = 150.0;
  const auto f = transition_frequencies(p);
  CHECK(std::abs(f.f_minus - 2460.0) < 20.0);
  CHECK(std::abs(f.f_plus - 3300.0) < 20.0);
  CHECK(f.f_plus + f.f_minus == doctest::Approx(2.0 * p.D).epsilon(1e-14));
}

TEST_CASE("strain splits the zero-field line against a spin-matrix oracle") {
  NVParams p;
  p.D = 2880.0;
  p.E = 5.0;
  const auto f = transition_frequencies(p);
  const Eigen::Vector3d lv = oracle_levels(p.D, p.E, 0.0);  // ascending: m_s=0 lowest
  CHECK(f.f_minus == doctest::Approx(lv(1) - lv(0)).epsilon(1e-12));
  CHECK(f.f_plus == doctest::Approx(lv(2) - lv(0)).epsilon(1e-12));
  CHECK(f.f_minus == doctest::Approx(2875.0).epsilon(1e-12));
  CHECK(f.f_plus == doctest::Approx(2885.0).epsilon(1e-12));
}

TEST_CASE("strain plus field matches the oracle") {
  NVParams p;
  p.D = 2870.0;
  p.E = 3.0;
  p.gamma_e = 2.8;
  p.B_axial = 40.0;
  const auto f = transition_frequencies(p);
  const Eigen::Vector3d lv = oracle_levels(p.D, p.E, p.gamma_e * p.B_axial);
  CHECK(f.f_minus == doctest::Approx(lv(1) - lv(0)).epsilon(1e-12));
  CHECK(f.f_plus == doctest::Approx(lv(2) - lv(0)).epsilon(1e-12));
}

TEST_CASE("NV parameter validation") {
  NVParams p;
  CHECK(validate(p).empty());
  p.E = 40.0;
  CHECK(validate(p).size() == 1);
  p = NVParams{};
  p.D = -1.0;
  CHECK_THROWS_AS(validate(p), ValidationError);
  p = NVParams{};
  p.gamma_e = 0.0;
  CHECK_THROWS_AS(validate(p), ValidationError);
  p = NVParams{};
  p.A_hf = -0.1;
  CHECK_THROWS_AS(validate(p), ValidationError);
}

TEST_CASE("drive validation warns outside the rotating-wave regime") {
  DriveParams d{15.0, 2880.0, 0.0, 2.18};
  CHECK(validate(d).empty());
  d.carrier_freq = 100.0;
  CHECK(validate(d).size() == 1);
  d.lambda = 0.0;
  CHECK_THROWS_AS(validate(d), ValidationError);
}

TEST_CASE("rabi frequency") {
  CHECK(rabi_frequency(22.2, 0.0) == 22.2);
  CHECK(rabi_frequency(3.0, 4.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(rabi_frequency(22.2, 2.18) == doctest::Approx(22.30678).epsilon(1e-6));
  CHECK_THROWS_AS(rabi_frequency(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(rabi_frequency(-1.0, 1.0), ValidationError);
}

TEST_CASE("two-level beat shift") {
  CHECK(beat_shift_two_level(22.2, 2.18) == doctest::Approx(0.1070).epsilon(1e-3));
  CHECK(beat_shift_two_level(22.2, 4.36) == doctest::Approx(0.4281).epsilon(1e-3));
  CHECK(beat_shift_two_level(22.2, 0.0) == 0.0);
  CHECK_THROWS_AS(beat_shift_two_level(0.0, 1.0), ValidationError);
}

TEST_CASE("V-type beat shift") {
  CHECK(std::abs(beat_shift_vtype(42.0, 2.0) - 0.185) / 0.185 < 0.05);
  CHECK(std::abs(beat_shift_vtype(42.0, 4.1) - 0.812) / 0.812 < 0.05);
  CHECK(beat_shift_vtype(42.0, 0.0) == 0.0);
  CHECK_THROWS_AS(beat_shift_vtype(0.0, 1.0), ValidationError);
}

TEST_CASE("small-detuning warning") {
  CHECK_FALSE(small_detuning_warning(22.2, 4.36).has_value());
  CHECK(small_detuning_warning(10.0, 4.0).has_value());
}

TEST_CASE("rotating-frame Hamiltonian entries") {
  const Hamiltonian h = build_rot_frame_h({1.0, 0.0, 0.0, 0.0});
  Eigen::Matrix3d expected;
  expected << 0, 1, 1, 1, 0, 0, 1, 0, 0;
  CHECK((h.matrix().real() - expected).norm() == 0.0);
  CHECK(h.matrix().imag().norm() == 0.0);

  const Hamiltonian undriven = build_rot_frame_h({0.0, 0.0, 2.0, 1.0});
  Eigen::Matrix3d diag = Eigen::Vector3d(0.0, 1.0, 3.0).asDiagonal();
  CHECK((undriven.matrix().real() - diag).norm() == 0.0);
}

TEST_CASE("rotating-frame eigenvalues") {
  const double lambda = 15.0, delta = 2.18;
  const Eigen::VectorXd ev = build_rot_frame_h({lambda, 0.0, 0.0, delta}).eigenvalues();
  const double w = std::sqrt(2.0 * lambda * lambda + delta * delta);
  REQUIRE(ev.size() == 3);
  CHECK(std::abs(ev(0) + w) <= 1e-12 * w);
  CHECK(std::abs(ev(1)) <= 1e-12 * w);
  CHECK(std::abs(ev(2) - w) <= 1e-12 * w);
}

TEST_CASE("Hamiltonian rejects non-Hermitian input") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(Hamiltonian{m}, ValidationError);
  CHECK_THROWS_AS(Hamiltonian{Eigen::MatrixXcd::Zero(2, 3)}, ValidationError);
}

TEST_CASE("V-type eigenfrequency") {
  CHECK(vtype_eigenfrequency(10.0, 0.0) == doctest::Approx(std::sqrt(2.0) * 10.0).epsilon(1e-15));
  CHECK(vtype_eigenfrequency(0.0, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  // Eigensolver value; the characteristic polynomial gives sqrt(454.7524).
  const Eigen::VectorXd ev = build_rot_frame_h({15.0, 0.0, 0.0, 2.18}).eigenvalues();
  CHECK(vtype_eigenfrequency(15.0, 2.18) == doctest::Approx(ev(2)).epsilon(1e-12));
  CHECK(vtype_eigenfrequency(15.0, 2.18) == doctest::Approx(21.324924384391146).epsilon(1e-12));
}

TEST_CASE("V-type population closed form") {
  CHECK(vtype_population(15.0, 2.18, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double lambda = 12.0;
  const double t_quarter = 1.0 / (4.0 * std::sqrt(2.0) * lambda);  // cos^2 reaches 0
  CHECK(std::abs(vtype_population(lambda, 0.0, t_quarter)) < 1e-15);
  CHECK_THROWS_AS(vtype_population(lambda, 0.0, -1.0), ValidationError);

  // The amplitude delta^2 + 2 lambda^2 cos crosses zero unless delta^2 > 2 lambda^2.
  CHECK(vtype_min_population(lambda, 4.36) == 0.0);
  const double big = 20.0;
  const double expected = std::pow((big * big - 2 * lambda * lambda) / (big * big + 2 * lambda * lambda), 2);
  CHECK(vtype_min_population(lambda, big) == doctest::Approx(expected).epsilon(1e-14));
  for (double delta : {4.36, big}) {
    const double lo = vtype_min_population(lambda, delta);
    double seen = 1.0;
    for (int k = 0; k < 20000; ++k) {
      const double v = vtype_population(lambda, delta, 0.0001 * k);
      seen = std::min(seen, v);
      CHECK(v >= lo - 1e-14);
      CHECK(v <= 1.0 + 1e-14);
    }
    CHECK(seen == doctest::Approx(lo).scale(1.0).epsilon(1e-4));
  }
  CHECK(vtype_base_frequency(lambda, 0.0) == doctest::Approx(2.0 * std::sqrt(2.0) * lambda).epsilon(1e-15));
}

TEST_CASE("two-level Hamiltonian") {
  const Hamiltonian h = two_level_hamiltonian(22.2, 2.18);
  CHECK(h.dim() == 2);
  const Eigen::VectorXd ev = h.eigenvalues();
  CHECK(ev(1) - ev(0) == doctest::Approx(rabi_frequency(22.2, 2.18)).epsilon(1e-13));
}
