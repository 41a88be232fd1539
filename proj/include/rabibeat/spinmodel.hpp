#pragma once

// NV ground-state spin model: S=1 Hamiltonian, rotating-frame V-system and
// the closed-form Rabi / beat relations.
//
// Units: every public frequency is cyclic MHz, every time is in us.  Trig
// and propagation convert to angular frequency (x 2 pi) internally.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rabibeat {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct NVParams {
  double D = 2870.0;           // zero-field splitting, MHz
  double E = 0.0;              // strain splitting, MHz
  double gamma_e = 2.8;        // g*beta/h, MHz per Gauss
  double B_axial = 0.0;        // field along the NV axis, Gauss
  double A_hf = 2.18;          // 14N hyperfine splitting, MHz
};

// Throws ValidationError on hard violations.  Soft conditions (E/D above
// 0.01, where equal branch matrix elements stop being a good approximation)
// are returned as warnings.
std::vector<std::string> validate(const NVParams& p);

struct DriveParams {
  double lambda = 0.0;         // coupling matrix element, MHz
  double carrier_freq = 0.0;   // microwave frequency, MHz
  double Delta = 0.0;          // carrier detuning from the V midpoint, MHz
  double delta_small = 0.0;    // half-splitting of the two upper levels, MHz
};

std::vector<std::string> validate(const DriveParams& d);

// Dense Hermitian operator in cyclic MHz.  Construction checks hermiticity
// to 1e-12 relative to the largest entry.
class Hamiltonian {
 public:
  explicit Hamiltonian(Eigen::MatrixXcd m);

  const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  std::complex<double> operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  // Ascending eigenvalues, MHz.
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::MatrixXcd m_;
};

struct TransitionFrequencies {
  double f_minus = 0.0;  // m_s = 0 -> -1 branch (lower), MHz
  double f_plus = 0.0;   // m_s = 0 -> +1 branch (upper), MHz
};

// Full S=1 Hamiltonian D(Sz^2 - 2/3) + E(Sx^2 - Sy^2) + gamma_e B Sz in the
// |+1>,|0>,|-1> basis.
Hamiltonian nv_ground_state_hamiltonian(const NVParams& p);
TransitionFrequencies transition_frequencies(const NVParams& p);

// Detuned Rabi frequency sqrt(omega0^2 + delta^2).
double rabi_frequency(double omega0, double delta);

// Small-detuning shift delta^2 / (2 omega0) of a single driven transition.
double beat_shift_two_level(double omega0, double delta);
// Beat of a V-system relative to its base oscillation 2 sqrt(2) lambda:
// 2 delta^2 / omega0_base.
double beat_shift_vtype(double omega0_base, double delta);

// Set when delta/omega0 exceeds 0.3 and the quadratic shift is unreliable.
std::optional<std::string> small_detuning_warning(double omega0, double delta);

// Rotating-frame V-system, rows (0, l, l), (l, D-d, 0), (l, 0, D+d).
Hamiltonian build_rot_frame_h(const DriveParams& d);

// Rotating-frame two-level system with resonant Rabi frequency omega0 and
// drive detuning delta: the |1> population is (omega0/W)^2 sin^2(pi W t).
Hamiltonian two_level_hamiltonian(double omega0, double delta);

// sqrt(2 lambda^2 + delta^2): nonzero eigenvalue magnitude of the V-system at
// Delta = 0.
double vtype_eigenfrequency(double lambda, double delta);

// Population left in |0> for the Delta = 0 V-system started in |0>.
double vtype_population(double lambda, double delta, double t);

// Minimum of vtype_population over t: 0 unless delta^2 > 2 lambda^2.
double vtype_min_population(double lambda, double delta);

// Observed V-system base frequency (the cos^2 term): 2 sqrt(2 lambda^2 + delta^2).
inline double vtype_base_frequency(double lambda, double delta) {
  return 2.0 * vtype_eigenfrequency(lambda, delta);
}

}  // namespace rabibeat
