#include "rabibeat/spinmodel.hpp"

#include "rabibeat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rabibeat {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

std::vector<std::string> validate(const NVParams& p) {
  if (!finite(p.D) || p.D <= 0.0) throw ValidationError("must be positive", "nv.D_MHz");
  if (!finite(p.E) || p.E < 0.0) throw ValidationError("must be non-negative", "nv.E_MHz");
  if (!finite(p.gamma_e) || p.gamma_e <= 0.0)
    throw ValidationError("must be positive", "nv.gamma_MHz_per_G");
  if (!finite(p.B_axial)) throw ValidationError("must be finite", "nv.B_axial_G");
  if (!finite(p.A_hf) || p.A_hf < 0.0) throw ValidationError("must be non-negative", "nv.A_hf_MHz");

  std::vector<std::string> warnings;
  if (p.E / p.D > 0.01) {
    std::ostringstream os;
    os << "E/D = " << p.E / p.D
       << " exceeds 0.01; equal V-branch matrix elements are no longer a good approximation";
    warnings.push_back(os.str());
  }
  return warnings;
}

std::vector<std::string> validate(const DriveParams& d) {
  if (!finite(d.lambda) || d.lambda <= 0.0) throw ValidationError("must be positive", "drive.lambda_MHz");
  if (!finite(d.delta_small) || d.delta_small < 0.0)
    throw ValidationError("must be non-negative", "drive.delta_MHz");
  if (!finite(d.Delta)) throw ValidationError("must be finite", "drive.Delta_MHz");
  if (!finite(d.carrier_freq) || d.carrier_freq < 0.0)
    throw ValidationError("must be non-negative", "drive.carrier_MHz");

  std::vector<std::string> warnings;
  if (d.carrier_freq > 0.0 && d.lambda / d.carrier_freq > 0.1) {
    std::ostringstream os;
    os << "lambda/carrier = " << d.lambda / d.carrier_freq
       << " exceeds 0.1; rotating wave approximation is questionable";
    warnings.push_back(os.str());
  }
  return warnings;
}

Hamiltonian::Hamiltonian(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw ValidationError("Hamiltonian must be square");
  if (!m_.allFinite()) throw ValidationError("Hamiltonian has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double defect = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-12 * scale) throw ValidationError("Hamiltonian is not Hermitian");
}

Eigen::VectorXd Hamiltonian::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Hamiltonian nv_ground_state_hamiltonian(const NVParams& p) {
  // Basis order |+1>, |0>, |-1>.
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  const double zeeman = p.gamma_e * p.B_axial;
  h(0, 0) = p.D / 3.0 + zeeman;
  h(1, 1) = -2.0 * p.D / 3.0;
  h(2, 2) = p.D / 3.0 - zeeman;
  // Sx^2 - Sy^2 only couples |+1> and |-1>.
  h(0, 2) = p.E;
  h(2, 0) = p.E;
  return Hamiltonian(h);
}

TransitionFrequencies transition_frequencies(const NVParams& p) {
  validate(p);
  const Hamiltonian h = nv_ground_state_hamiltonian(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::MatrixXcd& vecs = es.eigenvectors();

  // The m_s = 0 level is the eigenvector with the largest |0> weight.
  Eigen::Index zero = 0;
  for (Eigen::Index i = 1; i < 3; ++i)
    if (std::norm(vecs(1, i)) > std::norm(vecs(1, zero))) zero = i;

  double upper[2];
  int k = 0;
  for (Eigen::Index i = 0; i < 3; ++i)
    if (i != zero) upper[k++] = ev(i) - ev(zero);
  if (upper[0] > upper[1]) std::swap(upper[0], upper[1]);
  return {upper[0], upper[1]};
}

double rabi_frequency(double omega0, double delta) {
  if (!(omega0 > 0.0)) throw ValidationError("omega0 must be positive");
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  return std::sqrt(omega0 * omega0 + delta * delta);
}

double beat_shift_two_level(double omega0, double delta) {
  if (!(omega0 > 0.0)) throw ValidationError("omega0 must be positive");
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  return delta * delta / (2.0 * omega0);
}

double beat_shift_vtype(double omega0_base, double delta) {
  if (!(omega0_base > 0.0)) throw ValidationError("base frequency must be positive");
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  return 2.0 * delta * delta / omega0_base;
}

std::optional<std::string> small_detuning_warning(double omega0, double delta) {
  if (omega0 > 0.0 && delta / omega0 > 0.3) {
    std::ostringstream os;
    os << "delta/omega0 = " << delta / omega0 << " exceeds 0.3; quadratic beat shift is inaccurate";
    return os.str();
  }
  return std::nullopt;
}

Hamiltonian build_rot_frame_h(const DriveParams& d) {
  Eigen::Matrix3cd h;
  const double l = d.lambda;
  h << 0.0, l, l,
       l, d.Delta - d.delta_small, 0.0,
       l, 0.0, d.Delta + d.delta_small;
  return Hamiltonian(h);
}

Hamiltonian two_level_hamiltonian(double omega0, double delta) {
  if (!(omega0 > 0.0)) throw ValidationError("omega0 must be positive");
  Eigen::Matrix2cd h;
  h << -0.5 * delta, 0.5 * omega0,
       0.5 * omega0, 0.5 * delta;
  return Hamiltonian(h);
}

double vtype_eigenfrequency(double lambda, double delta) {
  return std::sqrt(2.0 * lambda * lambda + delta * delta);
}

double vtype_population(double lambda, double delta, double t) {
  if (!(t >= 0.0)) throw ValidationError("time must be non-negative");
  const double w2 = 2.0 * lambda * lambda + delta * delta;
  if (w2 == 0.0) return 1.0;
  const double amp = delta * delta + 2.0 * lambda * lambda * std::cos(kTwoPi * std::sqrt(w2) * t);
  return amp * amp / (w2 * w2);
}

double vtype_min_population(double lambda, double delta) {
  const double d2 = delta * delta;
  const double l2 = 2.0 * lambda * lambda;
  if (d2 + l2 == 0.0) return 1.0;
  if (d2 <= l2) return 0.0;
  const double r = (d2 - l2) / (d2 + l2);
  return r * r;
}

}  // namespace rabibeat
