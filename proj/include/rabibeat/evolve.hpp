#pragma once

// Time evolution: exact propagation of small time-independent Hamiltonians,
// incoherent hyperfine-ensemble Rabi traces, decay envelopes and the
// microwave power-drift model.

#include "rabibeat/spinmodel.hpp"
#include "rabibeat/trace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace rabibeat {

// Strictly increasing sample times in us.
class TimeGrid {
 public:
  // n_points samples spanning [t_start, t_end] inclusive.
  static TimeGrid uniform(double t_start, double t_end, std::size_t n_points);
  // Samples t_start + k*dt up to and including t_end (within 1e-9 dt).
  static TimeGrid stepped(double t_start, double t_end, double dt);
  static TimeGrid explicit_times(std::vector<double> times);

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }

 private:
  explicit TimeGrid(std::vector<double> times);
  std::vector<double> times_;
};

struct DecayModel {
  enum class Kind { none, exponential };
  Kind kind = Kind::none;
  double t1_rho = 0.0;  // us

  static DecayModel none() { return {}; }
  static DecayModel exponential(double t1_rho_us);
  double envelope(double t) const;
};

// Hyperfine manifolds driven incoherently: one detuning (or V half-splitting)
// per nuclear spin state, with occupation weights summing to 1.
struct ManifoldSpec {
  std::vector<double> detunings;  // MHz
  std::vector<double> weights;

  // Equal weights over the given detunings.
  static ManifoldSpec equal(std::vector<double> detunings);
  // {0, A_hf, 2 A_hf} with equal weights.
  static ManifoldSpec hyperfine_triplet(double a_hf);
};

void validate(const ManifoldSpec& m);

// Populations of every level at every grid time (rows = times, cols = levels)
// under exp(-i 2 pi H t).
Eigen::MatrixXd propagate(const Hamiltonian& h, const Eigen::VectorXcd& initial_state,
                          const TimeGrid& grid);

// Spin-flip probability of a detuned two-level drive:
// (omega0/W)^2 sin^2(pi W t), W = sqrt(omega0^2 + delta^2).
double two_level_population(double omega0, double delta, double t);

enum class AmplitudeMode {
  exact,         // (omega0/W)^2 sin^2(pi W t) per manifold
  equal_cosine,  // unit-amplitude (1 - cos(2 pi W t))/2 per manifold
};

// Weighted incoherent sum of independently driven two-level manifolds.  The
// decay envelope multiplies each component's oscillation about its mean.
SampledTrace rabi_trace_incoherent(double omega0, const ManifoldSpec& manifolds,
                                   const TimeGrid& grid, const DecayModel& decay,
                                   AmplitudeMode mode = AmplitudeMode::exact);

// Weighted incoherent sum of Delta = 0 V-systems (|0> population), one per
// manifold half-splitting.
SampledTrace rabi_trace_vtype(double lambda, const ManifoldSpec& manifolds, const TimeGrid& grid,
                              const DecayModel& decay);

// Relative microwave power P/P0 over wall-clock hours, linear between knots
// and constant outside.  An empty trajectory means P/P0 = 1.  Each sweep's
// power is additionally multiplied by (1 + jitter_sigma * N(0,1)).
struct DriftKnot {
  double wall_h = 0.0;
  double rel_power = 1.0;
};

struct DriftModel {
  std::vector<DriftKnot> trajectory;
  double jitter_sigma = 0.0;

  double rel_power_at(double wall_h) const;
  bool is_flat() const;
};

void validate(const DriftModel& d);

// Averaging over n_sweeps acquisitions evenly spread over duration_h.
// Random draws come from a single seeded stream in sweep order; the result
// does not depend on `threads`.
struct AcquisitionSchedule {
  std::size_t n_sweeps = 1;
  double duration_h = 24.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Relative power seen by each sweep.  Throws ValidationError if any is <= 0.
std::vector<double> drift_power_samples(const DriftModel& drift, const AcquisitionSchedule& acq);

// Rabi frequency scales as sqrt(P/P0).
inline double rabi_scale_for_power(double rel_power) { return std::sqrt(rel_power); }

// Regenerates the undrifted trace with every Rabi frequency multiplied by the
// given scale.
using TraceGenerator = std::function<SampledTrace(double rabi_scale)>;

// Average of `generate` over the sweeps' drifted Rabi scales.  When every
// sweep sees P/P0 = 1 the undrifted trace is returned unchanged.
SampledTrace apply_power_drift(const TraceGenerator& generate, const DriftModel& drift,
                               const AcquisitionSchedule& acq);

// First-order relative Rabi-period change, -dP/P / 2.
double drift_relation(double rel_power_change);
// Exact counterpart 1/sqrt(1 + dP/P) - 1.
double drift_relation_exact(double rel_power_change);

}  // namespace rabibeat
