#include "rabibeat/evolve.hpp"

#include "rabibeat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace rabibeat {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ValidationError("time grid needs at least 2 points", "grid");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw ValidationError("non-finite sample time", "grid");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw ValidationError("sample times must be strictly increasing", "grid");
  }
}

TimeGrid TimeGrid::uniform(double t_start, double t_end, std::size_t n_points) {
  if (n_points < 2) throw ValidationError("need at least 2 points", "grid.n_points");
  if (!(t_end > t_start)) throw ValidationError("must exceed grid.t_start_us", "grid.t_end_us");
  std::vector<double> t(n_points);
  const double step = (t_end - t_start) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) t[i] = t_start + step * static_cast<double>(i);
  t.back() = t_end;
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::stepped(double t_start, double t_end, double dt) {
  if (!(dt > 0.0)) throw ValidationError("must be positive", "grid.dt_us");
  if (!(t_end > t_start)) throw ValidationError("must exceed grid.t_start_us", "grid.t_end_us");
  const auto n = static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9)) + 1;
  if (n < 2) throw ValidationError("duration shorter than one step", "grid.dt_us");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_start + dt * static_cast<double>(i);
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::explicit_times(std::vector<double> times) { return TimeGrid(std::move(times)); }

DecayModel DecayModel::exponential(double t1_rho_us) {
  if (!(t1_rho_us > 0.0)) throw ValidationError("must be positive", "decay.t1_rho_us");
  return {Kind::exponential, t1_rho_us};
}

double DecayModel::envelope(double t) const {
  return kind == Kind::exponential ? std::exp(-t / t1_rho) : 1.0;
}

ManifoldSpec ManifoldSpec::equal(std::vector<double> detunings) {
  ManifoldSpec m;
  const auto n = detunings.size();
  m.detunings = std::move(detunings);
  m.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  return m;
}

ManifoldSpec ManifoldSpec::hyperfine_triplet(double a_hf) {
  return equal({0.0, a_hf, 2.0 * a_hf});
}

void validate(const ManifoldSpec& m) {
  if (m.detunings.empty()) throw ValidationError("at least one manifold is required", "manifolds");
  if (m.weights.size() != m.detunings.size())
    throw ValidationError("weights and detunings differ in length", "manifolds.weights");
  double sum = 0.0;
  for (double w : m.weights) {
    if (!(w >= 0.0)) throw ValidationError("weights must be non-negative", "manifolds.weights");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("weights must sum to 1", "manifolds.weights");
  for (double d : m.detunings)
    if (!std::isfinite(d) || d < 0.0)
      throw ValidationError("detunings must be finite and non-negative", "manifolds.detunings_MHz");
}

Eigen::MatrixXd propagate(const Hamiltonian& h, const Eigen::VectorXcd& initial_state,
                          const TimeGrid& grid) {
  if (initial_state.size() != h.dim()) throw ValidationError("state dimension does not match Hamiltonian");
  if (std::abs(initial_state.squaredNorm() - 1.0) > 1e-9)
    throw ValidationError("initial state is not normalized");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix());
  const Eigen::MatrixXcd& vecs = es.eigenvectors();
  const Eigen::VectorXd& energies = es.eigenvalues();
  const Eigen::VectorXcd coeffs = vecs.adjoint() * initial_state;

  Eigen::MatrixXd pops(static_cast<Eigen::Index>(grid.size()), h.dim());
  Eigen::VectorXcd phased(h.dim());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.times()[k];
    for (Eigen::Index j = 0; j < h.dim(); ++j)
      phased(j) = coeffs(j) * std::polar(1.0, -kTwoPi * energies(j) * t);
    pops.row(static_cast<Eigen::Index>(k)) = (vecs * phased).cwiseAbs2().transpose();
  }
  return pops;
}

double two_level_population(double omega0, double delta, double t) {
  const double w = rabi_frequency(omega0, std::abs(delta));
  const double s = std::sin(M_PI * w * t);
  return (omega0 * omega0) / (w * w) * s * s;
}

namespace {

SampledTrace make_trace(const TimeGrid& grid, const ManifoldSpec& manifolds, const DecayModel& decay) {
  SampledTrace out;
  out.times = grid.times();
  out.values.assign(grid.size(), 0.0);
  out.meta.detunings = manifolds.detunings;
  out.meta.weights = manifolds.weights;
  if (decay.kind == DecayModel::Kind::exponential) {
    out.meta.decay_kind = "exponential";
    out.meta.t1_rho = decay.t1_rho;
  }
  return out;
}

}  // namespace

SampledTrace rabi_trace_incoherent(double omega0, const ManifoldSpec& manifolds, const TimeGrid& grid,
                                   const DecayModel& decay, AmplitudeMode mode) {
  if (!(omega0 > 0.0)) throw ValidationError("must be positive", "drive.omega0_MHz");
  validate(manifolds);

  SampledTrace out = make_trace(grid, manifolds, decay);
  out.meta.experiment = "rabi-single";
  out.meta.drive_kind = "two-level";
  out.meta.omega0 = omega0;
  out.meta.amplitude_mode = mode == AmplitudeMode::exact ? "exact" : "equal_cosine";

  for (std::size_t m = 0; m < manifolds.detunings.size(); ++m) {
    const double w = rabi_frequency(omega0, manifolds.detunings[m]);
    const double amp = mode == AmplitudeMode::exact ? (omega0 * omega0) / (w * w) : 1.0;
    const double weight = manifolds.weights[m];
    // amp * sin^2(pi w t) = amp/2 - amp/2 cos(2 pi w t); decay acts on the cosine.
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = out.times[k];
      out.values[k] += weight * 0.5 * amp * (1.0 - std::cos(kTwoPi * w * t) * decay.envelope(t));
    }
  }
  return out;
}

SampledTrace rabi_trace_vtype(double lambda, const ManifoldSpec& manifolds, const TimeGrid& grid,
                              const DecayModel& decay) {
  if (!(lambda > 0.0)) throw ValidationError("must be positive", "drive.lambda_MHz");
  validate(manifolds);

  SampledTrace out = make_trace(grid, manifolds, decay);
  out.meta.experiment = "rabi-vtype";
  out.meta.drive_kind = "vtype";
  out.meta.lambda = lambda;

  for (std::size_t m = 0; m < manifolds.detunings.size(); ++m) {
    const double d = manifolds.detunings[m];
    const double w2 = 2.0 * lambda * lambda + d * d;
    const double a = d * d / w2;
    const double b = 2.0 * lambda * lambda / w2;
    // (a + b cos x)^2 averages to a^2 + b^2/2 over a period.
    const double mean = a * a + 0.5 * b * b;
    const double weight = manifolds.weights[m];
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = out.times[k];
      const double pop = vtype_population(lambda, d, t);
      out.values[k] += weight * (mean + (pop - mean) * decay.envelope(t));
    }
  }
  return out;
}

double DriftModel::rel_power_at(double wall_h) const {
  if (trajectory.empty()) return 1.0;
  if (wall_h <= trajectory.front().wall_h) return trajectory.front().rel_power;
  if (wall_h >= trajectory.back().wall_h) return trajectory.back().rel_power;
  const auto it = std::upper_bound(trajectory.begin(), trajectory.end(), wall_h,
                                   [](double h, const DriftKnot& k) { return h < k.wall_h; });
  const DriftKnot& hi = *it;
  const DriftKnot& lo = *(it - 1);
  const double f = (wall_h - lo.wall_h) / (hi.wall_h - lo.wall_h);
  return lo.rel_power + f * (hi.rel_power - lo.rel_power);
}

bool DriftModel::is_flat() const {
  if (jitter_sigma != 0.0) return false;
  return std::all_of(trajectory.begin(), trajectory.end(),
                     [](const DriftKnot& k) { return k.rel_power == 1.0; });
}

void validate(const DriftModel& d) {
  for (std::size_t i = 0; i < d.trajectory.size(); ++i) {
    if (!(d.trajectory[i].rel_power > 0.0))
      throw ValidationError("relative power must be positive", "drift.trajectory");
    if (i > 0 && !(d.trajectory[i].wall_h > d.trajectory[i - 1].wall_h))
      throw ValidationError("knot times must be strictly increasing", "drift.trajectory");
  }
  if (!(d.jitter_sigma >= 0.0) || !std::isfinite(d.jitter_sigma))
    throw ValidationError("must be finite and non-negative", "drift.jitter_sigma");
}

std::vector<double> drift_power_samples(const DriftModel& drift, const AcquisitionSchedule& acq) {
  validate(drift);
  if (acq.n_sweeps == 0) throw ValidationError("must be at least 1", "drift.sweeps");
  if (!(acq.duration_h >= 0.0)) throw ValidationError("must be non-negative", "drift.duration_h");

  std::mt19937_64 rng(acq.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> power(acq.n_sweeps);
  for (std::size_t k = 0; k < acq.n_sweeps; ++k) {
    const double wall =
        acq.n_sweeps > 1 ? acq.duration_h * static_cast<double>(k) / static_cast<double>(acq.n_sweeps - 1)
                         : 0.0;
    double p = drift.rel_power_at(wall);
    if (drift.jitter_sigma > 0.0) p *= 1.0 + drift.jitter_sigma * gauss(rng);
    if (!(p > 0.0)) throw ValidationError("drifted power became non-positive", "drift.jitter_sigma");
    power[k] = p;
  }
  return power;
}

SampledTrace apply_power_drift(const TraceGenerator& generate, const DriftModel& drift,
                               const AcquisitionSchedule& acq) {
  const std::vector<double> power = drift_power_samples(drift, acq);
  if (std::all_of(power.begin(), power.end(), [](double p) { return p == 1.0; })) return generate(1.0);

  // Fixed-size chunks summed in sweep order, then combined in chunk order, so
  // the result is independent of the thread count.
  constexpr std::size_t kChunk = 32;
  const std::size_t n_chunks = (power.size() + kChunk - 1) / kChunk;
  SampledTrace reference = generate(rabi_scale_for_power(power[0]));
  const std::size_t len = reference.values.size();
  std::vector<std::vector<double>> partial(n_chunks, std::vector<double>(len, 0.0));

  auto work = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < n_chunks; c += stride) {
      const std::size_t end = std::min(power.size(), (c + 1) * kChunk);
      for (std::size_t k = c * kChunk; k < end; ++k) {
        const SampledTrace tr = k == 0 ? reference : generate(rabi_scale_for_power(power[k]));
        if (tr.values.size() != len) throw ValidationError("generator changed trace length");
        for (std::size_t i = 0; i < len; ++i) partial[c][i] += tr.values[i];
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(acq.threads, static_cast<unsigned>(n_chunks)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SampledTrace out = std::move(reference);
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (const auto& chunk : partial)
    for (std::size_t i = 0; i < len; ++i) out.values[i] += chunk[i];
  const double inv = 1.0 / static_cast<double>(power.size());
  for (double& v : out.values) v *= inv;
  out.meta.labels.push_back("power-drift average over " + std::to_string(power.size()) + " sweeps");
  return out;
}

double drift_relation(double rel_power_change) {
  if (!(std::abs(rel_power_change) < 1.0)) throw ValidationError("|dP/P| must be below 1");
  return -0.5 * rel_power_change + 0.0;  // +0.0: no negative zero
}

double drift_relation_exact(double rel_power_change) {
  if (!(std::abs(rel_power_change) < 1.0)) throw ValidationError("|dP/P| must be below 1");
  return 1.0 / std::sqrt(1.0 + rel_power_change) - 1.0;
}

}  // namespace rabibeat
