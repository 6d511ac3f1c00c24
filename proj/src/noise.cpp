#include "ioncoupler/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
}

Spin2 pauli(int k) {
  switch (k) {
    case 1:
      return pauli_x();
    case 2:
      return pauli_y();
    case 3:
      return pauli_z();
    default:
      return Spin2::Identity();
  }
}

}  // namespace

bool NoiseConfig::is_noiseless() const {
  return heating_rate == 0.0 && drift_sigma == 0.0 && common_drift_sigma == 0.0 &&
         intensity_rel_sigma == 0.0 && spont_emission_prob == 0.0 && spam_epsilon == 0.0;
}

void NoiseConfig::validate() const {
  if (!(heating_rate >= 0.0)) throw ParameterError("heating rate must be non-negative");
  if (!(drift_sigma >= 0.0) || !(common_drift_sigma >= 0.0)) {
    throw ParameterError("drift spreads must be non-negative");
  }
  if (!(intensity_rel_sigma >= 0.0)) throw ParameterError("intensity spread must be non-negative");
  require_probability(spont_emission_prob, "spontaneous emission probability");
  require_probability(spam_epsilon, "SPAM epsilon");
}

double Ensemble::fidelity(const SpinKet& target) const { return ioncoupler::fidelity(rho, target); }

double per_ion_flip_probability(double epsilon) { return 1.0 - std::sqrt(1.0 - epsilon); }

GateProblem two_loop_problem(const WellPair& wells, const DriveParams& drive,
                             double target_frequency, FockDims dims) {
  GateProblem p;
  p.wells = wells;
  p.drive = drive;
  p.target_frequency = target_frequency;
  p.dims = dims;
  const NormalModes nm = normal_modes(wells);
  p.schedule = two_loop_schedule(derive_drive(wells, nm, drive, target_frequency), nm);
  return p;
}

ShotResult run_shot(const GateProblem& problem, const NoiseConfig& noise, std::uint64_t seed,
                    std::uint64_t shot, bool keep_state) {
  noise.validate();
  if (!(problem.thermal_nbar >= 0.0)) throw ParameterError("thermal occupation must be >= 0");
  std::mt19937_64 rng = substream(seed, shot);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Quasi-static draws for the whole shot.
  const double x = noise.drift_sigma * normal(rng);
  const double y = noise.common_drift_sigma * normal(rng);
  const double scale = std::max(0.0, 1.0 + noise.intensity_rel_sigma * normal(rng));

  WellPair wp = problem.wells;
  wp.omega_l += -x + y;
  wp.omega_r += x + y;
  validate(wp, problem.max_frequency_ratio);
  const NormalModes nm = normal_modes(wp);
  DriveParams drive = problem.drive;
  drive.omega_s *= scale;
  const DriveConfig dc = derive_drive(wp, nm, drive, problem.target_frequency);
  Schedule schedule = problem.schedule;
  for (auto& seg : schedule.segments) seg.omega_s *= scale;

  SpinKet spin = problem.initial_spin;
  const double flip = per_ion_flip_probability(noise.spam_epsilon);
  const Spin2 id = Spin2::Identity();
  if (uniform(rng) < flip) spin = kron(pauli_x(), id) * spin;
  if (uniform(rng) < flip) spin = kron(id, pauli_x()) * spin;

  std::geometric_distribution<int> thermal(1.0 / (1.0 + problem.thermal_nbar));
  const int n_str = std::min(thermal(rng), std::max(0, problem.dims.n_str - 3));
  const int n_com = std::min(thermal(rng), std::max(0, problem.dims.n_com - 3));
  QuantumState psi = QuantumState::product(problem.dims, spin, n_str, n_com);

  EvolveOptions opts = problem.evolve;
  if (noise.heating_rate > 0.0) {
    std::exponential_distribution<double> wait(noise.heating_rate);
    const double t_end = schedule.total_duration();
    for (int ion = 0; ion < 2; ++ion) {
      for (double t = wait(rng); t < t_end; t += wait(rng)) {
        opts.events.push_back(
            {t, [dc, ion](double when, QuantumState& s) { apply_local_raise(s, dc, ion, when); }});
      }
    }
  }

  EvolveStats stats;
  psi = evolve(psi, dc, schedule, opts, &stats);

  for (int ion = 0; ion < 2; ++ion) {
    const bool hit = uniform(rng) < noise.spont_emission_prob;
    const int which = std::uniform_int_distribution<int>(0, 3)(rng);
    if (hit && which != 0) psi.apply_spin_local(pauli(which), ion);
  }

  ShotResult r;
  r.rho = psi.reduced_spin();
  r.pops = populations(r.rho);
  r.n_str = psi.occupation(Mode::stretch);
  r.n_com = psi.occupation(Mode::com);
  r.steps = stats.steps;
  if (keep_state) r.final_state = std::move(psi);
  return r;
}

double Ensemble::standard_error(const std::function<double(const SpinDensity&)>& f) const {
  const std::size_t n = shot_rho.size();
  if (n < 2) return 0.0;
  double m = 0.0, m2 = 0.0;
  for (const auto& r : shot_rho) {
    const double v = f(r);
    m += v;
    m2 += v * v;
  }
  m /= n;
  const double var = std::max(0.0, (m2 / n - m * m) * n / (n - 1.0));
  return std::sqrt(var / n);
}

Ensemble run_shots(const GateProblem& problem, const NoiseConfig& noise, long shots,
                   std::uint64_t seed, Exec exec, bool keep_shots) {
  if (shots <= 0) throw ParameterError("shots must be positive");
  Ensemble e;
  e.shots = shots;
  if (noise.is_noiseless() && problem.thermal_nbar == 0.0) {
    const ShotResult r = run_shot(problem, noise, seed, 0);
    e.rho = r.rho;
    e.n_str = r.n_str;
    e.n_com = r.n_com;
    e.steps = r.steps;
    e.pops = populations(e.rho);
    if (keep_shots) e.shot_rho.push_back(r.rho);
    return e;
  }
  std::vector<ShotResult> results(static_cast<std::size_t>(shots));
  for_each_index(shots, exec, [&](long i) {
    results[static_cast<std::size_t>(i)] = run_shot(problem, noise, seed, static_cast<std::uint64_t>(i));
  });
  for (const auto& r : results) {
    e.rho += r.rho;
    e.n_str += r.n_str;
    e.n_com += r.n_com;
    e.steps += r.steps;
  }
  const double inv = 1.0 / static_cast<double>(shots);
  e.rho *= inv;
  e.n_str *= inv;
  e.n_com *= inv;
  e.pops = populations(e.rho);
  if (keep_shots) {
    e.shot_rho.reserve(results.size());
    for (const auto& r : results) e.shot_rho.push_back(r.rho);
  }
  return e;
}

Ensemble run_two_loop_gate(const WellPair& wells, const DriveParams& drive,
                           double target_frequency, const NoiseConfig& noise, long shots,
                           std::uint64_t seed, FockDims dims, double thermal_nbar, Exec exec) {
  GateProblem p = two_loop_problem(wells, drive, target_frequency, dims);
  p.thermal_nbar = thermal_nbar;
  return run_shots(p, noise, shots, seed, exec);
}

SpinDensity mixture(const std::vector<std::pair<double, SpinKet>>& parts) {
  SpinDensity rho = SpinDensity::Zero();
  for (const auto& [w, ket] : parts) rho += w * pure_density(ket);
  return rho;
}

}  // namespace ioncoupler
