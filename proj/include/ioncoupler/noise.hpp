#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ioncoupler/dressed.hpp"
#include "ioncoupler/exec.hpp"
#include "ioncoupler/propagator.hpp"
#include "ioncoupler/wells.hpp"

namespace ioncoupler {

// Per-shot noise channels. Rates and spreads are angular where they are
// frequencies.
struct NoiseConfig {
  double heating_rate = 0.0;         // quanta/s per ion
  double drift_sigma = 0.0;          // spread of delta, rad/s
  double common_drift_sigma = 0.0;   // spread of both wells together, rad/s
  double intensity_rel_sigma = 0.0;  // relative spread of Omega_s
  double spont_emission_prob = 0.0;  // per ion, per gate
  double spam_epsilon = 0.0;         // two-ion preparation error probability

  bool is_noiseless() const;
  void validate() const;
};

// Everything one shot needs besides the noise draw.
struct GateProblem {
  WellPair wells;
  DriveParams drive;
  double target_frequency = 0.0;  // absolute, fixed by the laser
  Schedule schedule;              // durations are not re-derived per shot
  FockDims dims;
  double thermal_nbar = 0.0;
  SpinKet initial_spin = down_down();
  EvolveOptions evolve;
  double max_frequency_ratio = 2.0;
};

// Build the nominal problem around a schedule from two_loop_schedule.
GateProblem two_loop_problem(const WellPair& wells, const DriveParams& drive,
                             double target_frequency, FockDims dims = {});

struct ShotResult {
  SpinDensity rho;
  Populations pops;
  double n_str = 0.0;
  double n_com = 0.0;
  long steps = 0;
  std::optional<QuantumState> final_state;
};

struct Ensemble {
  SpinDensity rho = SpinDensity::Zero();
  Populations pops;
  double n_str = 0.0;
  double n_com = 0.0;
  long steps = 0;
  long shots = 0;
  std::vector<SpinDensity> shot_rho;  // filled when requested
  double fidelity(const SpinKet& target) const;
  // Standard error of a per-shot scalar observable; zero without shot_rho.
  double standard_error(const std::function<double(const SpinDensity&)>& f) const;
};

// Preparation flip probability per ion so that the pair is wrong with
// probability epsilon.
double per_ion_flip_probability(double epsilon);

ShotResult run_shot(const GateProblem& problem, const NoiseConfig& noise, std::uint64_t seed,
                    std::uint64_t shot, bool keep_state = false);

// Shots run independently from substreams of `seed`; the ensemble is
// summed in shot order, so serial and parallel results are identical.
// A noiseless problem is simulated once.
Ensemble run_shots(const GateProblem& problem, const NoiseConfig& noise, long shots,
                   std::uint64_t seed, Exec exec = Exec::parallel, bool keep_shots = false);

Ensemble run_two_loop_gate(const WellPair& wells, const DriveParams& drive,
                           double target_frequency, const NoiseConfig& noise, long shots,
                           std::uint64_t seed, FockDims dims = {}, double thermal_nbar = 0.0,
                           Exec exec = Exec::parallel);

// Ensemble made of explicit weighted spin states.
SpinDensity mixture(const std::vector<std::pair<double, SpinKet>>& parts);

}  // namespace ioncoupler
