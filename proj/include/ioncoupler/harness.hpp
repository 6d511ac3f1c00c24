#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ioncoupler/detection.hpp"
#include "ioncoupler/dressed.hpp"
#include "ioncoupler/noise.hpp"
#include "ioncoupler/propagator.hpp"
#include "ioncoupler/wells.hpp"

namespace ioncoupler {

struct Sweep {
  double start = 0.0;
  double stop = 0.0;
  int points = 2;
  std::vector<double> values() const;  // inclusive, evenly spaced
};

struct DetectionSettings {
  bool enabled = false;
  std::array<double, 3> mean_counts{0.4, 4.4, 9.0};
  double dispersion = 1.3;
  long shots_per_histogram = 400;
  int calibration_points = 13;
  int bootstrap_resamples = 100;
  double injected_phase_offset = 0.0;  // rad, added to the Ramsey calibration
  double lambda_per_histogram = 1e-3;
  CountModel model() const;
};

enum class Scenario { crossing, exchange, gate_evolution, parity };

const char* scenario_name(Scenario s);
// Accepts "gate" for gate_evolution. ConfigError for anything else.
Scenario parse_scenario(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::gate_evolution;
  WellPair wells;
  // When set, the spacing is solved from this exchange rate (rad/s) and
  // wells.d0 is ignored.
  std::optional<double> exchange_rate_target;
  double max_frequency_ratio = 2.0;
  DriveParams drive;
  NoiseConfig noise;
  FockDims dims;
  double thermal_nbar = 0.0;
  long shots = 1;
  std::uint64_t seed = 1;
  DetectionSettings detection;
  double max_phase_step = 0.05;
  // top-Fock-level population that aborts a shot
  double leakage_threshold = 1e-6;

  // crossing
  Sweep well_detuning{-kTwoPi * 15e3, kTwoPi * 15e3, 11};   // delta, rad/s
  Sweep sideband_detuning{-kTwoPi * 25e3, kTwoPi * 25e3, 41};  // relative to omega_bar
  double probe_duration = 120e-6;
  double peak_prominence = 0.3;  // fraction of the scan-row maximum
  // exchange
  Sweep delay{0.0, 1.2e-3, 61};
  // gate_evolution
  Sweep coupling_duration{0.0, 360e-6, 13};
  // parity
  Sweep analysis_phase{0.0, kTwoPi, 25};

  // wells with d0 resolved from exchange_rate_target when present
  WellPair resolved_wells() const;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScanResult {
  Table table;
  std::optional<Table> peaks;  // crossing only
  std::map<std::string, double> summary;
  std::vector<std::string> notes;
  long steps = 0;  // propagator steps over all shots and points
};

// RFC 4180 style, header row first, shortest round-trip numbers.
std::string to_csv(const Table& t);

// DriveConfig at the nominal wells for the scenario's own drive block.
DriveConfig nominal_drive(const ScenarioConfig& cfg);

ScanResult run_crossing_scan(const ScenarioConfig& cfg, Exec exec = Exec::parallel);
ScanResult run_exchange(const ScenarioConfig& cfg, Exec exec = Exec::parallel);
ScanResult run_gate_evolution(const ScenarioConfig& cfg, Exec exec = Exec::parallel);
ScanResult run_parity_scan(const ScenarioConfig& cfg, Exec exec = Exec::parallel);
ScanResult run_scenario(const ScenarioConfig& cfg, Exec exec = Exec::parallel);

// Peaks of a sampled line, refined by a parabola through the three
// samples around each local maximum above prominence * max.
struct Peak {
  double position = 0.0;
  double height = 0.0;
};
std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double prominence);

// Signal a + b cos(w t) + c sin(w t) with w searched in [w_lo, w_hi].
struct OscillationFit {
  double omega = 0.0;
  double mean = 0.0;
  double amplitude = 0.0;
  double rms_residual = 0.0;
};
OscillationFit fit_oscillation(const std::vector<double>& t, const std::vector<double>& y,
                               double w_lo, double w_hi);

// Parity analysis of a gate output: ideal analysis pulses on rho.
struct ParityAnalysis {
  std::vector<double> phases;
  std::vector<double> parity;
  ParityFit fit;
  Populations pops;
  double fidelity = 0.0;  // (P2 + P0 + A) / 2
};
ParityAnalysis analyse_parity(const SpinDensity& rho, const std::vector<double>& phases);

// Infidelity contributed by each noise channel alone (relative to the
// noiseless run), plus the combined result.
struct NoiseBudget {
  double noiseless_fidelity = 0.0;
  double combined_fidelity = 0.0;
  std::map<std::string, double> contribution;
};
NoiseBudget noise_budget(const ScenarioConfig& cfg, long shots, Exec exec = Exec::parallel);

// Built-in configurations that reproduce the published setups.
ScenarioConfig default_scenario(Scenario s);

}  // namespace ioncoupler
