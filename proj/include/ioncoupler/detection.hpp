#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ioncoupler/exec.hpp"
#include "ioncoupler/spin.hpp"

namespace ioncoupler {

struct CountDistribution {
  std::vector<double> pmf;  // pmf[i] = probability of i counts
  double mean() const;
  double variance() const;
};

// q[b] for b bright ions.
struct CountModel {
  std::array<CountDistribution, 3> q;
  std::array<double, 3> means() const;
  // P0 q0 + P1 q1 + P2 q2
  std::vector<double> mixture(const Populations& p) const;
};

// Over-dispersed counts: variance = dispersion * mean. The tail beyond
// cut-off mass is dropped and the rest renormalized.
CountDistribution negative_binomial(double mean, double dispersion, double tail = 1e-15);

CountModel default_count_model();

struct CountHistogram {
  std::vector<long> h;
  long total() const;
  double mean() const;
  void add(int bin, long n = 1);
};

// Ideal two-ion Ramsey outcome after two pi/2 pulses with relative phase phi.
Populations ramsey_populations(double phase);

// N draws from the mixture. Class and count are drawn from separate
// uniforms by inversion, so nearby probabilities give correlated samples.
CountHistogram synthesize_histogram(const CountModel& model, const Populations& probs, long n,
                                    std::mt19937_64& rng);
CountHistogram synthesize_histogram(const CountModel& model, const Populations& probs, long n,
                                    std::uint64_t seed);

struct CalibrationPoint {
  double phase = 0.0;
  CountHistogram hist;
};

struct ProbabilityEstimator {
  // w[b][i]; the last bin also collects all larger counts.
  std::array<std::vector<double>, 3> w;
  int bins() const { return static_cast<int>(w[0].size()); }
};

struct FitOptions {
  double lambda_per_histogram = 1e-3;  // ridge strength = this * calibration histograms
  int max_bins = 0;                    // 0: one bin per observed count
  double jitter = 1e-10;               // keeps the normal matrix definite for empty bins
};

// Least-squares weights reproducing the Ramsey model, regularized toward
// low variance on the completely mixed state. FitError when fewer than
// three distinct phases are given.
ProbabilityEstimator fit_estimators(const std::vector<CalibrationPoint>& calibration,
                                    const FitOptions& options = {});

// Rows q_b estimated from calibration histograms under the Ramsey model.
std::array<std::vector<double>, 3> estimate_count_distributions(
    const std::vector<CalibrationPoint>& calibration, int bins);

struct InferredProbabilities {
  std::array<double, 3> p{};
  std::array<double, 3> v{};
  bool out_of_range = false;  // some p outside [0, 1]; values left unclipped
  Populations populations() const { return {p[0], p[1], p[2]}; }
};

// P = sum w h / N and v = (sum w^2 h / N - P^2) / (N - 1). ParameterError for N < 2.
InferredProbabilities infer_probabilities(const CountHistogram& h, const ProbabilityEstimator& w);

struct PhaseOffset {
  double offset = 0.0;  // data at nominal phase phi follow the model at phi + offset
  double residual = 0.0;
  std::vector<CalibrationPoint> corrected;
};

PhaseOffset phase_offset_correct(const std::vector<CalibrationPoint>& calibration,
                                 double search_halfwidth = 0.5);

// Uniform grid of n phases in [0, 2 pi).
std::vector<double> calibration_phases(int n = 13);

// A cos(2 phi + phi0) + B by linear least squares.
struct ParityFit {
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double frequency = 2.0;
  double rms_residual = 0.0;
};
ParityFit fit_parity(const std::vector<double>& phases, const std::vector<double>& parity);
// Same model with the frequency free, searched over [f_lo, f_hi].
ParityFit fit_parity_free(const std::vector<double>& phases, const std::vector<double>& parity,
                          double f_lo = 1.0, double f_hi = 3.0);

// --- bootstrap --------------------------------------------------------------

CountHistogram resample(const CountHistogram& h, std::mt19937_64& rng);

struct HistogramSet {
  std::vector<CalibrationPoint> calibration;
  std::vector<CountHistogram> data;
};

using Pipeline = std::function<std::vector<double>(const HistogramSet&)>;

struct BootstrapResult {
  std::vector<double> estimate;  // pipeline on the original data
  std::vector<double> standard_error;
};

// Every histogram, calibration included, is resampled in each replicate.
BootstrapResult bootstrap_error(const HistogramSet& input, const Pipeline& pipeline,
                                int resamples = 100, std::uint64_t seed = 1,
                                Exec exec = Exec::parallel);

// --- fidelity from histograms -----------------------------------------------

struct FidelityEstimate {
  Populations pops;
  ParityFit parity;
  double fidelity = 0.0;
};

// Populations histogram plus one parity histogram per analysis phase.
FidelityEstimate estimate_fidelity(const ProbabilityEstimator& w, const CountHistogram& populations,
                                   const std::vector<double>& analysis_phases,
                                   const std::vector<CountHistogram>& parity_hists);

// --- state-preparation bias -------------------------------------------------

struct PrepBiasOptions {
  CountModel model = default_count_model();
  SpinDensity state = SpinDensity::Zero();  // zero: typical gate output
  long shots_per_histogram = 400;
  int calibration_points = 13;
  int analysis_points = 13;
  int trials = 200;
  std::uint64_t seed = 11;
  Exec exec = Exec::parallel;
};

struct PrepBias {
  double bias = 0.0;
  double standard_error = 0.0;
};

// Typical noisy gate output: mostly the target with population and coherence loss.
SpinDensity typical_gate_state();

// Fidelity overestimate caused by calibrating with per-ion preparation
// errors (pair error probability epsilon), from paired simulations with
// and without the error.
PrepBias prep_error_bias(double epsilon, const PrepBiasOptions& options = {});

// --- CSV --------------------------------------------------------------------

void write_histogram_csv(std::ostream& os, const CountHistogram& h);
CountHistogram read_histogram_csv(std::istream& is);
void write_estimator_csv(std::ostream& os, const ProbabilityEstimator& w);
ProbabilityEstimator read_estimator_csv(std::istream& is);

}  // namespace ioncoupler
