// Serial against OpenMP for the three parallel kernels: Monte Carlo shots,
// bootstrap replicates and sweep points.
#include <benchmark/benchmark.h>

#include "ioncoupler/detection.hpp"
#include "ioncoupler/harness.hpp"
#include "ioncoupler/noise.hpp"

using namespace ioncoupler;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel" : "serial"); }

void BM_Shots(benchmark::State& state) {
  const ScenarioConfig cfg = default_scenario(Scenario::parity);
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  GateProblem p = two_loop_problem(wp, cfg.drive, nm.omega_bar + cfg.drive.sideband_offset, FockDims{8, 8});
  p.evolve.check_leakage = false;
  NoiseConfig n = cfg.noise;
  for (auto _ : state) benchmark::DoNotOptimize(run_shots(p, n, 8, 1, exec_of(state)).rho);
  label(state);
}

void BM_Bootstrap(benchmark::State& state) {
  const CountModel m = default_count_model();
  HistogramSet set;
  std::mt19937_64 rng(3);
  for (double ph : calibration_phases(13)) set.calibration.push_back({ph, synthesize_histogram(m, ramsey_populations(ph), 400, rng)});
  set.data.push_back(synthesize_histogram(m, Populations{0.45, 0.1, 0.45}, 400, rng));
  const Pipeline pipe = [](const HistogramSet& s) {
    const ProbabilityEstimator w = fit_estimators(phase_offset_correct(s.calibration).corrected);
    const auto p = infer_probabilities(s.data[0], w);
    return std::vector<double>{p.p[0], p.p[1], p.p[2]};
  };
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_error(set, pipe, 100, 1, exec_of(state)).standard_error);
  label(state);
}

void BM_CrossingSweep(benchmark::State& state) {
  ScenarioConfig cfg = default_scenario(Scenario::crossing);
  cfg.well_detuning.points = 3;
  cfg.sideband_detuning.points = 21;
  for (auto _ : state) benchmark::DoNotOptimize(run_crossing_scan(cfg, exec_of(state)).summary);
  label(state);
}

}  // namespace

BENCHMARK(BM_Shots)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossingSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
