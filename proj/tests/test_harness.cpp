#include <doctest.h>

#include <cmath>

#include "ioncoupler/errors.hpp"
#include "ioncoupler/harness.hpp"

using namespace ioncoupler;

namespace {

std::vector<double> column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  REQUIRE(it != t.columns.end());
  const auto k = static_cast<std::size_t>(it - t.columns.begin());
  std::vector<double> out;
  for (const auto& r : t.rows) out.push_back(r[k]);
  return out;
}

ScenarioConfig quiet(Scenario s) {
  ScenarioConfig c = default_scenario(s);
  c.noise = {};
  c.thermal_nbar = 0.0;
  c.shots = 1;
  c.detection.enabled = false;
  return c;
}

}  // namespace

TEST_CASE("sweeps and scenario names") {
  const Sweep s{1.0, 2.0, 5};
  const auto v = s.values();
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 1.0);
  CHECK(v.back() == 2.0);
  CHECK(v[2] == doctest::Approx(1.5));
  CHECK(parse_scenario("gate") == Scenario::gate_evolution);
  CHECK(parse_scenario("gate_evolution") == Scenario::gate_evolution);
  CHECK(parse_scenario("parity") == Scenario::parity);
  CHECK(std::string(scenario_name(Scenario::gate_evolution)) == "gate");
  CHECK_THROWS_AS(parse_scenario("ramsey"), ConfigError);
}

TEST_CASE("CSV rendering") {
  Table t;
  t.columns = {"x", "y"};
  t.rows = {{0.1, 2.0}, {-1e-7, 1.0 / 3.0}};
  CHECK(to_csv(t) == "x,y\r\n0.1,2\r\n-1e-07,0.3333333333333333\r\n");
}

TEST_CASE("peak finding") {
  std::vector<double> x, y;
  for (int i = 0; i <= 200; ++i) {
    const double xi = -10 + 0.1 * i;
    x.push_back(xi);
    y.push_back(std::exp(-std::pow(xi - 3.02, 2)) + 0.6 * std::exp(-std::pow(xi + 4.47, 2)) + 0.05 * std::exp(-std::pow(xi + 10, 2) * 4));
  }
  const auto p = find_peaks(x, y, 0.3);
  REQUIRE(p.size() == 2);
  CHECK(p[0].position == doctest::Approx(-4.47).epsilon(2e-3));
  CHECK(p[1].position == doctest::Approx(3.02).epsilon(2e-3));
  CHECK(find_peaks(x, y, 0.7).size() == 1);
}

TEST_CASE("oscillation fit") {
  std::vector<double> t, y;
  for (int i = 0; i < 60; ++i) {
    t.push_back(i * 1e-5);
    y.push_back(0.5 + 0.4 * std::cos(3.1e4 * i * 1e-5 - 0.3));
  }
  const OscillationFit f = fit_oscillation(t, y, 1e4, 1e5);
  CHECK(f.omega == doctest::Approx(3.1e4).epsilon(1e-6));
  CHECK(f.amplitude == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(f.mean == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("parity analysis of ideal and mixed states") {
  const auto phases = Sweep{0.0, kTwoPi, 25}.values();
  const ParityAnalysis a = analyse_parity(pure_density(entangled_target()), phases);
  CHECK(a.fit.amplitude == doctest::Approx(1.0));
  CHECK(std::abs(a.fit.offset) < 1e-12);
  CHECK(a.fidelity == doctest::Approx(1.0));
  // period pi
  for (std::size_t k = 0; k + 12 < phases.size(); ++k) CHECK(a.parity[k] == doctest::Approx(a.parity[k + 12]).scale(1.0));
  const ParityAnalysis m = analyse_parity(SpinDensity::Identity() / 4.0, phases);
  CHECK(std::abs(m.fit.amplitude) < 1e-12);
  for (double p : m.parity) CHECK(p == doctest::Approx(m.parity[0]));
}

TEST_CASE("defaults resolve") {
  const ScenarioConfig g = default_scenario(Scenario::parity);
  const NormalModes nm = normal_modes(g.resolved_wells());
  CHECK(angular_to_hz(nm.omega_ex) == doctest::Approx(6.5e3).epsilon(1e-9));
  CHECK(g.resolved_wells().d0 * 1e6 == doctest::Approx(24.6732).epsilon(1e-5));
  const ScenarioConfig e = default_scenario(Scenario::exchange);
  CHECK(e.resolved_wells().d0 == 30e-6);
  CHECK(angular_to_hz(effective_kappa(nominal_drive(g))) == doctest::Approx(443.08).epsilon(2e-3));
}

TEST_CASE("crossing scan at zero and large well detuning") {
  ScenarioConfig c = quiet(Scenario::crossing);
  const double wex = normal_modes(c.resolved_wells()).omega_ex;
  c.well_detuning = {0.0, 4.0 * wex, 2};
  const ScanResult r = run_crossing_scan(c, Exec::serial);
  CHECK(r.table.rows.size() == 2 * 41);
  REQUIRE(r.peaks);
  const auto centre = column(*r.peaks, "peak_hz");
  const auto row = column(*r.peaks, "delta_hz");
  REQUIRE(centre.size() == 4);
  CHECK(row[0] == 0.0);
  // symmetric about the mean frequency
  CHECK(std::abs(centre[0] + centre[1]) < 0.25 * r.summary.at("spectral_resolution_hz"));
  CHECK(r.summary.at("splitting_rel_error") < 0.1);
  CHECK(r.summary.at("splitting_hz") == doctest::Approx(2 * angular_to_hz(wex)).epsilon(0.1));
  // far detuned: close to the bare well frequencies
  CHECK(std::abs(centre[3]) == doctest::Approx(angular_to_hz(std::hypot(4.0 * wex, wex))).epsilon(0.05));
  CHECK(r.steps > 0);
}

TEST_CASE("exchange oscillation") {
  ScenarioConfig c = quiet(Scenario::exchange);
  const double tau = normal_modes(c.resolved_wells()).exchange_time();
  c.delay = {0.0, 4.0 * tau, 17};
  const ScanResult r = run_exchange(c, Exec::serial);
  const auto s = column(r.table, "p_down_addressed");
  REQUIRE(s.size() == 17);
  for (std::size_t k = 0; k + 8 < s.size(); ++k) CHECK(std::abs(s[k] - s[k + 8]) < 1e-3);
  CHECK(r.summary.at("tau_ex_fit_us") == doctest::Approx(tau * 1e6).epsilon(0.01));
  CHECK(r.summary.at("contrast_early") == doctest::Approx(1.0).epsilon(0.02));

  ScenarioConfig both = c;
  both.drive.addressing = {true, true};
  CHECK_THROWS_AS(run_exchange(both), ConfigError);
}

TEST_CASE("exchange contrast decays with drift") {
  ScenarioConfig c = quiet(Scenario::exchange);
  c.noise.drift_sigma = hz_to_angular(1000);
  c.shots = 20;
  c.delay = {0.0, 1.2e-3, 25};
  const ScanResult r = run_exchange(c);
  CHECK(r.summary.at("contrast_late") < r.summary.at("contrast_early") - 0.05);
}

TEST_CASE("noiseless gate evolution") {
  ScenarioConfig c = quiet(Scenario::gate_evolution);
  c.dims = {8, 8};
  const double tl = loop_duration(normal_modes(c.resolved_wells()), 2);
  c.coupling_duration = {0.0, 2.0 * tl, 3};
  const ScanResult r = run_gate_evolution(c, Exec::serial);
  const auto p0 = column(r.table, "p0"), p1 = column(r.table, "p1"), p2 = column(r.table, "p2");
  CHECK(p2[0] == doctest::Approx(1.0));
  CHECK(p0[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(p0[2] + p2[2] >= 0.99);
  CHECK(p1[2] <= 0.01);
  CHECK(r.summary.at("final_fidelity") >= 0.99);
}

TEST_CASE("noiseless parity scan and determinism") {
  ScenarioConfig c = quiet(Scenario::parity);
  c.dims = {8, 8};
  c.analysis_phase.points = 13;
  const ScanResult a = run_parity_scan(c, Exec::serial);
  CHECK(a.summary.at("fidelity") >= 0.99);
  CHECK(a.summary.at("free_fit_frequency") == doctest::Approx(2.0).epsilon(0.01));
  CHECK(a.summary.at("fidelity") <= 0.5 * a.summary.at("p0_plus_p2") + 0.5 + 1e-12);
  CHECK(a.summary.at("maximally_entangling") == 1.0);

  c.noise.drift_sigma = hz_to_angular(300);
  c.shots = 3;
  const ScanResult s = run_parity_scan(c, Exec::serial);
  const ScanResult p = run_parity_scan(c, Exec::parallel);
  CHECK(to_csv(s.table) == to_csv(p.table));
  CHECK(s.summary == p.summary);
}

TEST_CASE("detection variant adds bootstrap columns") {
  ScenarioConfig c = quiet(Scenario::parity);
  c.dims = {8, 8};
  c.analysis_phase.points = 7;
  c.detection.enabled = true;
  c.detection.bootstrap_resamples = 10;
  c.detection.injected_phase_offset = 5.0 * kPi / 180;
  const ScanResult r = run_parity_scan(c);
  CHECK(column(r.table, "parity_det").size() == 7);
  CHECK(r.summary.at("fidelity_det_se") > 0.0);
  CHECK(r.summary.at("fidelity_det") == doctest::Approx(r.summary.at("fidelity")).epsilon(0.1));
  CHECK(std::abs(r.summary.at("phase_offset_deg") - 5.0) < 3.0);
}
