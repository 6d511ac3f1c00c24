// Randomised invariants. Each case draws its own fixed-seed inputs.
#include <doctest.h>

#include <cmath>
#include <random>

#include "ioncoupler/detection.hpp"
#include "ioncoupler/dressed.hpp"
#include "ioncoupler/harness.hpp"
#include "ioncoupler/wells.hpp"

using namespace ioncoupler;

namespace {

const double kBeMass = beryllium9_ion_mass_u() * kCodata2018.atomic_mass_unit;

WellPair random_wells(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WellPair wp;
  wp.mass_l = kBeMass * (1.0 + 0.3 * u(rng));
  wp.mass_r = kBeMass * (1.0 + 0.3 * u(rng));
  wp.charge = kCodata2018.elementary_charge;
  wp.omega_l = hz_to_angular(1e6 + 9e6 * u(rng));
  wp.omega_r = wp.omega_l * (0.7 + 0.6 * u(rng));
  wp.d0 = 15e-6 + 60e-6 * u(rng);
  return wp;
}

DriveConfig random_drive(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DriveConfig dc;
  dc.omega_c = 1e5 * (1.5 + u(rng));
  dc.omega_s = 1e5 * (1.5 + u(rng));
  dc.phi_c = 3 * u(rng);
  dc.phi_s = 3 * u(rng);
  dc.phi = 3 * u(rng);
  dc.eta_str = 0.2 + 0.1 * u(rng);
  dc.eta_com = 0.2 + 0.1 * u(rng);
  dc.theta_str = 1.5 * u(rng);
  dc.theta_com = dc.theta_str + kPi / 2;
  dc.delta_str = 4e4 * (1.2 + u(rng));
  dc.delta_com = -4e4 * (1.2 + u(rng));
  return dc;
}

}  // namespace

TEST_CASE("normal modes: sum rule, ordering and orthonormality") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 300; ++k) {
    const WellPair wp = random_wells(rng);
    const NormalModes nm = normal_modes(wp);
    const double scale = wp.omega_l + wp.omega_r;
    CHECK(std::abs(nm.omega_str + nm.omega_com - scale) <= 1e-12 * scale);
    CHECK(nm.omega_str >= nm.omega_com);
    CHECK(std::abs(nm.q_str[0] * nm.q_str[0] + nm.q_str[1] * nm.q_str[1] - 1.0) <= 1e-12);
    CHECK(std::abs(nm.q_com[0] * nm.q_com[0] + nm.q_com[1] * nm.q_com[1] - 1.0) <= 1e-12);
    CHECK(std::abs(nm.q_str[0] * nm.q_com[0] + nm.q_str[1] * nm.q_com[1]) <= 1e-12);
    CHECK(nm.splitting() == doctest::Approx(2 * std::hypot(nm.delta, nm.omega_ex)).epsilon(1e-12));
  }
}

TEST_CASE("dressed: displacement parity and phase symmetry") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const DriveConfig dc = random_drive(rng);
    for (const auto& [l, r] : kAllSpinPairs) {
      for (Mode m : {Mode::stretch, Mode::com}) {
        const cplx d = displacement_rate(dc, SpinPair(l, r), m);
        CHECK(std::abs(displacement_rate(dc, SpinPair(-l, -r), m) + d) <= 1e-12 * std::abs(dc.omega_s));
        const LoopRecord a = loop_integrals(dc, SpinPair(l, r), 3e-5);
        const LoopRecord b = loop_integrals(dc, SpinPair(-l, -r), 3e-5);
        CHECK(a.phase_str == doctest::Approx(b.phase_str));
        CHECK(a.phase_com == doctest::Approx(b.phase_com));
      }
    }
  }
}

TEST_CASE("dressed: loops close at the closure period") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double wex = hz_to_angular(2e3 + 1e4 * u(rng));
    const double w = hz_to_angular(4e6);
    const NormalModes nm = normal_modes(w, w, wex);
    DriveConfig dc = random_drive(rng);
    dc.delta_str = nm.omega_str - nm.omega_bar;
    dc.delta_com = nm.omega_com - nm.omega_bar;
    const Closure c = closure_period(dc);
    for (const auto& [l, r] : kAllSpinPairs) {
      const LoopRecord rec = loop_integrals(dc, SpinPair(l, r), c.period);
      const double scale = dc.omega_s / wex;
      CHECK(std::abs(rec.alpha_str) < 1e-9 * scale);
      CHECK(std::abs(rec.alpha_com) < 1e-9 * scale);
    }
  }
}

TEST_CASE("dressed: echo closure under a common detuning offset") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double w = hz_to_angular(4e6);
  for (int k = 0; k < 100; ++k) {
    const NormalModes nm = normal_modes(w, w, hz_to_angular(6.5e3));
    DriveConfig dc = random_drive(rng);
    dc.delta_str = nm.omega_str - nm.omega_bar;
    dc.delta_com = nm.omega_com - nm.omega_bar;
    Schedule s = two_loop_schedule(dc, nm);
    const double err = 0.2 * nm.omega_ex * u(rng);
    for (auto& seg : s.segments) seg.detuning_error = err;
    for (const auto& [l, r] : kAllSpinPairs) {
      CHECK(echo_displacement(dc, s, SpinPair(l, r)).max_abs() < 1e-10);
    }
  }
}

TEST_CASE("dressed: gate unitarity") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    SpinKet v;
    for (int i = 0; i < 4; ++i) v[i] = cplx(g(rng), g(rng));
    v.normalize();
    const SpinKet out = apply_effective_gate(v, 1e3 * g(rng), g(rng), 1e-3 * std::abs(g(rng)));
    CHECK(std::abs(out.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("detection: Ramsey normalisation and linear inference") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CountModel m = default_count_model();
  std::vector<CalibrationPoint> cal;
  for (double ph : calibration_phases(13)) cal.push_back({ph, synthesize_histogram(m, ramsey_populations(ph), 2000, rng)});
  const ProbabilityEstimator w = fit_estimators(cal);
  for (int k = 0; k < 100; ++k) {
    const double ph = kTwoPi * u(rng);
    CHECK(std::abs(ramsey_populations(ph).sum() - 1.0) < 1e-15);
    const double a = u(rng), b = u(rng) * (1 - a);
    const CountHistogram h1 = synthesize_histogram(m, Populations{a, b, 1 - a - b}, 50 + k, rng);
    const CountHistogram h2 = synthesize_histogram(m, ramsey_populations(ph), 80, rng);
    CountHistogram merged = h1;
    for (std::size_t i = 0; i < h2.h.size(); ++i) merged.add(static_cast<int>(i), h2.h[i]);
    const auto p1 = infer_probabilities(h1, w), p2 = infer_probabilities(h2, w), pm = infer_probabilities(merged, w);
    const double f = double(h1.total()) / merged.total();
    for (int c = 0; c < 3; ++c) CHECK(pm.p[c] == doctest::Approx(f * p1.p[c] + (1 - f) * p2.p[c]).epsilon(1e-12));
  }
}

TEST_CASE("harness: fidelity bound and parity frequency on random states") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto phases = Sweep{0.0, kTwoPi, 25}.values();
  for (int k = 0; k < 100; ++k) {
    Eigen::Matrix4cd a;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = cplx(g(rng), g(rng));
    SpinDensity rho = a * a.adjoint();
    rho /= rho.trace().real();
    const ParityAnalysis p = analyse_parity(rho, phases);
    CHECK(p.fidelity <= 0.5 * (p.pops.p0 + p.pops.p2) + 0.5 + 1e-12);
    if (std::abs(p.fit.amplitude) > 0.05) {
      CHECK(fit_parity_free(phases, p.parity).frequency == doctest::Approx(2.0).epsilon(0.01));
    }
  }
}
