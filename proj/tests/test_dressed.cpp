#include <doctest.h>

#include <cmath>

#include "ioncoupler/dressed.hpp"
#include "ioncoupler/errors.hpp"
#include "oracles/dense.hpp"
#include "oracles/quadrature.hpp"

using namespace ioncoupler;

namespace {

const double kWex = hz_to_angular(6.5e3);

// Resonant wells, sideband at omega_bar, equal eta: the idealised gate drive.
DriveConfig ideal_drive(double eta_omega_s = hz_to_angular(2.4e3), double phi = 0.0, double delta = 0.0) {
  const double w = hz_to_angular(4e6);
  const NormalModes nm = normal_modes(w - delta, w + delta, kWex);
  DriveConfig dc;
  dc.omega_c = hz_to_angular(23.1e3);
  dc.eta_str = dc.eta_com = 0.3;
  dc.omega_s = eta_omega_s / 0.3;
  dc.phi = phi;
  dc.delta_str = nm.omega_str - nm.omega_bar;
  dc.delta_com = nm.omega_com - nm.omega_bar;
  dc.theta_str = nm.theta_str;
  dc.theta_com = nm.theta_com;
  return dc;
}

NormalModes ideal_modes(double delta = 0.0) {
  const double w = hz_to_angular(4e6);
  return normal_modes(w - delta, w + delta, kWex);
}

WellPair be_pair(double d0) {
  const double m = beryllium9_ion_mass_u() * kCodata2018.atomic_mass_unit;
  return {m, m, kCodata2018.elementary_charge, hz_to_angular(4e6), hz_to_angular(4e6), d0};
}

// Direct evaluation of the displacement rate expression.
cplx rate_formula(const DriveConfig& dc, SpinPair sp, Mode m) {
  const cplx i(0, 1);
  const double th = dc.theta(m);
  return -(dc.omega_s / 2) * dc.eta(m) *
         (std::sin(th) * sp.s_l * std::exp(-i * (dc.phi_s - dc.phi_c - dc.phi)) +
          std::cos(th) * sp.s_r * std::exp(-i * (dc.phi_s - dc.phi_c + dc.phi)));
}

}  // namespace

TEST_CASE("symmetric and antisymmetric states drive different modes") {
  const DriveConfig dc = ideal_drive();
  const cplx dc_com = displacement_rate(dc, SpinPair(1, 1), Mode::com);
  CHECK(std::abs(dc_com - cplx(-dc.omega_s * dc.eta_com / std::sqrt(2.0))) < 1e-9);
  CHECK(std::abs(displacement_rate(dc, SpinPair(1, 1), Mode::stretch)) < 1e-9);
  CHECK(std::abs(displacement_rate(dc, SpinPair(1, -1), Mode::com)) < 1e-9);
  CHECK(std::abs(displacement_rate(dc, SpinPair(1, -1), Mode::stretch)) > 1.0);
}

TEST_CASE("displacement rate against direct evaluation") {
  DriveConfig dc = ideal_drive(hz_to_angular(2.4e3), 0.3, 0.2 * kWex);
  dc.phi_s = 0.4;
  dc.phi_c = -0.7;
  for (const auto& [l, r] : kAllSpinPairs) {
    for (Mode m : {Mode::stretch, Mode::com}) {
      const cplx got = displacement_rate(dc, SpinPair(l, r), m);
      CHECK(std::abs(got - rate_formula(dc, SpinPair(l, r), m)) < 1e-9 * std::abs(dc.omega_s));
      // parity of the displacement
      CHECK(std::abs(displacement_rate(dc, SpinPair(-l, -r), m) + got) < 1e-9);
    }
  }
  CHECK_THROWS_AS(SpinPair(0, 1), ParameterError);
}

TEST_CASE("loop integrals against quadrature") {
  DriveConfig dc = ideal_drive(hz_to_angular(2.4e3), 0.2, 0.3 * kWex);
  for (double frac : {0.5, 1.0, 0.37}) {
    const double t = frac * kTwoPi / std::abs(dc.delta_str);
    const LoopRecord rec = loop_integrals(dc, SpinPair(1, -1), t);
    const cplx d = displacement_rate(dc, SpinPair(1, -1), Mode::stretch);
    const oracle::Loop o = oracle::integrate_loop(d, dc.delta_str, t);
    CAPTURE(frac);
    CHECK(std::abs(rec.alpha_str - o.alpha) < 1e-9 * std::max(1.0, std::abs(o.alpha)));
    CHECK(rec.phase_str == doctest::Approx(o.phase).epsilon(1e-8));
  }
  const double half = kPi / dc.delta_str;
  const LoopRecord h = loop_integrals(dc, SpinPair(1, 1), half);
  const cplx d = displacement_rate(dc, SpinPair(1, 1), Mode::stretch);
  CHECK(std::abs(h.alpha_str) == doctest::Approx(2.0 * std::abs(d / dc.delta_str)));
  CHECK(h.phase_str == doctest::Approx(std::norm(d) / (dc.delta_str * dc.delta_str) * kPi));
  const LoopRecord z = loop_integrals(dc, SpinPair(1, 1), 0.0);
  CHECK(std::abs(z.alpha_com) == 0.0);
  CHECK(z.phase_com == 0.0);
  const LoopRecord full = loop_integrals(dc, SpinPair(1, 1), kTwoPi / dc.delta_str);
  CHECK(std::abs(full.alpha_str) < 1e-12);
  DriveConfig flat = dc;
  flat.delta_com = 0.0;
  CHECK_THROWS_AS(loop_integrals(flat, SpinPair(1, 1), 1e-4), SingularError);
}

TEST_CASE("loop duration") {
  const NormalModes nm = ideal_modes();
  CHECK(loop_duration(nm, 2) * 1e6 == doctest::Approx(153.846).epsilon(1e-6));
  CHECK(loop_duration(nm, 4) == doctest::Approx(2.0 * loop_duration(nm, 2)));
  CHECK(loop_duration(ideal_modes(kWex), 2) == doctest::Approx(loop_duration(nm, 2) / std::sqrt(2.0)));
  CHECK_THROWS_AS(loop_duration(nm, 0), ParameterError);
  const Closure c = closure_period(ideal_drive());
  CHECK(c.period == doctest::Approx(loop_duration(nm, 2)));
  CHECK(c.c_str == 1);
  CHECK(c.c_com == -1);
}

TEST_CASE("loop phase bracket") {
  const DriveConfig dc = ideal_drive();
  const double T = loop_duration(ideal_modes(), 2);
  // stretch bracket vanishes for aligned spins at phi = 0
  CHECK(std::abs(loop_phase(dc, SpinPair(1, 1), Mode::stretch, T)) < 1e-12);
  CHECK(loop_phase(dc, SpinPair(1, -1), Mode::stretch, T) > 0.0);
  const DriveConfig quarter = ideal_drive(hz_to_angular(2.4e3), kPi / 4);
  for (Mode m : {Mode::stretch, Mode::com}) {
    CHECK(loop_phase(quarter, SpinPair(1, 1), m, T) ==
          doctest::Approx(loop_phase(quarter, SpinPair(1, -1), m, T)).epsilon(1e-12));
  }
  // depends on the spins only through the product
  for (Mode m : {Mode::stretch, Mode::com}) {
    CHECK(loop_phase(dc, SpinPair(1, -1), m, T) == doctest::Approx(loop_phase(dc, SpinPair(-1, 1), m, T)));
    CHECK(loop_phase(dc, SpinPair(1, 1), m, T) ==
          doctest::Approx(loop_phase(dc, SpinPair(-1, -1), m, T)).scale(1.0));
  }
  CHECK_THROWS_AS(loop_phase(dc, SpinPair(1, 1), Mode::com, 0.9 * T), ContractError);
}

TEST_CASE("total phase identity") {
  for (double phi : {0.0, 0.3, 1.1}) {
    const DriveConfig dc = ideal_drive(hz_to_angular(2.4e3), phi);
    const double T = loop_duration(ideal_modes(), 2);
    const double eos = dc.eta_str * dc.omega_s;
    for (const auto& [l, r] : kAllSpinPairs) {
      const SpinPair sp(l, r);
      const double sum = loop_phase(dc, sp, Mode::stretch, T) + loop_phase(dc, sp, Mode::com, T);
      CHECK(sum == doctest::Approx(-std::cos(2 * phi) * eos * eos / (2 * kWex) * sp.product() * T).scale(1.0));
    }
  }
}

TEST_CASE("second-order phase form at small well detuning") {
  const double ratio = 0.3;
  const DriveConfig dc = ideal_drive(hz_to_angular(2.4e3), 0.2, ratio * kWex);
  const NormalModes nm = ideal_modes(ratio * kWex);
  const double T = loop_duration(nm, 2);
  for (Mode m : {Mode::stretch, Mode::com}) {
    const double exact = loop_phase(dc, SpinPair(1, 1), m, T);
    const double approx = loop_phase_second_order(dc.eta(m), dc.omega_s, dc.delta(m), T, dc.phi, nm.delta,
                                                  nm.omega_ex, SpinPair(1, 1), m);
    const double scale = std::abs(loop_phase(dc, SpinPair(1, -1), m, T)) + std::abs(exact);
    CHECK(std::abs(exact - approx) < 0.5 * std::pow(ratio, 4) * scale);
  }
}

TEST_CASE("coupling strength") {
  const double k = effective_kappa(hz_to_angular(2.4e3), kWex, 0.0);
  CHECK(angular_to_hz(k) == doctest::Approx(443.0769).epsilon(1e-6));
  CHECK(angular_to_hz(k) > 430.0);
  CHECK(angular_to_hz(k) < 460.0);
  CHECK(effective_kappa(hz_to_angular(2.4e3), kWex, kPi / 2) == doctest::Approx(-k));
  CHECK(effective_kappa(ideal_drive()) == doctest::Approx(k).epsilon(1e-12));
}

TEST_CASE("alternative detuning flips and scales the coupling") {
  const WellPair wp = be_pair(spacing_for_exchange_rate(be_pair(1).mass_l, be_pair(1).mass_r,
                                                        be_pair(1).charge, hz_to_angular(4e6), hz_to_angular(4e6),
                                                        kWex));
  const NormalModes nm = normal_modes(wp);
  DriveParams p;
  p.omega_c = hz_to_angular(23.1e3);
  p.wavevector = raman_wavevector(313e-9);
  p.omega_s = hz_to_angular(2.4e3) / reference_eta(wp, nm, p);
  const DriveConfig base = derive_drive(wp, nm, p, nm.omega_bar);
  const DriveConfig alt = derive_drive(wp, nm, p, nm.omega_bar + 2.0 * nm.omega_ex);
  CHECK(alt.delta_str == doctest::Approx(-nm.omega_ex));
  CHECK(alt.delta_com == doctest::Approx(-3.0 * nm.omega_ex));
  // per-mode eta differ at the 1e-3 level here
  CHECK(effective_kappa(alt) == doctest::Approx(-effective_kappa(base) / 3.0).epsilon(1e-2));
  CHECK(closure_period(alt).c_com == -3);
  DriveConfig eq = ideal_drive();
  eq.delta_str = -kWex;
  eq.delta_com = -3.0 * kWex;
  CHECK(effective_kappa(eq) == doctest::Approx(-effective_kappa(ideal_drive()) / 3.0).epsilon(1e-12));
}

TEST_CASE("derived drive") {
  const double m = beryllium9_ion_mass_u() * kCodata2018.atomic_mass_unit;
  const WellPair wp{m, m, kCodata2018.elementary_charge, hz_to_angular(3.99e6), hz_to_angular(4.01e6), 27e-6};
  const NormalModes nm = normal_modes(wp);
  DriveParams p;
  p.wavevector = raman_wavevector(313e-9);
  p.omega_s = 1e4;
  const DriveConfig dc = derive_drive(wp, nm, p, nm.omega_bar);
  CHECK(dc.delta_str - dc.delta_com == doctest::Approx(nm.splitting()).epsilon(1e-12));
  CHECK(dc.eta_str / dc.eta_com == doctest::Approx(std::sqrt(nm.omega_com / nm.omega_str)).epsilon(1e-12));
  CHECK(dc.eta_str == doctest::Approx(reference_eta(wp, nm, p)).epsilon(1e-3));
  CHECK(dc.theta_str == nm.theta_str);
  p.eta_override = 0.05;
  const DriveConfig o = derive_drive(wp, nm, p, nm.omega_bar);
  CHECK(std::sqrt(o.eta_str * o.eta_com) == doctest::Approx(0.05).epsilon(1e-6));
  p.eta_override = 1.5;
  CHECK_THROWS(derive_drive(wp, nm, p, nm.omega_bar));
}

TEST_CASE("effective gate produces the target state") {
  const SpinKet out = apply_effective_gate(down_down(), 1.0, 0.0, kPi / 4);
  CHECK(std::norm(entangled_target().dot(out)) == doctest::Approx(1.0).epsilon(1e-14));
  const SpinKet mixed_in = basis_ket(kDown, kUp);
  const SpinKet o2 = apply_effective_gate(mixed_in, 1.0, 0.0, kPi / 4);
  SpinKet expect = SpinKet::Zero();
  expect[spin_index(kDown, kUp)] = 1.0 / std::sqrt(2.0);
  expect[spin_index(kUp, kDown)] = cplx(0.0, -1.0 / std::sqrt(2.0));
  CHECK(std::norm(expect.dot(o2)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((apply_effective_gate(mixed_in, 1.0, 0.3, 0.0) - mixed_in).norm() < 1e-15);
}

TEST_CASE("effective gate matches the matrix exponential") {
  for (double phic : {0.0, 0.8, -2.0}) {
    const Spin2 s = sigma_phi(phic);
    const Eigen::Matrix4cd ss = kron(s, s);
    const oracle::Mat ref = oracle::expm_taylor(ss, 0.37 * 2.1);
    CHECK((effective_gate(0.37, phic, 2.1) - ref).norm() < 1e-12);
    SpinKet v;
    v << cplx(0.1, 0.2), cplx(-0.5, 0.1), cplx(0.3, 0.3), cplx(0.6, -0.2);
    v.normalize();
    CHECK(apply_effective_gate(v, 2.0, phic, 1.3).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("stroboscopic gate needs whole loops") {
  const double T = loop_duration(ideal_modes(), 2);
  CHECK_NOTHROW(apply_effective_gate(down_down(), 100.0, 0.0, 2 * T, T));
  CHECK_THROWS_AS(apply_effective_gate(down_down(), 100.0, 0.0, 1.5 * T, T), ContractError);
}

TEST_CASE("two-loop schedule") {
  const DriveConfig dc = ideal_drive();
  const NormalModes nm = ideal_modes();
  const Schedule s = two_loop_schedule(dc, nm);
  REQUIRE(s.segments.size() == 2);
  CHECK(s.total_duration() * 1e6 == doctest::Approx(307.69).epsilon(1e-4));
  CHECK(s.segments[1].phi_c == doctest::Approx(s.segments[0].phi_c + kPi));
  CHECK(s.segments[1].phi_s == doctest::Approx(s.segments[0].phi_s + kPi));
  CHECK(s.maximally_entangling);
  for (const auto& [l, r] : kAllSpinPairs) {
    for (Mode m : {Mode::stretch, Mode::com}) {
      const cplx a = segment_displacement_rate(dc, s.segments[0], SpinPair(l, r), m, dc.phi_c);
      const cplx b = segment_displacement_rate(dc, s.segments[1], SpinPair(l, r), m, dc.phi_c);
      CHECK(std::abs(a + b) < 1e-9);
    }
  }
  const Schedule weak = two_loop_schedule(ideal_drive(hz_to_angular(1.5e3)), nm);
  CHECK_FALSE(weak.maximally_entangling);
  const Schedule exact = two_loop_schedule(ideal_drive(maximal_eta_omega_s(kWex)), nm);
  CHECK(exact.maximally_entangling);
  CHECK(4.0 * effective_kappa(ideal_drive(maximal_eta_omega_s(kWex))) * exact.total_duration() / kPi ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("echo schedule splits the coupling") {
  const DriveConfig dc = ideal_drive();
  const Schedule s = echo_schedule(dc, 200e-6);
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].duration == doctest::Approx(100e-6));
  CHECK(s.segments[1].phi_c == doctest::Approx(dc.phi_c + kPi));
  CHECK(s.total_duration() == doctest::Approx(200e-6));
  const Schedule l = loop_schedule(dc, ideal_modes(), 4, true);
  CHECK(l.segments.size() == 4);
  CHECK(l.segments[2].phi_c == doctest::Approx(dc.phi_c));
  CHECK(l.segments[3].phi_c == doctest::Approx(dc.phi_c + kPi));
}

TEST_CASE("two loops cancel a constant detuning error") {
  const DriveConfig dc = ideal_drive();
  const NormalModes nm = ideal_modes();
  for (double frac : {0.01, 0.05, 0.2}) {
    Schedule two = two_loop_schedule(dc, nm);
    Schedule one = loop_schedule(dc, nm, 1, false);
    for (auto& seg : two.segments) seg.detuning_error = frac * kWex;
    for (auto& seg : one.segments) seg.detuning_error = frac * kWex;
    double net = 0.0, single = 0.0;
    for (const auto& [l, r] : kAllSpinPairs) {
      net = std::max(net, echo_displacement(dc, two, SpinPair(l, r)).max_abs());
      single = std::max(single, echo_displacement(dc, one, SpinPair(l, r)).max_abs());
    }
    CAPTURE(frac);
    CHECK(net < 1e-12);
    CHECK(single > 0.5 * frac);
  }
  // without error both frames agree on exact closure
  const Schedule clean = two_loop_schedule(dc, nm);
  CHECK(trajectory_displacement(dc, clean, SpinPair(1, -1)).max_abs() < 1e-9);
}

TEST_CASE("stroboscopic unitary of the two-loop gate") {
  const DriveConfig dc = ideal_drive(maximal_eta_omega_s(kWex));
  const Schedule s = two_loop_schedule(dc, ideal_modes());
  const Eigen::Matrix4cd u = stroboscopic_unitary(dc, s);
  CHECK((u.adjoint() * u - Eigen::Matrix4cd::Identity()).norm() < 1e-12);
  CHECK(std::norm(entangled_target().dot(u * down_down())) == doctest::Approx(1.0).epsilon(1e-9));
  Schedule partial = s;
  partial.segments[0].duration *= 0.5;
  CHECK_THROWS_AS(stroboscopic_unitary(dc, partial), ContractError);
}
