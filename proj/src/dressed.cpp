#include "ioncoupler/dressed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

constexpr cplx kI{0.0, 1.0};

bool is_zero_detuning(double delta) { return std::abs(delta) < 1e-9; }

// Distance of x from the nearest multiple of 2 pi.
double wrap_residual(double x) { return std::abs(x - kTwoPi * std::round(x / kTwoPi)); }

int relative_sign(double phi, double phi_ref) {
  const double c = std::cos(phi - phi_ref);
  if (std::abs(std::abs(c) - 1.0) > 1e-9) {
    throw ContractError("segment carrier phase is not aligned with the reference basis");
  }
  return c > 0.0 ? 1 : -1;
}

void add_alpha(ModeDisplacement& a, Mode m, cplx v) {
  (m == Mode::stretch ? a.str : a.com) += v;
}

}  // namespace

const char* mode_name(Mode m) { return m == Mode::stretch ? "stretch" : "com"; }

SpinPair::SpinPair(int l, int r) : s_l(l), s_r(r) {
  if ((l != 1 && l != -1) || (r != 1 && r != -1)) {
    throw ParameterError("dressed-state eigenvalues must be +1 or -1");
  }
}

double reference_eta(const WellPair& wp, const NormalModes& nm, const DriveParams& p,
                     const PhysicalConstants& c) {
  if (p.eta_override) return *p.eta_override;
  return lamb_dicke(p.wavevector, std::sqrt(wp.mass_l * wp.mass_r), nm.omega_bar, c);
}

DriveConfig derive_drive(const WellPair& wp, const NormalModes& nm, const DriveParams& p,
                         double target_frequency, const PhysicalConstants& c) {
  DriveConfig dc;
  dc.omega_c = p.omega_c;
  dc.omega_s = p.omega_s;
  dc.phi_c = p.phi_c;
  dc.phi_s = p.phi_s;
  dc.phi = p.phi;
  dc.delta_str = nm.omega_str - target_frequency;
  dc.delta_com = nm.omega_com - target_frequency;
  dc.theta_str = nm.theta_str;
  dc.theta_com = nm.theta_com;
  dc.addressing = p.addressing;
  // eta scales as omega^{-1/2}; an override is taken as the omega_bar value.
  const double eta_bar = reference_eta(wp, nm, p, c);
  dc.eta_str = eta_bar * std::sqrt(nm.omega_bar / nm.omega_str);
  dc.eta_com = eta_bar * std::sqrt(nm.omega_bar / nm.omega_com);
  if (!(dc.eta_str > 0.0 && dc.eta_str < 1.0 && dc.eta_com > 0.0 && dc.eta_com < 1.0)) {
    throw ParameterError("Lamb-Dicke parameters must lie in (0, 1)");
  }
  return dc;
}

cplx displacement_rate(const DriveConfig& dc, SpinPair sp, Mode mode) {
  const double th = dc.theta(mode);
  const double base = dc.phi_s - dc.phi_c;
  cplx sum{0.0, 0.0};
  if (dc.addressing.left) sum += std::sin(th) * sp.s_l * std::exp(-kI * (base - dc.phi));
  if (dc.addressing.right) sum += std::cos(th) * sp.s_r * std::exp(-kI * (base + dc.phi));
  return -0.5 * dc.omega_s * dc.eta(mode) * sum;
}

LoopRecord loop_integrals(const DriveConfig& dc, SpinPair sp, double t) {
  LoopRecord rec;
  for (Mode m : {Mode::stretch, Mode::com}) {
    const double dl = dc.delta(m);
    if (is_zero_detuning(dl)) {
      throw SingularError(std::string("zero detuning on the ") + mode_name(m) + " mode");
    }
    const cplx d = displacement_rate(dc, sp, m);
    const cplx alpha = kI * (d / dl) * (1.0 - std::exp(kI * dl * t));
    const double phase = std::norm(d) / (dl * dl) * (dl * t - std::sin(dl * t));
    if (m == Mode::stretch) {
      rec.alpha_str = alpha;
      rec.phase_str = phase;
    } else {
      rec.alpha_com = alpha;
      rec.phase_com = phase;
    }
  }
  return rec;
}

double loop_duration(const NormalModes& nm, int delta_c) {
  if (delta_c < 1) throw ParameterError("delta_c must be at least 1");
  return kPi * delta_c / std::hypot(nm.delta, nm.omega_ex);
}

Closure closure_period(const DriveConfig& dc, int max_delta_c) {
  const double split = dc.delta_str - dc.delta_com;
  if (!(split > 0.0)) throw ContractError("mode detunings must satisfy delta_str > delta_com");
  for (int dcount = 1; dcount <= max_delta_c; ++dcount) {
    const double T = kTwoPi * dcount / split;
    if (wrap_residual(dc.delta_str * T) < kClosureTolerance &&
        wrap_residual(dc.delta_com * T) < kClosureTolerance) {
      Closure c;
      c.period = T;
      c.c_str = static_cast<int>(std::lround(dc.delta_str * T / kTwoPi));
      c.c_com = static_cast<int>(std::lround(dc.delta_com * T / kTwoPi));
      return c;
    }
  }
  throw ContractError("no common closure period for the two modes");
}

double loop_phase(const DriveConfig& dc, SpinPair sp, Mode mode, double period) {
  const double dl = dc.delta(mode);
  if (is_zero_detuning(dl)) {
    throw SingularError(std::string("zero detuning on the ") + mode_name(mode) + " mode");
  }
  if (wrap_residual(dl * period) >= kClosureTolerance) {
    throw ContractError(std::string("loop on the ") + mode_name(mode) + " mode is not closed");
  }
  return std::norm(displacement_rate(dc, sp, mode)) * period / dl;
}

double loop_phase(const DriveConfig& dc, SpinPair sp, Mode mode) {
  return loop_phase(dc, sp, mode, closure_period(dc).period);
}

double loop_phase_second_order(double eta, double omega_s, double delta_mode, double period,
                               double phi, double delta, double omega_ex, SpinPair sp, Mode mode) {
  const double k = 0.25 * eta * eta * omega_s * omega_s;
  const double sgn = mode == Mode::stretch ? -1.0 : 1.0;
  const double r = delta / omega_ex;
  return k * period / delta_mode *
         (1.0 + sgn * sp.product() * std::cos(2.0 * phi) * (1.0 - 0.5 * r * r));
}

double effective_kappa(const DriveConfig& dc) {
  const double T = closure_period(dc).period;
  auto total = [&](SpinPair sp) {
    return loop_phase(dc, sp, Mode::stretch, T) + loop_phase(dc, sp, Mode::com, T);
  };
  return -(total(SpinPair(1, 1)) - total(SpinPair(1, -1))) / (2.0 * T);
}

double effective_kappa(double eta_omega_s, double omega_ex, double phi) {
  return std::cos(2.0 * phi) * eta_omega_s * eta_omega_s / (2.0 * omega_ex);
}

Eigen::Matrix4cd effective_gate(double kappa, double phi_c, double t) {
  const Spin2 s = sigma_phi(phi_c);
  const double a = kappa * t;
  // (s x s)^2 = 1
  return std::cos(a) * Eigen::Matrix4cd::Identity() - kI * std::sin(a) * kron(s, s);
}

SpinKet apply_effective_gate(const SpinKet& state, double kappa, double phi_c, double t) {
  return effective_gate(kappa, phi_c, t) * state;
}

SpinKet apply_effective_gate(const SpinKet& state, double kappa, double phi_c, double t,
                             double loop_period) {
  if (!(loop_period > 0.0)) throw ParameterError("loop period must be positive");
  const double n = t / loop_period;
  if (std::abs(n - std::round(n)) > 1e-6) {
    throw ContractError("effective gate is valid only at whole loop periods");
  }
  return apply_effective_gate(state, kappa, phi_c, t);
}

DriveConfig segment_drive(const DriveConfig& dc, const Segment& seg) {
  DriveConfig out = dc;
  out.omega_c = seg.omega_c;
  out.omega_s = seg.omega_s;
  out.phi_c = seg.phi_c;
  out.phi_s = seg.phi_s;
  out.delta_str += seg.detuning_error;
  out.delta_com += seg.detuning_error;
  out.addressing = seg.addressing;
  return out;
}


double Schedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

double maximal_eta_omega_s(double omega_ex) { return omega_ex / (2.0 * std::sqrt(2.0)); }

Schedule loop_schedule(const DriveConfig& dc, const NormalModes& nm, int loops, bool echo) {
  if (loops < 1) throw ParameterError("schedule needs at least one loop");
  Schedule s;
  s.loop_period = loop_duration(nm, 2);
  for (int j = 0; j < loops; ++j) {
    Segment seg;
    seg.duration = s.loop_period;
    seg.omega_c = dc.omega_c;
    seg.omega_s = dc.omega_s;
    const double shift = (echo && j % 2 == 1) ? kPi : 0.0;
    seg.phi_c = dc.phi_c + shift;
    seg.phi_s = dc.phi_s + shift;
    seg.addressing = dc.addressing;
    s.segments.push_back(seg);
  }
  const double angle = effective_kappa(dc) * s.total_duration();
  s.maximally_entangling = std::abs(4.0 * angle / kPi - 1.0) <= kMaximalGateTolerance;
  return s;
}

Schedule two_loop_schedule(const DriveConfig& dc, const NormalModes& nm) {
  return loop_schedule(dc, nm, 2, true);
}

Schedule echo_schedule(const DriveConfig& dc, double total_duration) {
  if (!(total_duration >= 0.0)) throw ParameterError("duration must be non-negative");
  Schedule s;
  for (int j = 0; j < 2; ++j) {
    Segment seg;
    seg.duration = 0.5 * total_duration;
    seg.omega_c = dc.omega_c;
    seg.omega_s = dc.omega_s;
    seg.phi_c = dc.phi_c + (j == 1 ? kPi : 0.0);
    seg.phi_s = dc.phi_s + (j == 1 ? kPi : 0.0);
    seg.addressing = dc.addressing;
    s.segments.push_back(seg);
  }
  return s;
}

cplx segment_displacement_rate(const DriveConfig& dc, const Segment& seg, SpinPair sp, Mode mode,
                               double phi_ref) {
  const int sign = relative_sign(seg.phi_c, phi_ref);
  return displacement_rate(segment_drive(dc, seg), SpinPair(sign * sp.s_l, sign * sp.s_r), mode);
}

double ModeDisplacement::max_abs() const { return std::max(std::abs(str), std::abs(com)); }

ModeDisplacement echo_displacement(const DriveConfig& dc, const Schedule& s, SpinPair sp) {
  ModeDisplacement out;
  for (const auto& seg : s.segments) {
    for (Mode m : {Mode::stretch, Mode::com}) {
      const double dl = dc.delta(m) + seg.detuning_error;
      if (is_zero_detuning(dl)) throw SingularError("zero detuning inside a schedule segment");
      const cplx d = segment_displacement_rate(dc, seg, sp, m, dc.phi_c);
      add_alpha(out, m, kI * (d / dl) * (1.0 - std::exp(kI * dl * seg.duration)));
    }
  }
  return out;
}

ModeDisplacement trajectory_displacement(const DriveConfig& dc, const Schedule& s, SpinPair sp) {
  ModeDisplacement out;
  double t0 = 0.0;
  for (const auto& seg : s.segments) {
    const double t1 = t0 + seg.duration;
    for (Mode m : {Mode::stretch, Mode::com}) {
      const double dl = dc.delta(m) + seg.detuning_error;
      if (is_zero_detuning(dl)) throw SingularError("zero detuning inside a schedule segment");
      const cplx d = segment_displacement_rate(dc, seg, sp, m, dc.phi_c);
      add_alpha(out, m, kI * (d / dl) * (std::exp(kI * dl * t0) - std::exp(kI * dl * t1)));
    }
    t0 = t1;
  }
  return out;
}

Eigen::Matrix4cd stroboscopic_unitary(const DriveConfig& dc, const Schedule& s) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  for (const auto& seg : s.segments) {
    const DriveConfig local = segment_drive(dc, seg);
    const Closure cl = closure_period(local);
    const double n = seg.duration / cl.period;
    if (std::abs(n - std::round(n)) > 1e-6) {
      throw ContractError("segment is not a whole number of loop periods");
    }
    const double kappa = seg.omega_s == 0.0 ? 0.0 : effective_kappa(local);
    const Spin2 c = carrier_rotation(2.0 * seg.omega_c * seg.duration, seg.phi_c);
    u = kron(c, c) * effective_gate(kappa, seg.phi_c, seg.duration) * u;
  }
  return u;
}

}  // namespace ioncoupler
