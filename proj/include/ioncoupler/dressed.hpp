#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "ioncoupler/constants.hpp"
#include "ioncoupler/spin.hpp"
#include "ioncoupler/wells.hpp"

namespace ioncoupler {

enum class Mode { stretch, com };

const char* mode_name(Mode m);

// Which ions the sideband (Raman) drive reaches. The carrier always reaches both.
struct SidebandMask {
  bool left = true;
  bool right = true;
  bool operator==(const SidebandMask&) const = default;
};

// Laser-level drive settings. The sideband is aimed at
// omega_bar(nominal) + sideband_offset; detunings from each mode follow
// from the (possibly drifted) normal modes.
struct DriveParams {
  double omega_c = 0.0;
  double omega_s = 0.0;
  double phi_c = 0.0;
  double phi_s = 0.0;
  double phi = 0.0;  // half the beat-note phase difference, 2 phi = k d0
  double sideband_offset = 0.0;
  double wavevector = 0.0;
  // Lamb-Dicke parameter referenced to omega_bar; replaces the k-derived value.
  std::optional<double> eta_override;
  SidebandMask addressing;
};

// Resolved per-mode drive configuration.
struct DriveConfig {
  double omega_c = 0.0;
  double omega_s = 0.0;
  double phi_c = 0.0;
  double phi_s = 0.0;
  double phi = 0.0;
  double delta_str = 0.0;
  double delta_com = 0.0;
  double eta_str = 0.0;
  double eta_com = 0.0;
  double theta_str = 0.0;
  double theta_com = 0.0;
  SidebandMask addressing;

  double delta(Mode m) const { return m == Mode::stretch ? delta_str : delta_com; }
  double eta(Mode m) const { return m == Mode::stretch ? eta_str : eta_com; }
  double theta(Mode m) const { return m == Mode::stretch ? theta_str : theta_com; }
};

// Lamb-Dicke parameter at omega_bar for the given wells and drive.
double reference_eta(const WellPair& wp, const NormalModes& nm, const DriveParams& p,
                     const PhysicalConstants& c = kCodata2018);

// target_frequency: absolute motional frequency the red sideband is tuned to.
DriveConfig derive_drive(const WellPair& wp, const NormalModes& nm, const DriveParams& p,
                         double target_frequency, const PhysicalConstants& c = kCodata2018);

// Dressed-basis eigenvalues s_l, s_r in {-1, +1} of sigma^{phi_c}.
struct SpinPair {
  int s_l = 1;
  int s_r = 1;
  SpinPair() = default;
  SpinPair(int l, int r);
  int product() const { return s_l * s_r; }
};

inline constexpr std::array<std::pair<int, int>, 4> kAllSpinPairs{
    {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

struct LoopRecord {
  cplx alpha_str;
  cplx alpha_com;
  double phase_str = 0.0;
  double phase_com = 0.0;
};

cplx displacement_rate(const DriveConfig& dc, SpinPair sp, Mode mode);

// Integrated displacement and geometric phase after time t for a constant
// drive. SingularError when a mode detuning is zero.
LoopRecord loop_integrals(const DriveConfig& dc, SpinPair sp, double t);

// pi * delta_c / sqrt(delta^2 + Omega_ex^2)
double loop_duration(const NormalModes& nm, int delta_c);

// |delta_mode T mod 2 pi| below this counts as a closed loop.
inline constexpr double kClosureTolerance = 1e-6;

struct Closure {
  double period = 0.0;
  int c_str = 0;
  int c_com = 0;
};

// Shortest T > 0 that closes both modes. ContractError if none with
// delta_c <= max_delta_c exists.
Closure closure_period(const DriveConfig& dc, int max_delta_c = 32);

// Spin-dependent phase of one mode over a closed loop of duration T.
double loop_phase(const DriveConfig& dc, SpinPair sp, Mode mode, double period);
double loop_phase(const DriveConfig& dc, SpinPair sp, Mode mode);

// Second-order small-delta form with a single eta, for comparison.
double loop_phase_second_order(double eta, double omega_s, double delta_mode, double period,
                               double phi, double delta, double omega_ex, SpinPair sp, Mode mode);

// Coupling from loop phases over one closure period; any detuning choice.
double effective_kappa(const DriveConfig& dc);
// cos(2 phi) (eta Omega_s)^2 / (2 Omega_ex)
double effective_kappa(double eta_omega_s, double omega_ex, double phi);

// exp(-i kappa t sigma^{phi_c} sigma^{phi_c})
Eigen::Matrix4cd effective_gate(double kappa, double phi_c, double t);
SpinKet apply_effective_gate(const SpinKet& state, double kappa, double phi_c, double t);
// Same, but ContractError unless t is an integer multiple of loop_period.
SpinKet apply_effective_gate(const SpinKet& state, double kappa, double phi_c, double t,
                             double loop_period);

// Piecewise-constant drive segment.
struct Segment {
  double duration = 0.0;
  double omega_c = 0.0;
  double omega_s = 0.0;
  double phi_c = 0.0;
  double phi_s = 0.0;
  double detuning_error = 0.0;  // added to both mode detunings
  SidebandMask addressing;
};

// dc with the segment's amplitudes, phases, addressing and detuning error.
DriveConfig segment_drive(const DriveConfig& dc, const Segment& seg);

struct Schedule {
  std::vector<Segment> segments;
  double loop_period = 0.0;
  bool maximally_entangling = false;
  double total_duration() const;
};

// Relative gate-angle mismatch tolerated before a schedule is tagged
// non-maximally-entangling.
inline constexpr double kMaximalGateTolerance = 0.1;

// eta * Omega_s that makes two loops a maximally entangling gate.
double maximal_eta_omega_s(double omega_ex);

// Two loops of 2 pi / sqrt(delta^2+Omega_ex^2) each, phases (0,0) then (pi,pi)
// relative to dc's phases.
Schedule two_loop_schedule(const DriveConfig& dc, const NormalModes& nm);

// `loops` consecutive loops; with echo, alternate loops flip phi_c and phi_s by pi.
Schedule loop_schedule(const DriveConfig& dc, const NormalModes& nm, int loops, bool echo);

// Coupling of total duration t split into two equal halves, the second with
// both phases shifted by pi.
Schedule echo_schedule(const DriveConfig& dc, double total_duration);

// Displacement rate during a segment for the state whose sigma^{phi_ref}
// eigenvalues are sp. Segment phi_c must differ from phi_ref by 0 or pi.
cplx segment_displacement_rate(const DriveConfig& dc, const Segment& seg, SpinPair sp, Mode mode,
                               double phi_ref);

struct ModeDisplacement {
  cplx str;
  cplx com;
  double max_abs() const;
};

// Sum of closed-form loop displacements, each loop evaluated from its own
// start (loop-local time origin).
ModeDisplacement echo_displacement(const DriveConfig& dc, const Schedule& s, SpinPair sp);

// Displacement accumulated in one continuous interaction-picture trajectory.
ModeDisplacement trajectory_displacement(const DriveConfig& dc, const Schedule& s, SpinPair sp);

// Analytic spin unitary for a schedule whose segments are whole loops:
// per segment, carrier rotation times exp(-i kappa tau sigma sigma).
Eigen::Matrix4cd stroboscopic_unitary(const DriveConfig& dc, const Schedule& s);

}  // namespace ioncoupler
