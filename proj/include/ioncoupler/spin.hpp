#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace ioncoupler {

using cplx = std::complex<double>;
using SpinKet = Eigen::Vector4cd;
using SpinDensity = Eigen::Matrix4cd;
using Spin2 = Eigen::Matrix2cd;

// Single-ion basis: index 0 = |up>, 1 = |down> (|down> = sigma^- |up>).
// Two-ion index = 2 * left + right.
inline constexpr int kUp = 0;
inline constexpr int kDown = 1;
inline constexpr int spin_index(int left, int right) { return 2 * left + right; }

// Populations by number of bright (|down>) ions: p[b].
struct Populations {
  double p0 = 0.0;  // |up up>
  double p1 = 0.0;  // one ion bright
  double p2 = 0.0;  // |down down>
  double sum() const { return p0 + p1 + p2; }
  std::array<double, 3> as_array() const { return {p0, p1, p2}; }
};

SpinKet basis_ket(int left, int right);
SpinKet down_down();
// (|dd> - i|uu>) / sqrt(2)
SpinKet entangled_target();

Spin2 pauli_x();
Spin2 pauli_y();
Spin2 pauli_z();
// cos(phi) sigma_x - sin(phi) sigma_y
Spin2 sigma_phi(double phi);
Eigen::Matrix4cd kron(const Spin2& a, const Spin2& b);

// Eigenstates |+/-> = (|up> +/- e^{-i phi}|down>)/sqrt(2) of sigma_phi.
Eigen::Vector2cd dressed_ket(int sign, double phi);

// Ideal carrier rotation exp(-i angle/2 sigma_phi) on one ion; the carrier
// Hamiltonian Omega_c sigma_phi for time t gives angle = 2 Omega_c t.
Spin2 carrier_rotation(double angle, double phi);

// pi/2 analysis pulse with phase phi_a applied to both ions.
Eigen::Matrix4cd analysis_pulse(double phi_a);

SpinDensity pure_density(const SpinKet& psi);
Populations populations(const SpinDensity& rho);
double parity(const Populations& p);
double fidelity(const SpinDensity& rho, const SpinKet& target);
double trace_distance(const SpinDensity& a, const SpinDensity& b);
double von_neumann_entropy(const SpinDensity& rho);

}  // namespace ioncoupler
