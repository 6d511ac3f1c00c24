#include "ioncoupler/spin.hpp"

#include "ioncoupler/constants.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ioncoupler {

namespace {
constexpr cplx kI{0.0, 1.0};
}

SpinKet basis_ket(int left, int right) {
  SpinKet k = SpinKet::Zero();
  k(spin_index(left, right)) = 1.0;
  return k;
}

SpinKet down_down() { return basis_ket(kDown, kDown); }

SpinKet entangled_target() {
  SpinKet k = SpinKet::Zero();
  const double s = 1.0 / std::sqrt(2.0);
  k(spin_index(kDown, kDown)) = s;
  k(spin_index(kUp, kUp)) = -kI * s;
  return k;
}

Spin2 pauli_x() {
  Spin2 m;
  m << 0, 1, 1, 0;
  return m;
}

Spin2 pauli_y() {
  Spin2 m;
  m << 0, -kI, kI, 0;
  return m;
}

Spin2 pauli_z() {
  Spin2 m;
  m << 1, 0, 0, -1;
  return m;
}

Spin2 sigma_phi(double phi) { return std::cos(phi) * pauli_x() - std::sin(phi) * pauli_y(); }

Eigen::Matrix4cd kron(const Spin2& a, const Spin2& b) {
  Eigen::Matrix4cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

Eigen::Vector2cd dressed_ket(int sign, double phi) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd k;
  k << s, static_cast<double>(sign) * s * std::exp(-kI * phi);
  return k;
}

Spin2 carrier_rotation(double angle, double phi) {
  // sigma_phi squares to identity
  return std::cos(0.5 * angle) * Spin2::Identity() - kI * std::sin(0.5 * angle) * sigma_phi(phi);
}

Eigen::Matrix4cd analysis_pulse(double phi_a) {
  const Spin2 r = carrier_rotation(0.5 * kPi, phi_a);
  return kron(r, r);
}

SpinDensity pure_density(const SpinKet& psi) { return psi * psi.adjoint(); }

Populations populations(const SpinDensity& rho) {
  Populations p;
  p.p0 = rho(spin_index(kUp, kUp), spin_index(kUp, kUp)).real();
  p.p1 = rho(spin_index(kUp, kDown), spin_index(kUp, kDown)).real() +
         rho(spin_index(kDown, kUp), spin_index(kDown, kUp)).real();
  p.p2 = rho(spin_index(kDown, kDown), spin_index(kDown, kDown)).real();
  return p;
}

double parity(const Populations& p) { return p.p2 + p.p0 - p.p1; }

double fidelity(const SpinDensity& rho, const SpinKet& target) {
  return (target.adjoint() * rho * target)(0, 0).real();
}

double trace_distance(const SpinDensity& a, const SpinDensity& b) {
  const SpinDensity d = a - b;
  Eigen::SelfAdjointEigenSolver<SpinDensity> es(0.5 * (d + d.adjoint()),
                                                 Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double von_neumann_entropy(const SpinDensity& rho) {
  Eigen::SelfAdjointEigenSolver<SpinDensity> es(0.5 * (rho + rho.adjoint()),
                                                 Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 1e-300) s -= l * std::log(l);
  }
  return s;
}

}  // namespace ioncoupler
