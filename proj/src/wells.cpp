#include "ioncoupler/wells.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string("WellPair.") + name + " must be positive and finite");
  }
}

double coulomb_prefactor(double charge, const PhysicalConstants& c) {
  return charge * charge / (4.0 * kPi * c.epsilon0);
}

}  // namespace

double NormalModes::exchange_time() const { return kPi / (2.0 * omega_ex); }

void validate(const WellPair& wp, double max_frequency_ratio) {
  require_positive(wp.mass_l, "mass_l");
  require_positive(wp.mass_r, "mass_r");
  require_positive(wp.charge, "charge");
  require_positive(wp.omega_l, "omega_l");
  require_positive(wp.omega_r, "omega_r");
  require_positive(wp.d0, "d0");
  const double ratio = std::max(wp.omega_l, wp.omega_r) / std::min(wp.omega_l, wp.omega_r);
  if (ratio > max_frequency_ratio) {
    throw ParameterError("well frequencies differ by more than a factor " +
                         std::to_string(max_frequency_ratio));
  }
}

double exchange_rate(const WellPair& wp, const PhysicalConstants& c) {
  validate(wp);
  const double mass = std::sqrt(wp.mass_l * wp.mass_r);
  return coulomb_prefactor(wp.charge, c) /
         (mass * std::sqrt(wp.omega_l * wp.omega_r) * wp.d0 * wp.d0 * wp.d0);
}

NormalModes normal_modes(double omega_l, double omega_r, double omega_ex) {
  if (!(omega_ex > 0.0)) throw ParameterError("exchange rate must be positive");
  NormalModes nm;
  nm.omega_bar = 0.5 * (omega_l + omega_r);
  nm.delta = 0.5 * (omega_r - omega_l);
  nm.omega_ex = omega_ex;
  const double root = std::hypot(nm.delta, omega_ex);
  nm.omega_str = nm.omega_bar + root;
  nm.omega_com = nm.omega_bar - root;
  nm.theta_str = std::atan2(nm.delta - root, omega_ex);
  nm.theta_com = std::atan2(nm.delta + root, omega_ex);
  nm.q_str = {std::sin(nm.theta_str), std::cos(nm.theta_str)};
  nm.q_com = {std::sin(nm.theta_com), std::cos(nm.theta_com)};
  return nm;
}

NormalModes normal_modes(const WellPair& wp, const PhysicalConstants& c) {
  return normal_modes(wp.omega_l, wp.omega_r, exchange_rate(wp, c));
}

std::pair<Vec2, Vec2> eigenvector_approx(const NormalModes& nm) {
  if (std::abs(nm.delta) >= nm.omega_ex) {
    throw DomainError("eigenvector_approx requires |delta| < Omega_ex");
  }
  const double x = nm.delta / (2.0 * nm.omega_ex);
  const double s = 1.0 / std::sqrt(2.0);
  Vec2 str{-s * (1.0 - x), s * (1.0 + x)};
  Vec2 com{s * (1.0 + x), s * (1.0 - x)};
  return {str, com};
}

double spacing_for_exchange_rate(double mass_l, double mass_r, double charge, double omega_l,
                                 double omega_r, double omega_ex, const PhysicalConstants& c) {
  if (!(omega_ex > 0.0)) throw ParameterError("exchange rate must be positive");
  const double mass = std::sqrt(mass_l * mass_r);
  const double cube =
      coulomb_prefactor(charge, c) / (mass * std::sqrt(omega_l * omega_r) * omega_ex);
  return std::cbrt(cube);
}

double lamb_dicke(double wavevector, double mass, double omega, const PhysicalConstants& c) {
  if (!(mass > 0.0) || !(omega > 0.0)) throw ParameterError("lamb_dicke needs mass, omega > 0");
  return wavevector * std::sqrt(c.hbar / (2.0 * mass * omega));
}

double raman_wavevector(double wavelength) {
  if (!(wavelength > 0.0)) throw ParameterError("wavelength must be positive");
  return 2.0 * std::sqrt(2.0) * kPi / wavelength;
}

}  // namespace ioncoupler
