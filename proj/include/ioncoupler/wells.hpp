#pragma once

#include <array>
#include <utility>

#include "ioncoupler/constants.hpp"

namespace ioncoupler {

using Vec2 = std::array<double, 2>;

// Two ions in independent harmonic wells along the separation axis.
// Frequencies are angular (rad/s); spacing in metres.
struct WellPair {
  double mass_l = 0.0;  // kg
  double mass_r = 0.0;  // kg
  double charge = 0.0;  // C
  double omega_l = 0.0;
  double omega_r = 0.0;
  double d0 = 0.0;  // m
};

struct NormalModes {
  double omega_bar = 0.0;
  double delta = 0.0;  // (omega_r - omega_l) / 2
  double omega_ex = 0.0;
  double omega_str = 0.0;
  double omega_com = 0.0;
  double theta_str = 0.0;
  double theta_com = 0.0;
  Vec2 q_str{};  // (left, right) participation
  Vec2 q_com{};

  double splitting() const { return omega_str - omega_com; }
  // pi / (2 Omega_ex)
  double exchange_time() const;
};

// Throws ParameterError for non-positive fields or wells further apart in
// frequency than max_frequency_ratio.
void validate(const WellPair& wp, double max_frequency_ratio = 2.0);

double exchange_rate(const WellPair& wp, const PhysicalConstants& c = kCodata2018);

NormalModes normal_modes(const WellPair& wp, const PhysicalConstants& c = kCodata2018);

// Normal modes from (omega_l, omega_r, Omega_ex) directly.
NormalModes normal_modes(double omega_l, double omega_r, double omega_ex);

// First-order-in-delta/Omega_ex eigenvectors (stretch, com). DomainError if
// |delta| >= Omega_ex.
std::pair<Vec2, Vec2> eigenvector_approx(const NormalModes& nm);

// Spacing d0 that produces the requested exchange rate.
double spacing_for_exchange_rate(double mass_l, double mass_r, double charge, double omega_l,
                                 double omega_r, double omega_ex,
                                 const PhysicalConstants& c = kCodata2018);

// k * sqrt(hbar / (2 m omega)).
double lamb_dicke(double wavevector, double mass, double omega,
                  const PhysicalConstants& c = kCodata2018);

// Effective-difference wavevector of the Raman pair: 2 sqrt(2) pi / lambda.
double raman_wavevector(double wavelength);

}  // namespace ioncoupler
