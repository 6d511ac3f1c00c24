#pragma once

#include <numbers>

namespace ioncoupler {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018. Kept as a value type so the self-test can run against a
// deliberately corrupted table.
struct PhysicalConstants {
  double epsilon0;          // F/m
  double elementary_charge; // C
  double atomic_mass_unit;  // kg
  double hbar;              // J s
  double electron_mass_u;   // u
};

inline constexpr PhysicalConstants kCodata2018{
    8.8541878128e-12, 1.602176634e-19, 1.66053906660e-27, 1.054571817e-34,
    5.48579909065e-4};

// 9Be atomic mass in u; the ion mass subtracts one electron.
inline constexpr double kBeryllium9AtomicMass_u = 9.0121831;

inline constexpr double beryllium9_ion_mass_u(const PhysicalConstants& c = kCodata2018) {
  return kBeryllium9AtomicMass_u - c.electron_mass_u;
}

inline constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
inline constexpr double angular_to_hz(double omega) { return omega / kTwoPi; }

}  // namespace ioncoupler
