#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

// Hartree atomic units are used internally everywhere (hbar = m_e = e = 1).
// Conversion factors below are the only place where other unit systems enter.

namespace qtraj::units {

inline constexpr double angstrom_per_bohr = 0.529177;
inline constexpr double bohr_per_angstrom = 1.0 / angstrom_per_bohr;
inline constexpr double fs_per_aut = 0.0241888;
inline constexpr double aut_per_fs = 1.0 / fs_per_aut;
inline constexpr double ms_per_auv = 2.18769e6;  // m/s per a.u. velocity
inline constexpr double auv_per_ms = 1.0 / ms_per_auv;

// Parses a trailing unit token and returns the factor that converts a value
// carrying that unit into atomic units. Unknown tokens are an error; an empty
// token means the value is already atomic.
inline double to_au_factor(const std::string& unit) {
  if (unit.empty() || unit == "au" || unit == "a.u." || unit == "bohr" ||
      unit == "aut" || unit == "auv" || unit == "hartree")
    return 1.0;
  if (unit == "ang" || unit == "angstrom" || unit == "A") return bohr_per_angstrom;
  if (unit == "1/ang" || unit == "1/angstrom") return angstrom_per_bohr;
  if (unit == "1/bohr") return 1.0;
  if (unit == "fs") return aut_per_fs;
  if (unit == "m/s") return auv_per_ms;
  if (unit == "deg") return std::numbers::pi / 180.0;
  if (unit == "rad") return 1.0;
  throw std::invalid_argument("unknown unit token: '" + unit + "'");
}

inline double de_broglie_wavelength(double k) { return 2.0 * std::numbers::pi / k; }

}  // namespace qtraj::units
