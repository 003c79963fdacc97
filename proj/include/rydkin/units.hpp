#pragma once

// Unit conventions used throughout:
//   lengths      micrometre (um)
//   times        microsecond (us)
//   frequencies  angular, rad/us  (2*pi * MHz)
//   rates        plain 1/us (no 2*pi)
//   C6           rad um^6 / us
// Config files quote ordinary frequencies (MHz etc.); conversion to the
// internal angular convention happens once, at parse time.

#include <numbers>

namespace rydkin::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ordinary frequency -> angular rad/us
inline constexpr double mhz(double f) { return two_pi * f; }
inline constexpr double khz(double f) { return two_pi * 1e-3 * f; }
inline constexpr double ghz(double f) { return two_pi * 1e3 * f; }

// C6 quoted as GHz um^6 (the 70S Rb convention) -> rad um^6 / us
inline constexpr double ghz_um6(double c) { return two_pi * 1e3 * c; }

} // namespace rydkin::units
