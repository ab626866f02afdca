#pragma once

#include <numbers>

namespace cfb {

// CODATA 2018 (exact SI values since the 2019 redefinition).
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K
inline constexpr double kSpeedOfLight = 299792458.0;  // m / s

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double hz_to_rad(double f) { return kTwoPi * f; }
inline constexpr double rad_to_hz(double w) { return w / kTwoPi; }
inline constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace cfb
