#pragma once

#include <cmath>
#include <numbers>

namespace awgent {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// dB values are stored as numbers <= 0.
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double db_to_intensity(double db) { return std::pow(10.0, db / 10.0); }

// Reduce an angle to [0, 2pi).
inline double wrap_phase(double rad) {
  double r = std::fmod(rad, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

// Signed circular difference a - b in (-pi, pi].
inline double phase_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

}  // namespace awgent
