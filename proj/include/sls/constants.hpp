#pragma once

namespace sls::constants {

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double planck_h = 6.62607015e-34;     // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double epsilon_0 = 8.8541878128e-12;  // F/m
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace sls::constants
