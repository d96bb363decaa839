#pragma once

// SI conversion factors. All quantities inside the library are SI
// (seconds, metres, radians); these constants convert at the boundary.

#include <numbers>

namespace biphoton::units {

inline constexpr double s = 1.0;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;
inline constexpr double ps = 1e-12;
inline constexpr double fs = 1e-15;

inline constexpr double m = 1.0;
inline constexpr double km = 1e3;
inline constexpr double cm = 1e-2;
inline constexpr double mm = 1e-3;
inline constexpr double um = 1e-6;
inline constexpr double nm = 1e-9;

inline constexpr double rad = 1.0;
inline constexpr double deg = std::numbers::pi / 180.0;

inline constexpr double speed_of_light = 299792458.0;  // m/s

}  // namespace biphoton::units
