#pragma once

#include <numbers>

namespace torus {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = 0.57721566490153286;
inline constexpr double kCatalan = 0.91596559417721901;

// Gamma'(1) = -gamma.
inline constexpr double kDigammaOne = -kEulerGamma;

}  // namespace torus
