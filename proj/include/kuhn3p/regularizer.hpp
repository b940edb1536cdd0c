#pragma once
// Smoothing function g(y) = 1/2 + atan(y)/pi used to regularize the
// equilibrium complementarity conditions. Tail constants k± = 1/pi:
// 1 - g(y) ~ k+/y as y -> +inf and g(y) ~ -k-/y as y -> -inf.

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kuhn3p {

inline constexpr double kKPlus = 1.0 / std::numbers::pi;
inline constexpr double kKMinus = 1.0 / std::numbers::pi;

inline double g_eval(double y) { return 0.5 + std::atan(y) / std::numbers::pi; }

inline double g_prime(double y) { return 1.0 / (std::numbers::pi * (1.0 + y * y)); }

inline double g_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("g_inverse requires p in (0,1)");
  return std::tan(std::numbers::pi * (p - 0.5));
}

}  // namespace kuhn3p
