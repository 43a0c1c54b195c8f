#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

namespace gof::detail {

// I_{x^2}(1/2, (p-1)/2) for x in [0, 1]. For moderate p the upward recurrence
//   I_y(a, b + 1) = I_y(a, b) + y^a (1 - y)^b / (b B(a, b))
// from the elementary cases b = 1/2 (p = 2) and b = 1 (p = 3) is exact up to
// rounding and much cheaper than the general incomplete beta.
inline double projection_beta(double x, int p) {
  if (p > 160) return boost::math::ibeta(0.5, 0.5 * (p - 1), x * x);
  const double one_minus = (1.0 - x) * (1.0 + x);
  double b, value, coef, power;
  if (p % 2 == 0) {
    b = 0.5;
    value = 2.0 / std::numbers::pi * std::asin(x);
    coef = 2.0 / std::numbers::pi;  // Gamma(b + 1/2) / (sqrt(pi) Gamma(b + 1))
    power = std::sqrt(one_minus);
  } else {
    b = 1.0;
    value = x;
    coef = 0.5;
    power = one_minus;
  }
  const double target = 0.5 * (p - 1);
  for (; b < target; b += 1.0) {
    value += x * power * coef;
    coef *= (b + 0.5) / (b + 1.0);
    power *= one_minus;
  }
  return std::min(value, 1.0);
}

// F_p without the domain check; x is clamped to [-1, 1] to absorb rounding in
// dot products of unit vectors.
inline double projection_cdf_unchecked(double x, int p) {
  x = std::clamp(x, -1.0, 1.0);
  if (p == 2) return 1.0 - std::acos(x) / std::numbers::pi;
  if (p == 3) return 0.5 * (x + 1.0);
  const double half = 0.5 * projection_beta(std::abs(x), p);
  return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

}  // namespace gof::detail
