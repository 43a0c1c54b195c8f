#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gofstab/errors.hpp"

namespace gof {

// The significance grid {a/A : a = 1..A}. Index k (0-based) holds (k+1)/A.
class AlphaGrid {
 public:
  explicit AlphaGrid(std::size_t A = 1000) : A_(A) {
    if (A < 4) throw ConfigError("alpha grid needs A >= 4");
  }

  std::size_t A() const noexcept { return A_; }
  std::size_t size() const noexcept { return A_; }
  double operator[](std::size_t k) const noexcept {
    return static_cast<double>(k + 1) / static_cast<double>(A_);
  }

  // Index of alpha on the grid, or -1 when alpha is not a grid point.
  std::ptrdiff_t index_of(double alpha) const noexcept {
    const double scaled = alpha * static_cast<double>(A_);
    const double a = std::round(scaled);
    if (a < 1 || a > static_cast<double>(A_) || std::abs(scaled - a) > 1e-7) return -1;
    return static_cast<std::ptrdiff_t>(a) - 1;
  }

  // Number of grid points with alpha <= limit.
  std::size_t count_upto(double limit) const noexcept {
    const double a = std::floor(limit * static_cast<double>(A_) + 1e-9);
    return static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(A_)));
  }

  // Grid points that carry an upper quantile (alpha = 1 has none).
  std::vector<double> quantile_alphas() const {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < A_; ++k) out.push_back((*this)[k]);
    return out;
  }

  bool operator==(const AlphaGrid&) const = default;

 private:
  std::size_t A_;
};

// Exact integer key for alpha values used in maps.
inline std::int64_t alpha_key(double alpha) { return std::llround(alpha * 1e9); }

}  // namespace gof
