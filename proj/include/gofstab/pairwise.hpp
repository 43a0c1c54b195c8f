#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gofstab/statistics.hpp"

namespace gof {

// Points on S^{p-1} in structure-of-arrays layout: coordinate k of point i is
// at coords[k * n + i]. The pair loops below vectorize over this layout.
class PointCloud {
 public:
  PointCloud(std::size_t n, std::size_t p) : n_(n), p_(p), coords_(n * p) {}
  explicit PointCloud(const SphericalSample& x);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return p_; }
  double* column(std::size_t k) noexcept { return coords_.data() + k * n_; }
  const double* column(std::size_t k) const noexcept { return coords_.data() + k * n_; }

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> coords_;
};

// The projected statistics are double sums over pairs:
//   P = (1/n) sum_{i,j} K(||X_i - X_j||)
// where K is the direction average of the inner statistic's pair kernel
//   CvM: k(u,v) = 1/3 - max(u,v) + (u^2 + v^2)/2
//   AD:  k(u,v) = -1 - log(1 - min(u,v)) - log(max(u,v))
// evaluated at u = F_p(gamma'X_i), v = F_p(gamma'X_j). K depends on the pair
// only through the chord, and is tabulated here by quadrature over the
// in-plane direction angle and radius of gamma.
class ProjectedPairKernel {
 public:
  ProjectedPairKernel(StatisticKind kind, int p);

  // Process-wide cache; construction costs up to a few seconds for p >= 4.
  static const ProjectedPairKernel& get(StatisticKind kind, int p);

  StatisticKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return p_; }

  // K(0): 1/6 for CvM, 1 for AD.
  double diagonal() const noexcept { return diagonal_; }

  double operator()(double chord) const noexcept {
    const double pos = chord * kScale;
    const auto idx = static_cast<std::size_t>(pos);
    return values_[idx] + (pos - static_cast<double>(idx)) * slopes_[idx];
  }

  // Direct quadrature at one chord, bypassing the table.
  double evaluate(double chord) const;

  static constexpr std::size_t kFineIntervals = 16384;
  static constexpr double kScale = kFineIntervals / 2.0;
  static constexpr std::size_t kQuadratureNodes = 513;
  // Coarse intervals at each end of [0, 2] tabulated by direct quadrature.
  static constexpr std::size_t kDirectEdgeIntervals = 4;

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> slopes() const noexcept { return slopes_; }

 private:
  StatisticKind kind_;
  int p_;
  double diagonal_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

// sum_{i<j} ||X_i - X_j||
double sum_pair_chords(const PointCloud& cloud);

// sum_{i<j} K(||X_i - X_j||)
double sum_pair_kernel(const PointCloud& cloud, const ProjectedPairKernel& kernel);

// One pass over the pairs: sums[0] = sum_{i<j} chord, sums[1 + k] = sum_{i<j} K_k(chord).
void sum_pair_terms(const PointCloud& cloud, std::span<const ProjectedPairKernel* const> kernels,
                    std::span<double> sums);

// N_{n,p} from a precomputed mean chord.
double bakshaev_value(const PointCloud& cloud, double mean_chord_p);

// P^CvM / P^AD through the pair kernel.
double pairwise_projected_value(const PointCloud& cloud, const ProjectedPairKernel& kernel);

}  // namespace gof
