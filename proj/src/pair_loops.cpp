// Hot pair loops. Built with reassociation enabled so the reductions and the
// chord computation vectorize; nothing here depends on NaN or signed-zero
// semantics.
#include <algorithm>
#include <cmath>
#include <vector>

#include "gofstab/pairwise.hpp"

namespace gof {
namespace {

// buf[j] = ||X_i - X_{i+1+j}|| for j < n - i - 1.
void chords_from(const PointCloud& cloud, std::size_t i, double* __restrict buf) {
  const std::size_t n = cloud.size();
  const std::size_t m = n - i - 1;
  const double* __restrict x0 = cloud.column(0) + i + 1;
  const double a0 = cloud.column(0)[i];
  for (std::size_t j = 0; j < m; ++j) buf[j] = a0 * x0[j];
  for (std::size_t k = 1; k < cloud.dim(); ++k) {
    const double* __restrict xk = cloud.column(k) + i + 1;
    const double ak = cloud.column(k)[i];
    for (std::size_t j = 0; j < m; ++j) buf[j] += ak * xk[j];
  }
  for (std::size_t j = 0; j < m; ++j) buf[j] = std::sqrt(std::max(2.0 - 2.0 * buf[j], 0.0));
}

double sum_span(const double* __restrict b, std::size_t m) {
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += b[j];
  return s;
}

double sum_lookup(const double* __restrict b, std::size_t m, const double* __restrict values,
                  const double* __restrict slopes) {
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double pos = b[j] * ProjectedPairKernel::kScale;
    const int idx = static_cast<int>(pos);
    s += values[idx] + (pos - static_cast<double>(idx)) * slopes[idx];
  }
  return s;
}

}  // namespace

double sum_pair_chords(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<double> buf(n);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    chords_from(cloud, i, buf.data());
    total += sum_span(buf.data(), n - i - 1);
  }
  return total;
}

double sum_pair_kernel(const PointCloud& cloud, const ProjectedPairKernel& kernel) {
  const std::size_t n = cloud.size();
  std::vector<double> buf(n);
  const double* values = kernel.values().data();
  const double* slopes = kernel.slopes().data();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    chords_from(cloud, i, buf.data());
    total += sum_lookup(buf.data(), n - i - 1, values, slopes);
  }
  return total;
}

void sum_pair_terms(const PointCloud& cloud, std::span<const ProjectedPairKernel* const> kernels,
                    std::span<double> sums) {
  const std::size_t n = cloud.size();
  std::vector<double> buf(n);
  std::fill(sums.begin(), sums.end(), 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t m = n - i - 1;
    chords_from(cloud, i, buf.data());
    sums[0] += sum_span(buf.data(), m);
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      sums[1 + k] += sum_lookup(buf.data(), m, kernels[k]->values().data(), kernels[k]->slopes().data());
    }
  }
}

}  // namespace gof
