#include "gofstab/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "detail.hpp"
#include "gofstab/errors.hpp"

namespace gof {
namespace {

using Gauss = boost::math::quadrature::gauss<double, 30>;
constexpr double kPi = std::numbers::pi;

// (1/2pi) int_0^{2pi} h(F(r cos phi), F(r cos(phi - theta))) dphi, split at the
// kinks of the integrand: u = v (phi = theta/2, theta/2 + pi) and, for p = 2,
// the folds of arccos (phi = 0, pi, theta, theta + pi).
template <class H>
double angle_average(int p, double r, double theta, H&& h) {
  double cuts[] = {0.0, 0.5 * theta, theta, kPi, kPi + 0.5 * theta, kPi + theta, 2.0 * kPi};
  std::sort(std::begin(cuts), std::end(cuts));
  auto integrand = [&](double phi) {
    const double u = detail::projection_cdf_unchecked(r * std::cos(phi), p);
    const double v = detail::projection_cdf_unchecked(r * std::cos(phi - theta), p);
    return h(u, v);
  };
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < std::size(cuts); ++s) {
    if (cuts[s + 1] - cuts[s] > 1e-15) total += Gauss::integrate(integrand, cuts[s], cuts[s + 1]);
  }
  return total / (2.0 * kPi);
}

// Average of h over gamma uniform on S^{p-1}. The projection of gamma on the
// plane of the pair has uniform angle and radius r = sin(t) with density
// (p - 2) sin t cos^{p-3} t on [0, pi/2] (r = 1 for p = 2).
template <class H>
double direction_average(int p, double theta, H&& h) {
  if (p == 2) return angle_average(p, 1.0, theta, h);
  const double t_max = std::min(kPi / 2.0, 10.0 / std::sqrt(static_cast<double>(p - 2)));
  auto radial = [&](double t) {
    const double weight = (p - 2) * std::sin(t) * std::pow(std::cos(t), p - 3);
    if (weight == 0.0) return 0.0;
    return weight * angle_average(p, std::sin(t), theta, h);
  };
  const double mid = 0.5 * t_max;
  return Gauss::integrate(radial, 0.0, mid) + Gauss::integrate(radial, mid, t_max);
}

double kernel_at(StatisticKind kind, int p, double chord) {
  if (chord <= 0.0) return kind == StatisticKind::PCvM ? 1.0 / 6.0 : 1.0;
  const double theta = 2.0 * std::asin(std::min(chord, 2.0) / 2.0);
  if (kind == StatisticKind::PCvM) {
    const double mean_gap = direction_average(p, theta, [](double u, double v) { return std::abs(u - v); });
    return 1.0 / 6.0 - 0.5 * mean_gap;
  }
  // By the symmetry gamma -> -gamma, E log(1 - min(u,v)) = E log max(u,v).
  const double mean_log = direction_average(p, theta, [](double u, double v) {
    // max(u, v) underflows only where the radial weight vanishes
    return std::log(std::max({u, v, std::numeric_limits<double>::min()}));
  });
  return -1.0 - 2.0 * mean_log;
}

}  // namespace

PointCloud::PointCloud(const SphericalSample& x) : PointCloud(x.size(), x.dim()) {
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = x.row(i);
    for (std::size_t k = 0; k < p_; ++k) coords_[k * n_ + i] = r[k];
  }
}

ProjectedPairKernel::ProjectedPairKernel(StatisticKind kind, int p) : kind_(kind), p_(p) {
  if (kind != StatisticKind::PCvM && kind != StatisticKind::PAD) {
    throw ConfigError("pair kernels exist only for PCvM and PAD");
  }
  if (p < 2) throw DomainError("pair kernel requires p >= 2");
  diagonal_ = kernel_at(kind, p, 0.0);

  const std::size_t intervals = kQuadratureNodes - 1;
  const double h = 2.0 / static_cast<double>(intervals);
  std::vector<double> nodes(kQuadratureNodes);
  for (std::size_t k = 0; k < kQuadratureNodes; ++k) {
    nodes[k] = kernel_at(kind, p, h * static_cast<double>(k));
  }
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline(nodes.data(), nodes.size(), 0.0, h);

  // The kernels are smooth inside (0, 2) but not at the ends (AD has a
  // d log d term at d = 0), so the outer coarse intervals are filled by direct
  // quadrature instead of the spline. At p = 2 quadrature is cheap everywhere.
  const std::size_t ratio = kFineIntervals / intervals;
  const std::size_t edge = p == 2 ? kFineIntervals : kDirectEdgeIntervals * ratio;
  values_.resize(kFineIntervals + 2);
  slopes_.assign(kFineIntervals + 2, 0.0);
  const double fine = 2.0 / static_cast<double>(kFineIntervals);
  for (std::size_t k = 0; k <= kFineIntervals; ++k) {
    const double d = fine * static_cast<double>(k);
    if (k % ratio == 0) {
      values_[k] = nodes[k / ratio];
    } else if (k < edge || k > kFineIntervals - edge) {
      values_[k] = kernel_at(kind, p, d);
    } else {
      values_[k] = spline(d);
    }
  }
  values_[kFineIntervals + 1] = values_[kFineIntervals];
  for (std::size_t k = 0; k < kFineIntervals; ++k) slopes_[k] = values_[k + 1] - values_[k];
}

double ProjectedPairKernel::evaluate(double chord) const { return kernel_at(kind_, p_, chord); }

const ProjectedPairKernel& ProjectedPairKernel::get(StatisticKind kind, int p) {
  static std::mutex mutex;
  static std::map<std::pair<StatisticKind, int>, std::unique_ptr<ProjectedPairKernel>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{kind, p}];
  if (!slot) slot = std::make_unique<ProjectedPairKernel>(kind, p);
  return *slot;
}

double bakshaev_value(const PointCloud& cloud, double mean_chord_p) {
  const double n = static_cast<double>(cloud.size());
  return n * mean_chord_p - 2.0 * sum_pair_chords(cloud) / n;
}

double pairwise_projected_value(const PointCloud& cloud, const ProjectedPairKernel& kernel) {
  const double n = static_cast<double>(cloud.size());
  return kernel.diagonal() + 2.0 * sum_pair_kernel(cloud, kernel) / n;
}

}  // namespace gof
