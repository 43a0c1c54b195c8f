#include "gofstab/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "detail.hpp"
#include "gofstab/errors.hpp"
#include "gofstab/pairwise.hpp"

namespace gof {

namespace {

constexpr std::array<std::string_view, 8> kNames{"D", "W2", "A2", "V", "U2", "PCvM", "PAD", "NBak"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

struct EcdfDeviations {
  double plus = 0.0;   // max_i (i/n - u_(i))
  double minus = 0.0;  // max_i (u_(i) - (i-1)/n)
};

EcdfDeviations deviations(std::span<const double> u) {
  const double n = static_cast<double>(u.size());
  EcdfDeviations d{-1.0, -1.0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    d.plus = std::max(d.plus, static_cast<double>(i + 1) / n - u[i]);
    d.minus = std::max(d.minus, u[i] - static_cast<double>(i) / n);
  }
  return d;
}

double cramer_von_mises(std::span<const double> u) {
  const double n = static_cast<double>(u.size());
  double s = 1.0 / (12.0 * n);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double dev = u[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n);
    s += dev * dev;
  }
  return s;
}

double anderson_darling(std::span<const double> u, BoundaryPolicy policy) {
  const std::size_t n = u.size();
  auto at = [&](std::size_t i) {
    double v = u[i];
    if (v <= 0.0 || v >= 1.0) {
      if (policy == BoundaryPolicy::reject) {
        throw DataError("degenerate observation " + std::to_string(v) +
                        " for A2 (values must lie strictly inside (0,1))");
      }
      v = std::clamp(v, kBoundaryClamp, 1.0 - kBoundaryClamp);
    }
    return v;
  };
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(at(i)) + std::log1p(-at(n - 1 - i)));
  }
  return -static_cast<double>(n) - s / static_cast<double>(n);
}

double mean_of(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v;
  return s / static_cast<double>(u.size());
}

// Inner classical statistic of projected values, or NaN when the direction has
// to be skipped (A2 with a projected value on the boundary).
double projected_inner(StatisticKind inner, std::vector<double>& u) {
  std::sort(u.begin(), u.end());
  if (inner == StatisticKind::A2 && (u.front() <= 0.0 || u.back() >= 1.0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return classical_value(inner, u);
}

}  // namespace

std::string_view kind_name(StatisticKind kind) noexcept {
  return kNames[static_cast<std::size_t>(kind)];
}

StatisticKind parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (iequals(name, kNames[i])) return static_cast<StatisticKind>(i);
  }
  throw ConfigError("unknown statistic kind '" + std::string(name) + "'");
}

UnitSample::UnitSample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("empty sample");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("observation " + std::to_string(v) + " outside [0,1]");
    }
  }
  std::sort(values_.begin(), values_.end());
}

SphericalSample::SphericalSample(std::vector<double> row_major, std::size_t p)
    : data_(std::move(row_major)), p_(p) {
  if (p < 2) throw DomainError("spherical samples need p >= 2");
  if (data_.empty() || data_.size() % p != 0) {
    throw DataError("spherical sample size is not a positive multiple of p");
  }
  n_ = data_.size() / p;
  for (std::size_t i = 0; i < n_; ++i) {
    double sq = 0.0;
    for (double v : row(i)) sq += v * v;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-10) {
      throw DomainError("row " + std::to_string(i + 1) + " is not unit norm");
    }
  }
}

SphericalSample SphericalSample::normalized(std::vector<double> row_major, std::size_t p,
                                            double tolerance) {
  if (p < 2) throw DomainError("spherical samples need p >= 2");
  if (row_major.empty() || row_major.size() % p != 0) {
    throw DataError("spherical sample size is not a positive multiple of p");
  }
  for (std::size_t i = 0; i < row_major.size() / p; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < p; ++k) sq += row_major[i * p + k] * row_major[i * p + k];
    const double norm = std::sqrt(sq);
    if (!(std::abs(norm - 1.0) <= tolerance)) {
      throw DomainError("row " + std::to_string(i + 1) + " has norm " + std::to_string(norm) +
                        ", not within " + std::to_string(tolerance) + " of 1");
    }
    for (std::size_t k = 0; k < p; ++k) row_major[i * p + k] /= norm;
  }
  return SphericalSample(std::move(row_major), p);
}

SphericalSample SphericalSample::from_angles(std::span<const double> radians) {
  std::vector<double> xy;
  xy.reserve(2 * radians.size());
  for (double t : radians) {
    xy.push_back(std::cos(t));
    xy.push_back(std::sin(t));
  }
  return SphericalSample(std::move(xy), 2);
}

double classical_value(StatisticKind kind, std::span<const double> u, BoundaryPolicy policy) {
  switch (kind) {
    case StatisticKind::D: {
      const auto d = deviations(u);
      return std::sqrt(static_cast<double>(u.size())) * std::max(d.plus, d.minus);
    }
    case StatisticKind::V: {
      const auto d = deviations(u);
      return std::sqrt(static_cast<double>(u.size())) * (d.plus + d.minus);
    }
    case StatisticKind::W2:
      return cramer_von_mises(u);
    case StatisticKind::U2: {
      const double centre = mean_of(u) - 0.5;
      return cramer_von_mises(u) - static_cast<double>(u.size()) * centre * centre;
    }
    case StatisticKind::A2:
      return anderson_darling(u, policy);
    default:
      throw ConfigError(std::string(kind_name(kind)) + " is not a classical statistic");
  }
}

StatisticValue classical_statistic(StatisticKind kind, const UnitSample& u, BoundaryPolicy policy) {
  return {kind, classical_value(kind, u.values(), policy), u.size(), std::nullopt, std::nullopt};
}

double projection_cdf(double x, int p) {
  if (p < 2) throw DomainError("projection_cdf requires p >= 2");
  if (!(x >= -1.0 && x <= 1.0)) {
    throw DomainError("projection_cdf argument " + std::to_string(x) + " outside [-1,1]");
  }
  return detail::projection_cdf_unchecked(x, p);
}

double mean_chord(int p) {
  if (p < 2) throw DomainError("mean_chord requires p >= 2");
  // E sqrt(2 - 2t) with t = X1'X2 of density c_p (1 - t^2)^{(p-3)/2} on [-1,1].
  // With t = cos(s) the integrand becomes 2 sin(s/2) c_p sin^{p-2}(s), smooth
  // on [0, pi] for every p.
  const double c_p = std::exp(std::lgamma(0.5 * p) - std::lgamma(0.5 * (p - 1))) /
                     std::sqrt(std::numbers::pi);
  auto integrand = [&](double s) {
    return 2.0 * std::sin(0.5 * s) * c_p * std::pow(std::sin(s), p - 2);
  };
  boost::math::quadrature::tanh_sinh<double> quad;
  return quad.integrate(integrand, 0.0, std::numbers::pi, 1e-12);
}

StatisticValue bakshaev_statistic(const SphericalSample& x) {
  const std::size_t n = x.size();
  const std::size_t p = x.dim();
  double chords = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = x.row(j);
      double sq = 0.0;
      for (std::size_t k = 0; k < p; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
      chords += std::sqrt(sq);
    }
  }
  const double nn = static_cast<double>(n);
  const double value = nn * mean_chord(static_cast<int>(p)) - 2.0 * chords / nn;
  return {StatisticKind::NBak, value, n, static_cast<int>(p), std::nullopt};
}

StatisticValue projected_statistic(StatisticKind kind, const SphericalSample& x,
                                   const DirectionScheme& scheme) {
  if (kind != StatisticKind::PCvM && kind != StatisticKind::PAD) {
    throw ConfigError("projected_statistic handles PCvM and PAD only");
  }
  const std::size_t n = x.size();
  const int p = static_cast<int>(x.dim());
  StatisticValue out{kind, 0.0, n, p, DirectionEstimate{}};
  out.estimation->scheme = scheme.type;

  if (scheme.type == DirectionSchemeType::pairwise) {
    out.value = pairwise_projected_value(PointCloud(x), ProjectedPairKernel::get(kind, p));
    return out;
  }

  const StatisticKind inner = kind == StatisticKind::PCvM ? StatisticKind::W2 : StatisticKind::A2;
  std::vector<double> u(n);
  std::vector<double> gamma(x.dim());
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  auto accumulate = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = x.row(i);
      double dot = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) dot += gamma[k] * r[k];
      u[i] = detail::projection_cdf_unchecked(dot, p);
    }
    const double v = projected_inner(inner, u);
    if (std::isnan(v)) {
      ++skipped;
      return;
    }
    sum += v;
    sum_sq += v * v;
    ++used;
  };

  if (scheme.type == DirectionSchemeType::grid) {
    if (p != 2) throw ConfigError("the direction grid scheme is defined for p = 2 only");
    if (scheme.count < 16) throw ConfigError("direction grid needs at least 16 points");
    for (std::size_t g = 0; g < scheme.count; ++g) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(g) /
                         static_cast<double>(scheme.count);
      gamma[0] = std::cos(phi);
      gamma[1] = std::sin(phi);
      accumulate();
    }
  } else {
    if (scheme.count < 100) throw ConfigError("Monte Carlo directions need at least 100 draws");
    std::mt19937_64 rng(scheme.seed);
    std::normal_distribution<double> normal;
    for (std::size_t g = 0; g < scheme.count; ++g) {
      double sq = 0.0;
      for (double& c : gamma) {
        c = normal(rng);
        sq += c * c;
      }
      const double norm = std::sqrt(sq);
      for (double& c : gamma) c /= norm;
      accumulate();
    }
  }
  if (used == 0) throw DataError("every projection direction hit a boundary value");

  const double mean = sum / static_cast<double>(used);
  out.value = mean;
  out.estimation->direction_count = used;
  out.estimation->skipped_directions = skipped;
  if (scheme.type == DirectionSchemeType::montecarlo && used > 1) {
    const double var = std::max(0.0, (sum_sq - used * mean * mean) / static_cast<double>(used - 1));
    out.estimation->std_error = std::sqrt(var / static_cast<double>(used));
  }
  return out;
}

}  // namespace gof
