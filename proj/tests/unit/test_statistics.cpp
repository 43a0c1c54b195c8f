#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "gofstab/errors.hpp"
#include "gofstab/pairwise.hpp"
#include "gofstab/statistics.hpp"

using namespace gof;

namespace {

std::vector<double> uniform_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(n);
  for (double& v : u) v = unif(rng);
  return u;
}

SphericalSample uniform_sphere(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0;
    for (std::size_t k = 0; k < p; ++k) {
      x[i * p + k] = normal(rng);
      sq += x[i * p + k] * x[i * p + k];
    }
    for (std::size_t k = 0; k < p; ++k) x[i * p + k] /= std::sqrt(sq);
  }
  return SphericalSample(std::move(x), p);
}

double stat(StatisticKind k, std::vector<double> u) {
  return classical_statistic(k, UnitSample(std::move(u))).value;
}

// Random orthogonal matrix from the QR of a Gaussian matrix (Gram-Schmidt).
std::vector<double> random_rotation(std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> q(p * p);
  for (double& v : q) v = normal(rng);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      double dot = 0;
      for (std::size_t r = 0; r < p; ++r) dot += q[r * p + c] * q[r * p + prev];
      for (std::size_t r = 0; r < p; ++r) q[r * p + c] -= dot * q[r * p + prev];
    }
    double norm = 0;
    for (std::size_t r = 0; r < p; ++r) norm += q[r * p + c] * q[r * p + c];
    for (std::size_t r = 0; r < p; ++r) q[r * p + c] /= std::sqrt(norm);
  }
  return q;
}

SphericalSample rotate(const SphericalSample& x, const std::vector<double>& q) {
  const std::size_t p = x.dim();
  std::vector<double> out(x.size() * p, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) out[i * p + r] += q[r * p + c] * x.row(i)[c];
    }
  }
  return SphericalSample::normalized(std::move(out), p, 1e-9);
}

}  // namespace

TEST(Classical, SinglePointValues) {
  EXPECT_DOUBLE_EQ(stat(StatisticKind::D, {0.5}), 0.5);
  EXPECT_NEAR(stat(StatisticKind::W2, {0.5}), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(stat(StatisticKind::A2, {0.5}), -1.0 + 2.0 * std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(stat(StatisticKind::V, {0.5}), 1.0);
  EXPECT_NEAR(stat(StatisticKind::U2, {0.5}), 1.0 / 12.0, 1e-15);
}

TEST(Classical, AndersonDarlingBoundary) {
  EXPECT_THROW(stat(StatisticKind::A2, {0.0, 0.3, 0.7}), DataError);
  EXPECT_THROW(stat(StatisticKind::A2, {0.2, 1.0}), DataError);
  const auto clamped =
      classical_statistic(StatisticKind::A2, UnitSample({0.0, 0.3, 0.7}), BoundaryPolicy::clamp);
  EXPECT_TRUE(std::isfinite(clamped.value));
  EXPECT_GT(clamped.value, 0.0);
  // Boundary values are fine for the statistics without logarithms.
  EXPECT_NO_THROW(stat(StatisticKind::W2, {0.0, 1.0}));
}

TEST(Classical, RejectsOutOfRangeAndEmpty) {
  EXPECT_THROW(UnitSample({0.2, 1.5}), DomainError);
  EXPECT_THROW(UnitSample({-0.1}), DomainError);
  EXPECT_THROW(UnitSample({}), DataError);
  EXPECT_THROW(UnitSample({std::nan("")}), DomainError);
}

TEST(Classical, KnownSmallSample) {
  // u = (0.1, 0.4, 0.7): D+ = max(1/3-0.1, 2/3-0.4, 1-0.7) = 0.3,
  // D- = max(0.1, 0.4-1/3, 0.7-2/3) = 0.1; D and V carry the sqrt(n) scaling.
  const std::vector<double> u{0.7, 0.1, 0.4};
  EXPECT_NEAR(stat(StatisticKind::D, u), 0.3 * std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(stat(StatisticKind::V, u), 0.4 * std::sqrt(3.0), 1e-15);
  // W2 = 1/36 + (0.1-1/6)^2 + (0.4-1/2)^2 + (0.7-5/6)^2
  const double w2 = 1.0 / 36 + std::pow(0.1 - 1.0 / 6, 2) + 0.01 + std::pow(0.7 - 5.0 / 6, 2);
  EXPECT_NEAR(stat(StatisticKind::W2, u), w2, 1e-15);
  EXPECT_NEAR(stat(StatisticKind::U2, u), w2 - 3 * std::pow(0.4 - 0.5, 2), 1e-15);
}

// A2 from its integral definition n * int (F_n(t) - t)^2 / (t(1-t)) dt,
// integrated numerically between consecutive order statistics.
TEST(Classical, AndersonDarlingMatchesIntegralDefinition) {
  auto u = uniform_values(12, 7);
  std::sort(u.begin(), u.end());
  const double n = 12;
  double integral = 0;
  double lo = 0;
  for (std::size_t i = 0; i <= u.size(); ++i) {
    const double hi = i < u.size() ? u[i] : 1.0;
    const double c = static_cast<double>(i) / n;
    auto f = [c](double t) { return (c - t) * (c - t) / (t * (1 - t)); };
    integral += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
    lo = hi;
  }
  EXPECT_NEAR(stat(StatisticKind::A2, u), n * integral, 1e-8);
}

TEST(ClassicalProperty, PermutationInvariance) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    auto u = uniform_values(25, 100 + rep);
    auto shuffled = u;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto k : kClassicalKinds) EXPECT_EQ(stat(k, u), stat(k, shuffled));
  }
}

TEST(ClassicalProperty, CircularRotationInvariance) {
  for (int rep = 0; rep < 50; ++rep) {
    const auto u = uniform_values(30, 200 + rep);
    const double c = uniform_values(1, 900 + rep)[0];
    std::vector<double> shifted;
    for (double v : u) shifted.push_back(std::fmod(v + c, 1.0));
    EXPECT_NEAR(stat(StatisticKind::V, u), stat(StatisticKind::V, shifted), 1e-9);
    EXPECT_NEAR(stat(StatisticKind::U2, u), stat(StatisticKind::U2, shifted), 1e-9);
  }
}

TEST(ClassicalProperty, Bounds) {
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rep % 40;
    const auto u = uniform_values(n, 300 + rep);
    const double d = stat(StatisticKind::D, u);
    const double v = stat(StatisticKind::V, u);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, std::sqrt(static_cast<double>(n)));
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 2.0 * std::sqrt(static_cast<double>(n)));
    EXPECT_GE(stat(StatisticKind::W2, u), 1.0 / (12.0 * n) - 1e-15);
    EXPECT_GT(stat(StatisticKind::A2, u), 0.0);
    EXPECT_GE(stat(StatisticKind::U2, u), 0.0);
  }
}

TEST(ClassicalProperty, WatsonDecomposition) {
  for (int rep = 0; rep < 100; ++rep) {
    const auto u = uniform_values(5 + rep, 400 + rep);
    double mean = 0;
    for (double v : u) mean += v;
    mean /= static_cast<double>(u.size());
    const double expected =
        stat(StatisticKind::W2, u) - static_cast<double>(u.size()) * (mean - 0.5) * (mean - 0.5);
    EXPECT_NEAR(stat(StatisticKind::U2, u), expected, 1e-12);
  }
}

TEST(Kinds, ParseAndName) {
  for (int i = 0; i < 8; ++i) {
    const auto k = static_cast<StatisticKind>(i);
    EXPECT_EQ(parse_kind(kind_name(k)), k);
  }
  EXPECT_EQ(parse_kind("pad"), StatisticKind::PAD);
  EXPECT_EQ(parse_kind("nbak"), StatisticKind::NBak);
  EXPECT_THROW(parse_kind("KS"), ConfigError);
}

TEST(ProjectionCdf, Examples) {
  EXPECT_DOUBLE_EQ(projection_cdf(0.0, 2), 0.5);
  EXPECT_DOUBLE_EQ(projection_cdf(0.0, 7), 0.5);
  EXPECT_NEAR(projection_cdf(std::sqrt(2.0) / 2, 2), 0.75, 1e-14);
  EXPECT_NEAR(projection_cdf(0.5, 3), 0.75, 1e-14);
  EXPECT_NEAR(boost::math::ibeta(0.5, 1.0, 0.25), 0.5, 1e-14);
  EXPECT_THROW(projection_cdf(1.01, 3), DomainError);
  EXPECT_THROW(projection_cdf(0.2, 1), DomainError);
}

TEST(ProjectionCdf, Properties) {
  for (int p : {2, 3, 4, 7, 20, 300}) {
    EXPECT_DOUBLE_EQ(projection_cdf(-1.0, p), 0.0);
    EXPECT_DOUBLE_EQ(projection_cdf(1.0, p), 1.0);
    double prev = 0;
    for (int i = -100; i <= 100; ++i) {
      const double x = i / 100.0;
      const double f = projection_cdf(x, p);
      EXPECT_GE(f, prev);
      EXPECT_NEAR(projection_cdf(-x, p), 1.0 - f, 1e-14);
      prev = f;
    }
  }
  // p = 2 closed form against the beta representation
  for (double x : {-0.9, -0.3, 0.2, 0.65, 0.99}) {
    EXPECT_NEAR(projection_cdf(x, 2), 1.0 - std::acos(x) / std::numbers::pi, 1e-14);
  }
}

TEST(MeanChord, Constants) {
  EXPECT_NEAR(mean_chord(2), 4.0 / std::numbers::pi, 1e-10);
  EXPECT_NEAR(mean_chord(3), 4.0 / 3.0, 1e-10);
  const double large = mean_chord(300);
  EXPECT_GT(large, 1.41);
  EXPECT_LT(large, 1.45);
  double prev = 1.0;
  for (int p = 2; p <= 40; ++p) {
    const double m = mean_chord(p);
    EXPECT_GT(m, prev);
    EXPECT_LT(m, std::sqrt(2.0) + 0.2);
    prev = m;
  }
}

TEST(Bakshaev, HandExamples) {
  SphericalSample antipodal({0, 0, 1, 0, 0, -1}, 3);
  EXPECT_NEAR(bakshaev_statistic(antipodal).value, 2.0 / 3.0, 1e-10);
  SphericalSample single({0, 1, 0, 0}, 4);
  EXPECT_NEAR(bakshaev_statistic(single).value, mean_chord(4), 1e-12);
}

TEST(Bakshaev, RotationInvariance) {
  for (std::size_t p : {2u, 3u, 5u, 11u}) {
    const auto x = uniform_sphere(40, p, 10 + p);
    const auto y = rotate(x, random_rotation(p, 20 + p));
    EXPECT_NEAR(bakshaev_statistic(x).value, bakshaev_statistic(y).value, 1e-10);
  }
}

TEST(Bakshaev, PairLoopMatchesDirectSum) {
  for (std::size_t p : {2u, 3u, 7u}) {
    const auto x = uniform_sphere(97, p, 33 + p);
    const double fast = bakshaev_value(PointCloud(x), mean_chord(static_cast<int>(p)));
    EXPECT_NEAR(fast, bakshaev_statistic(x).value, 1e-9);
  }
}

TEST(SphericalSampleInput, Validation) {
  EXPECT_THROW(SphericalSample({1, 0, 0.5, 0.5}, 2), DomainError);
  EXPECT_THROW(SphericalSample({1, 0, 0}, 2), DataError);
  EXPECT_THROW(SphericalSample({1}, 1), DomainError);
  const auto x = SphericalSample::normalized({1.0000005, 0, 0, -0.9999995}, 2);
  EXPECT_NEAR(x.row(0)[0], 1.0, 1e-15);
  EXPECT_THROW(SphericalSample::normalized({1.1, 0}, 2), DomainError);
  const double angles[] = {0.0, std::numbers::pi / 2};
  const auto c = SphericalSample::from_angles(angles);
  EXPECT_NEAR(c.row(1)[1], 1.0, 1e-15);
}

TEST(Projected, GridAtP2MatchesTwiceWatson) {
  for (int rep = 0; rep < 20; ++rep) {
    const auto ang = uniform_values(30, 500 + rep);
    std::vector<double> theta, u;
    for (double a : ang) {
      theta.push_back(2 * std::numbers::pi * a);
      u.push_back(a);
    }
    const auto x = SphericalSample::from_angles(theta);
    const double target = 2 * stat(StatisticKind::U2, u);
    const auto grid = projected_statistic(StatisticKind::PCvM, x, DirectionScheme::grid(2048));
    EXPECT_NEAR(grid.value, target, 0.005 * target);
    ASSERT_TRUE(grid.estimation.has_value());
    EXPECT_EQ(grid.estimation->direction_count, 2048u);
    const auto pair = projected_statistic(StatisticKind::PCvM, x, DirectionScheme::pairwise());
    EXPECT_NEAR(pair.value, target, 1e-6 * target);
  }
}

TEST(Projected, GridConvergesToTwiceWatson) {
  int better = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto ang = uniform_values(20, 700 + rep);
    std::vector<double> theta;
    for (double a : ang) theta.push_back(2 * std::numbers::pi * a);
    const auto x = SphericalSample::from_angles(theta);
    const double target = 2 * stat(StatisticKind::U2, ang);
    const double fine = projected_statistic(StatisticKind::PCvM, x, DirectionScheme::grid(4096)).value;
    const double coarse = projected_statistic(StatisticKind::PCvM, x, DirectionScheme::grid(64)).value;
    if (std::abs(fine - target) < std::abs(coarse - target)) ++better;
  }
  EXPECT_GE(better, 95);
}

TEST(Projected, GridPlanarRotationInvariance) {
  const auto ang = uniform_values(25, 11);
  std::vector<double> a, b;
  for (double v : ang) {
    a.push_back(2 * std::numbers::pi * v);
    b.push_back(2 * std::numbers::pi * v + 0.7314);
  }
  auto value = [](StatisticKind kind, const std::vector<double>& t) {
    return projected_statistic(kind, SphericalSample::from_angles(t), DirectionScheme::grid(2048)).value;
  };
  EXPECT_NEAR(value(StatisticKind::PCvM, a), value(StatisticKind::PCvM, b), 1e-6);
  // The AD inner statistic diverges logarithmically when a direction lines up
  // with an observation, so the equispaced grid only reaches O(1/G) here.
  EXPECT_NEAR(value(StatisticKind::PAD, a), value(StatisticKind::PAD, b), 1e-4);
}

TEST(Projected, SinglePointCramerVonMises) {
  // With one observation the inner statistic is W_1^2 = 1/12 + (u - 1/2)^2,
  // and u = F_p(gamma'x) is uniform over gamma, so the average is 1/12 + 1/12.
  for (int p : {2, 3, 5}) {
    std::vector<double> pt(p, 0.0);
    pt[0] = 1.0;
    const SphericalSample x(pt, p);
    EXPECT_NEAR(projected_statistic(StatisticKind::PCvM, x, DirectionScheme::pairwise()).value,
                1.0 / 6.0, 1e-12);
    const auto mc = projected_statistic(StatisticKind::PCvM, x, DirectionScheme::montecarlo(20000, 5));
    EXPECT_NEAR(mc.value, 1.0 / 6.0, 4 * mc.estimation->std_error);
  }
}

TEST(Projected, MonteCarloSeedsAgree) {
  const auto x = uniform_sphere(30, 3, 77);
  const auto a = projected_statistic(StatisticKind::PAD, x, DirectionScheme::montecarlo(10000, 1));
  const auto b = projected_statistic(StatisticKind::PAD, x, DirectionScheme::montecarlo(10000, 2));
  const double se = std::hypot(a.estimation->std_error, b.estimation->std_error);
  EXPECT_GT(se, 0.0);
  EXPECT_LT(std::abs(a.value - b.value), 4 * se);
}

TEST(Projected, SchemePreconditions) {
  const auto x = uniform_sphere(10, 3, 1);
  EXPECT_THROW(projected_statistic(StatisticKind::PCvM, x, DirectionScheme::grid(64)), ConfigError);
  EXPECT_THROW(projected_statistic(StatisticKind::PCvM, x, DirectionScheme::montecarlo(50, 1)),
               ConfigError);
  const auto c = uniform_sphere(10, 2, 1);
  EXPECT_THROW(projected_statistic(StatisticKind::PCvM, c, DirectionScheme::grid(8)), ConfigError);
  EXPECT_THROW(projected_statistic(StatisticKind::W2, c, DirectionScheme::grid(64)), ConfigError);
}

// The p = 3 projections are uniform on [-1,1], which makes the CvM pair kernel
// linear in the chord: N_{n,3} = 8 P^CvM_{n,3}.
TEST(PairKernel, CramerVonMisesP3IsLinear) {
  const auto& k = ProjectedPairKernel::get(StatisticKind::PCvM, 3);
  for (double d = 0.0; d <= 2.0; d += 0.0371) {
    EXPECT_NEAR(k.evaluate(d), 1.0 / 6.0 - d / 8.0, 1e-12);
    EXPECT_NEAR(k(d), 1.0 / 6.0 - d / 8.0, 1e-10);
  }
  const auto x = uniform_sphere(60, 3, 5);
  EXPECT_NEAR(projected_statistic(StatisticKind::PCvM, x, DirectionScheme::pairwise()).value,
              bakshaev_statistic(x).value / 8.0, 1e-9);
}

TEST(PairKernel, TableMatchesQuadrature) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> chord(0.0, 2.0);
  for (auto kind : {StatisticKind::PCvM, StatisticKind::PAD}) {
    for (int p : {2, 3, 5, 11}) {
      const auto& k = ProjectedPairKernel::get(kind, p);
      for (int i = 0; i < 12; ++i) {
        const double d = chord(rng);
        EXPECT_NEAR(k(d), k.evaluate(d), 2e-7) << kind_name(kind) << " p=" << p << " d=" << d;
      }
      EXPECT_NEAR(k(2.0), k.evaluate(2.0), 1e-9);
    }
  }
}

// Under uniformity E[W^2] = 1/6 and E[A^2] = 1 for every n, so the kernel
// integrates to zero against the chord distribution.
TEST(PairKernel, ZeroMeanUnderUniformity) {
  for (auto kind : {StatisticKind::PCvM, StatisticKind::PAD}) {
    for (int p : {2, 3, 4, 6, 11}) {
      const auto& k = ProjectedPairKernel::get(kind, p);
      const double c = std::exp(std::lgamma(0.5 * p) - std::lgamma(0.5 * (p - 1))) /
                       std::sqrt(std::numbers::pi);
      // substitute t = cos(s) to remove the endpoint singularity at p = 2
      auto f = [&](double s) {
        const double t = std::cos(s);
        return c * std::pow(std::sin(s), p - 2) * k(std::sqrt(std::max(0.0, 2 - 2 * t)));
      };
      const double mean = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          f, 0.0, std::numbers::pi, 10, 1e-11);
      EXPECT_NEAR(mean, 0.0, 1e-6) << kind_name(kind) << " p=" << p;
    }
  }
}

TEST(PairKernel, AgreesWithDirectionSchemes) {
  for (auto kind : {StatisticKind::PCvM, StatisticKind::PAD}) {
    const auto c = uniform_sphere(25, 2, 41);
    const double pair2 = projected_statistic(kind, c, DirectionScheme::pairwise()).value;
    const double grid2 = projected_statistic(kind, c, DirectionScheme::grid(16384)).value;
    EXPECT_NEAR(pair2, grid2, 2e-4 * std::abs(grid2)) << kind_name(kind);
    for (std::size_t p : {3u, 5u}) {
      const auto x = uniform_sphere(25, p, 50 + p);
      const double pair = projected_statistic(kind, x, DirectionScheme::pairwise()).value;
      const auto mc = projected_statistic(kind, x, DirectionScheme::montecarlo(40000, 8));
      EXPECT_NEAR(pair, mc.value, 4 * mc.estimation->std_error) << kind_name(kind) << " p=" << p;
    }
  }
}

TEST(PairKernel, RejectsClassicalKinds) {
  EXPECT_THROW(ProjectedPairKernel(StatisticKind::D, 3), ConfigError);
  EXPECT_THROW(ProjectedPairKernel(StatisticKind::PCvM, 1), DomainError);
}

TEST(ProjectionCdf, MatchesIncompleteBeta) {
  for (int p = 2; p <= 400; p += (p < 20 ? 1 : 37)) {
    for (double x : {0.0, 1e-8, 0.013, 0.2, 0.5, 0.77, 0.95, 0.999999, 1.0}) {
      const double beta = 0.5 * (1 + boost::math::ibeta(0.5, 0.5 * (p - 1), x * x));
      EXPECT_NEAR(projection_cdf(x, p), beta, 2e-15 * p) << "p=" << p << " x=" << x;
    }
  }
}
