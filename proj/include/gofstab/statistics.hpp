#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gof {

enum class StatisticKind { D, W2, A2, V, U2, PCvM, PAD, NBak };

inline constexpr std::array<StatisticKind, 5> kClassicalKinds{
    StatisticKind::D, StatisticKind::W2, StatisticKind::A2, StatisticKind::V, StatisticKind::U2};
inline constexpr std::array<StatisticKind, 3> kDirectionalKinds{
    StatisticKind::PCvM, StatisticKind::PAD, StatisticKind::NBak};

constexpr bool is_classical(StatisticKind k) noexcept {
  return k == StatisticKind::D || k == StatisticKind::W2 || k == StatisticKind::A2 ||
         k == StatisticKind::V || k == StatisticKind::U2;
}
constexpr bool is_directional(StatisticKind k) noexcept { return !is_classical(k); }

std::string_view kind_name(StatisticKind kind) noexcept;
// Accepts the canonical names (D, W2, A2, V, U2, PCvM, PAD, NBak), case-insensitively.
StatisticKind parse_kind(std::string_view name);

// Sorted observations on [0,1], typically u_i = F0(X_i).
class UnitSample {
 public:
  explicit UnitSample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

// n points on the unit sphere S^{p-1}, stored row-major.
class SphericalSample {
 public:
  // Rows must already have unit norm within 1e-10.
  SphericalSample(std::vector<double> row_major, std::size_t p);

  // Rescales rows whose norm is within `tolerance` of one; rejects the rest.
  static SphericalSample normalized(std::vector<double> row_major, std::size_t p,
                                    double tolerance = 1e-6);
  static SphericalSample from_angles(std::span<const double> radians);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return p_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * p_, p_};
  }
  std::span<const double> data() const noexcept { return data_; }

 private:
  SphericalSample() = default;
  std::vector<double> data_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
};

enum class DirectionSchemeType { grid, montecarlo, pairwise };

// How the integral over projection directions is evaluated for PCvM and PAD.
//  grid:       G equispaced directions on the circle (p = 2 only)
//  montecarlo: count normalized Gaussian directions drawn from `seed`
//  pairwise:   exact direction integral through the tabulated pair kernel
struct DirectionScheme {
  DirectionSchemeType type = DirectionSchemeType::pairwise;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  static DirectionScheme grid(std::size_t directions) {
    return {DirectionSchemeType::grid, directions, 0};
  }
  static DirectionScheme montecarlo(std::size_t directions, std::uint64_t seed) {
    return {DirectionSchemeType::montecarlo, directions, seed};
  }
  static DirectionScheme pairwise() { return {DirectionSchemeType::pairwise, 0, 0}; }
};

struct DirectionEstimate {
  std::size_t direction_count = 0;
  DirectionSchemeType scheme = DirectionSchemeType::pairwise;
  // Standard error of the direction average; zero for the deterministic schemes.
  double std_error = 0.0;
  // Directions dropped because a projected value hit exactly 0 or 1 (PAD only).
  std::size_t skipped_directions = 0;
};

struct StatisticValue {
  StatisticKind kind;
  double value = 0.0;
  std::size_t n = 0;
  std::optional<int> p;
  std::optional<DirectionEstimate> estimation;
};

// What A2 does with an observation equal to exactly 0 or 1.
enum class BoundaryPolicy { reject, clamp };
inline constexpr double kBoundaryClamp = 1e-12;

// Classical statistic of an ascending sample on [0,1]. No validation beyond
// the A2 boundary check; the hot path of the simulators. D and V are
// reported as sqrt(n) D_n and sqrt(n) V_n, the scale of their limit laws.
double classical_value(StatisticKind kind, std::span<const double> sorted,
                       BoundaryPolicy policy = BoundaryPolicy::reject);

StatisticValue classical_statistic(StatisticKind kind, const UnitSample& u,
                                   BoundaryPolicy policy = BoundaryPolicy::reject);

// Cdf of gamma'X for X uniform on S^{p-1}.
double projection_cdf(double x, int p);

// E||X1 - X2|| for independent uniform points on S^{p-1}.
double mean_chord(int p);

StatisticValue bakshaev_statistic(const SphericalSample& x);

StatisticValue projected_statistic(StatisticKind kind, const SphericalSample& x,
                                   const DirectionScheme& scheme);

}  // namespace gof
