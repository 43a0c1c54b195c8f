#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gofstab/alpha_grid.hpp"
#include "gofstab/asymptotics.hpp"
#include "gofstab/pairwise.hpp"
#include "gofstab/statistics.hpp"

namespace gof {

// Classical kinds share uniform samples; directional kinds share spherical ones.
enum class StreamFamily : std::uint64_t { classical = 1, spherical = 2 };

constexpr StreamFamily family_of(StatisticKind kind) noexcept {
  return is_classical(kind) ? StreamFamily::classical : StreamFamily::spherical;
}

// Replicates are drawn in blocks; block b of cell (n, p) uses its own stream
// keyed by (seed, family, n, p, b), so results never depend on scheduling.
inline constexpr std::uint64_t kBlockSize = 1024;

std::mt19937_64 replicate_stream(std::uint64_t seed, StreamFamily family, std::size_t n, int p,
                                 std::uint64_t block);

// Uniform on the open interval (0, 1) with 53 random bits.
inline double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Ascending Unif(0,1) sample of size n.
void sample_uniform_sorted(std::mt19937_64& rng, std::size_t n, std::vector<double>& out);

// n normalized Gaussian vectors in R^p, i.e. uniform on S^{p-1}.
SphericalSample sample_sphere(std::mt19937_64& rng, std::size_t n, int p);

// Evaluates several statistics of one family on the same null replicate, with
// the cheapest exact route for each (closed forms at p = 2 and p = 3, one
// shared pair pass otherwise). Circular replicates (p = 2) are drawn as
// uniform angles.
class NullSampler {
 public:
  NullSampler(std::vector<StatisticKind> kinds, std::size_t n, std::optional<int> p = std::nullopt);

  // out[k] = statistic kinds[k] of one fresh replicate.
  void draw(std::mt19937_64& rng, std::span<double> out);

  const std::vector<StatisticKind>& kinds() const noexcept { return kinds_; }

 private:
  void draw_circle(std::mt19937_64& rng, std::span<double> out);
  void draw_sphere(std::mt19937_64& rng, std::span<double> out);

  std::vector<StatisticKind> kinds_;
  std::size_t n_;
  int p_;
  double mean_chord_ = 0.0;
  std::vector<const ProjectedPairKernel*> kernels_;  // PCvM / PAD kernels in pair-pass order
  std::vector<int> kernel_slot_;                     // kinds_ index -> kernels_ index, or -1
  std::vector<double> u_;
  std::vector<double> sums_;
  PointCloud cloud_;
};

// One draw of T_n under H0.
double sample_null(StatisticKind kind, std::size_t n, std::optional<int> p, std::mt19937_64& rng);

// Upper quantiles of T_{n(,p)} over the quantile points of a grid.
class QuantileTable {
 public:
  QuantileTable(StatisticKind kind, std::vector<int> n_list, std::vector<int> p_list, AlphaGrid grid,
                std::uint64_t M, std::uint64_t seed);

  StatisticKind kind() const noexcept { return kind_; }
  const std::vector<int>& n_list() const noexcept { return n_list_; }
  const std::vector<int>& p_list() const noexcept { return p_list_; }  // empty for classical kinds
  const AlphaGrid& grid() const noexcept { return grid_; }
  std::uint64_t M() const noexcept { return M_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& version() const noexcept { return version_; }

  // Quantiles at alpha = 1/A, ..., (A-1)/A for one cell.
  std::span<const double> row(int n, std::optional<int> p = std::nullopt) const;
  std::span<double> row(int n, std::optional<int> p = std::nullopt);
  double at(int n, std::optional<int> p, double alpha) const;

  // Throws DataError unless every row is nonincreasing in alpha.
  void check_monotone() const;

  void write(const std::filesystem::path& csv) const;
  static QuantileTable read(const std::filesystem::path& csv);

  bool operator==(const QuantileTable&) const = default;

  static constexpr const char* kVersion = "gofstab-quantiles-1";

 private:
  std::size_t cell(int n, std::optional<int> p) const;

  StatisticKind kind_;
  std::vector<int> n_list_;
  std::vector<int> p_list_;
  AlphaGrid grid_;
  std::uint64_t M_;
  std::uint64_t seed_;
  std::string version_ = kVersion;
  std::vector<double> values_;
};

struct TableRequest {
  std::vector<StatisticKind> kinds;  // all classical or all directional
  std::vector<int> n_list;
  std::vector<int> p_list;  // directional kinds only
  AlphaGrid grid;
  std::uint64_t M = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  // Called after each finished (n, p) cell with (cells done, cells total).
  std::function<void(std::size_t, std::size_t)> progress;
};

// M null replicates of each kind on shared samples, in replicate order;
// out[k][r] is kinds[k] on replicate r. Independent of the worker count.
std::vector<std::vector<double>> simulate_null(const std::vector<StatisticKind>& kinds, std::size_t n,
                                               std::optional<int> p, std::uint64_t M, std::uint64_t seed,
                                               unsigned workers = 1);

// Monte Carlo p-value: the fraction of `trials` null replicates at T's (n, p)
// that are >= T.value.
double montecarlo_pvalue(const StatisticValue& T, std::uint64_t trials, std::uint64_t seed);

// Builds one table per requested kind; kinds share every replicate sample.
std::vector<QuantileTable> build_quantile_tables(const TableRequest& request);

QuantileTable build_quantile_table(StatisticKind kind, const std::vector<int>& n_list, const AlphaGrid& grid,
                                   std::uint64_t M, const std::vector<int>& p_list = {},
                                   std::uint64_t seed = 1, unsigned workers = 1);

// Upper alpha-quantile of M sorted replicates: order statistic ceil(M(1 - alpha)), 1-based.
std::size_t upper_quantile_index(std::uint64_t M, std::size_t a, std::size_t A);

struct RatioRow {
  int n = 0;
  std::optional<int> p;
  double alpha = 0.0;
  double Y = 0.0;  // T_{inf;alpha} / T_{n;alpha}
  double T_n_alpha = 0.0;
  double T_inf_alpha = 0.0;
};

struct RatioDataset {
  StatisticKind kind = StatisticKind::D;
  std::uint64_t M = 0;
  std::vector<RatioRow> rows;
};

// One row per (n, [p], alpha) with alpha <= alpha_max. Classical numerators come
// from the series unless `asymptotic` holds them; directional ones from
// `asymptotic`, with rows only at the alphas it covers.
RatioDataset ratio_dataset(const QuantileTable& table, const CriticalTable& asymptotic,
                           double alpha_max = 0.25);

// f_n(T_{n;alpha}) from a monotone cubic interpolant of (T_{n;alpha_k}, 1 - alpha_k).
// alpha must be a grid point strictly inside the quantile points.
double density_at_quantile(const QuantileTable& table, int n, std::optional<int> p, double alpha);
// The same interpolant's derivative at every quantile point of the row; the
// two end points use the one-sided slopes.
std::vector<double> quantile_densities(const QuantileTable& table, int n, std::optional<int> p);

}  // namespace gof
