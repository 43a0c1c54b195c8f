#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "gofstab/alpha_grid.hpp"
#include "gofstab/statistics.hpp"

namespace gof {

// Limiting null law of a classical statistic, evaluated by series.
struct AsymptoticLaw {
  StatisticKind kind;
  int series_truncation = 100;
  double tail_tolerance = 1e-12;

  explicit AsymptoticLaw(StatisticKind k, int truncation = 100, double tolerance = 1e-12);

  double sf(double x) const;
  double cdf(double x) const { return 1.0 - sf(x); }
  // Upper alpha-quantile: sf(result) = alpha.
  double quantile(double alpha) const;
};

double asymptotic_sf(StatisticKind kind, double x);
double asymptotic_quantile(StatisticKind kind, double alpha);

enum class TableProvenance { series, published, mc_n500 };

std::string_view provenance_name(TableProvenance p) noexcept;

// Asymptotic critical values T_{inf;alpha} (classical kinds, p empty) or
// T_{inf,p;alpha} (directional kinds).
class CriticalTable {
 public:
  struct Meta {
    TableProvenance provenance = TableProvenance::series;
    std::uint64_t M = 0;
    std::uint64_t seed = 0;
    int n_asymptotic = 0;
    std::string created;
  };

  CriticalTable() = default;
  explicit CriticalTable(Meta meta) : meta_(std::move(meta)) {}

  // The directional critical values published for p = 2..11 at
  // alpha = 0.10, 0.05, 0.01.
  static const CriticalTable& published();
  // Series values for every classical kind over the quantile points of grid.
  static CriticalTable from_series(const AlphaGrid& grid);

  void set(StatisticKind kind, std::optional<int> p, double alpha, double value);
  bool contains(StatisticKind kind, std::optional<int> p, double alpha) const;
  // Exact-alpha lookup; throws TableMissError naming the key.
  double at(StatisticKind kind, std::optional<int> p, double alpha) const;

  // (alpha, value) pairs for one (kind, p), ascending in alpha.
  std::vector<std::pair<double, double>> column(StatisticKind kind, std::optional<int> p) const;
  std::vector<std::pair<StatisticKind, std::optional<int>>> series() const;

  // Throws DataError unless every column is strictly decreasing in alpha.
  void check_monotone() const;
  void merge(const CriticalTable& other);

  const Meta& meta() const noexcept { return meta_; }
  Meta& meta() noexcept { return meta_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // CSV `kind,p,alpha,value` plus `<path>.json` sidecar.
  void write(const std::filesystem::path& csv) const;
  static CriticalTable read(const std::filesystem::path& csv);

 private:
  using Key = std::tuple<StatisticKind, int, std::int64_t>;  // p = 0 for classical
  Meta meta_;
  std::map<Key, double> entries_;
};

double projected_asymptotic_quantile(StatisticKind kind, int p, double alpha,
                                     const CriticalTable& table = CriticalTable::published());

// Simulates T_{500,p} M times per p and stores its upper quantiles over the
// quantile points of grid. Replicate streams depend only on (seed, n, p, block).
CriticalTable build_projected_table(StatisticKind kind, const std::vector<int>& dims,
                                    const AlphaGrid& grid, std::uint64_t M, std::uint64_t seed,
                                    unsigned workers = 1);
// Same for several directional kinds sharing one simulated sample per replicate.
CriticalTable build_projected_table(const std::vector<StatisticKind>& kinds,
                                    const std::vector<int>& dims, const AlphaGrid& grid,
                                    std::uint64_t M, std::uint64_t seed, unsigned workers = 1);

inline constexpr int kAsymptoticSampleSize = 500;

}  // namespace gof
