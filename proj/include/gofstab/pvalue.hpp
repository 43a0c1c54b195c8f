#pragma once

#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "gofstab/alpha_grid.hpp"
#include "gofstab/asymptotics.hpp"
#include "gofstab/stabilizer.hpp"
#include "gofstab/statistics.hpp"

namespace gof {

enum class PValueMethod { newton, extrapolated, capped };
std::string_view method_name(PValueMethod m) noexcept;

struct PValueResult {
  double value = 0.25;
  std::optional<std::pair<double, double>> bracket;  // (alpha_1, alpha_2)
  PValueMethod method = PValueMethod::capped;
};

inline constexpr double kPValueCap = 0.25;

// Asymptotic upper quantiles T_{inf;alpha} on an increasing alpha column,
// strictly decreasing in alpha.
class QuantileColumn {
 public:
  QuantileColumn(std::vector<double> alphas, std::vector<double> values);

  // Series quantiles of a classical kind at the grid points alpha <= alpha_max.
  static QuantileColumn classical(StatisticKind kind, const AlphaGrid& grid,
                                  double alpha_max = kPValueCap);
  // The alpha <= alpha_max entries of a critical table for one (kind, p).
  static QuantileColumn from_table(const CriticalTable& table, StatisticKind kind,
                                   std::optional<int> p, double alpha_max = kPValueCap);

  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return alphas_.size(); }

 private:
  std::vector<double> alphas_;
  std::vector<double> values_;
};

// p-value for a statistic T whose stabilizing multiplier at fixed n (and p) is g.
// Brackets pair each alpha_k with the quantile at the same index k.
PValueResult approx_pvalue(double T, const Multiplier& g, const QuantileColumn& column);

// Grid form: T_inf holds the quantiles at the first T_inf.size() grid points.
PValueResult approx_pvalue(const StatisticValue& T, const AlphaGrid& grid,
                           std::span<const double> T_inf, const StabilizedForm& form,
                           Validity validity = Validity::strict);

// Reject H0 at level alpha iff T*_n(alpha) > T_{inf;alpha}.
bool reject(const StatisticValue& T, double alpha, const StabilizedForm& form,
            Validity validity = Validity::strict);
bool reject(const StatisticValue& T, double alpha, const DimStabilizedForm& form,
            const CriticalTable& table, Validity validity = Validity::strict);

// Built-in forms with cached quantile columns. Classical kinds use the series
// on the grid; directional kinds use whatever alpha column the table holds.
class PValueEngine {
 public:
  explicit PValueEngine(AlphaGrid grid = AlphaGrid(),
                        CriticalTable table = CriticalTable::published(),
                        Validity validity = Validity::strict);

  PValueResult pvalue(const StatisticValue& T) const;
  bool reject(const StatisticValue& T, double alpha) const;

  const AlphaGrid& grid() const noexcept { return grid_; }
  const CriticalTable& table() const noexcept { return table_; }
  const QuantileColumn& column(StatisticKind kind, std::optional<int> p) const;

 private:
  AlphaGrid grid_;
  CriticalTable table_;
  Validity validity_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<StatisticKind, int>, QuantileColumn> columns_;
};

// Reads `statistic,n[,p]` rows and writes `statistic,n,p,pvalue,method` rows.
// Rows whose p-value cannot be computed are written with method "error:<reason>".
// Returns the number of rows that failed.
std::size_t batch_pvalues(std::istream& in, std::ostream& out, StatisticKind kind,
                          const PValueEngine& engine);

}  // namespace gof
