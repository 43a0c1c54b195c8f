#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gofstab/pvalue.hpp"
#include "gofstab/statistics.hpp"

namespace gof {

// Benjamini-Yekutieli adjustment: sort ascending, adj_(i) = min(1, p_(i) m c(m) / i)
// with c(m) = sum_{k<=m} 1/k, then the running minimum from the largest down.
// Returned in the input order. Throws DomainError for p outside [0, 1].
std::vector<double> by_fdr(std::span<const double> pvalues);

enum class FdrMethod { none, by };

struct ScanConfig {
  // Window by observation count, or by duration in days when window_days is set.
  std::size_t window = 100;
  std::optional<double> window_days;
  std::size_t step = 1;  // in observations
  StatisticKind kind = StatisticKind::PAD;
  FdrMethod fdr = FdrMethod::by;

  void check() const;
};

struct ScanObservation {
  double time = 0.0;  // days
  double longitude_deg = 0.0;
  std::string group;
  std::string time_text;  // as read; echoed in the output
};

struct ScanRow {
  std::string group;
  std::string start;  // time of the first observation in the window
  std::string end;    // time of the last observation in the window
  std::size_t n = 0;
  double statistic = 0.0;
  double p_raw = 0.0;
  double p_adjusted = 0.0;
  PValueMethod method = PValueMethod::capped;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<std::string> notices;
};

// Statistic of angles on the circle: directional kinds at p = 2, classical
// kinds on u = angle / (2 pi) mod 1.
StatisticValue circular_statistic(StatisticKind kind, std::span<const double> radians);

// "YYYY-MM-DD" (optionally followed by "THH:MM[:SS][Z]") as days since
// 1970-01-01, or a plain real day number.
double parse_time(const std::string& text, std::size_t line);

// CSV with columns time, longitude_deg and optional group.
std::vector<ScanObservation> read_scan_input(std::istream& in);

// Tests each window of each group (groups analyzed separately, in order of
// first appearance) for circular uniformity; windows with n < 5 are skipped
// with a notice. The FDR adjustment runs once per group over all its windows;
// capped p-values enter it as 0.25.
ScanResult scan(std::vector<ScanObservation> observations, const ScanConfig& config,
                const PValueEngine& engine);

// Header plus one row per window; nothing at all when there are no rows.
void write_scan_csv(const ScanResult& result, std::ostream& os);

}  // namespace gof
