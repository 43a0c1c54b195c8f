#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "gofstab/asymptotics.hpp"
#include "gofstab/stabilizer.hpp"
#include "gofstab/statistics.hpp"

namespace gof {

// How the exact-n critical value is approximated.
//   new_form       T_inf;alpha / g(n, alpha) from the (n, alpha) or (n, p, alpha) form
//   stephens       Stephens' modification compared with T_inf;alpha
//   montecarlo_cv  upper quantile of an independent M_cv-replicate simulation
enum class CvMethod { new_form, stephens, montecarlo_cv };

std::string_view method_name(CvMethod method) noexcept;
CvMethod parse_cv_method(std::string_view text);

// Sample sizes and levels of the calibration study.
std::vector<int> default_validation_sizes();    // 5..10, 20..50 by 10, 100, 200, 300
std::vector<double> default_validation_alphas();  // 0.01..0.25 by 0.01

struct ValidationRequest {
  std::vector<StatisticKind> kinds{kClassicalKinds.begin(), kClassicalKinds.end()};
  std::optional<int> p;  // directional kinds only
  std::vector<int> n_list = default_validation_sizes();
  std::vector<double> alphas = default_validation_alphas();
  std::vector<CvMethod> methods{CvMethod::new_form, CvMethod::stephens, CvMethod::montecarlo_cv};
  std::uint64_t M = 100000;
  std::uint64_t M_cv = 10000;
  // Independent Monte Carlo critical values per (kind, n, alpha); their
  // errors are averaged.
  unsigned cv_repeats = 10;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  // Replaces the built-in (n, alpha) form of a kind for new_form.
  std::map<StatisticKind, StabilizedForm> forms;
  // Asymptotic quantiles for the directional kinds.
  const CriticalTable* asymptotic = &CriticalTable::published();
  std::function<void(std::size_t, std::size_t)> progress;
};

struct ValidationRow {
  StatisticKind kind = StatisticKind::D;
  int n = 0;
  double alpha = 0.0;
  CvMethod method = CvMethod::new_form;
  double rate = 0.0;       // empirical rejection rate (mean over repeats for montecarlo_cv)
  double rel_error = 0.0;  // |alpha - rate| / alpha (mean over repeats for montecarlo_cv)
  double std_error = 0.0;  // sqrt(alpha (1 - alpha) / M)
};

struct ValidationReport {
  std::uint64_t M = 0;
  std::uint64_t M_cv = 0;
  std::optional<int> p;
  std::vector<ValidationRow> rows;

  // Mean relative error over rows matching kind, method and n in [n_lo, n_hi).
  double mean_rel_error(StatisticKind kind, CvMethod method, int n_lo = 0,
                        int n_hi = std::numeric_limits<int>::max()) const;
  const ValidationRow& at(StatisticKind kind, int n, double alpha, CvMethod method) const;

  // Rows, then per (kind, method) means over n < 10, 10 <= n < 100, n >= 100 and overall.
  void write_csv(std::ostream& os) const;
};

// Rejection rates under H0 of each method's critical value, all methods
// evaluated on the same M null replicates per (kind family, n).
ValidationReport validate(const ValidationRequest& request);

}  // namespace gof
