#include "gofstab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "gofstab/errors.hpp"
#include "gofstab/simulation.hpp"

namespace gof {
namespace {

// Fraction of sorted values strictly above c.
double rate_above(const std::vector<double>& sorted, double c) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), c);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

// Upper alpha-quantile of sorted values by the ceil(M(1 - alpha)) rule.
double upper_quantile(const std::vector<double>& sorted, double alpha) {
  constexpr std::size_t A = 1000000;
  const auto a = static_cast<std::size_t>(std::llround(alpha * A));
  return sorted[upper_quantile_index(sorted.size(), a, A) - 1];
}

double limit_quantile(StatisticKind kind, std::optional<int> p, double alpha, const CriticalTable& table) {
  return is_classical(kind) ? asymptotic_quantile(kind, alpha) : table.at(kind, p, alpha);
}

}  // namespace

std::string_view method_name(CvMethod method) noexcept {
  switch (method) {
    case CvMethod::new_form: return "new_form";
    case CvMethod::stephens: return "stephens";
    case CvMethod::montecarlo_cv: return "montecarlo_cv";
  }
  return "?";
}

CvMethod parse_cv_method(std::string_view text) {
  for (auto m : {CvMethod::new_form, CvMethod::stephens, CvMethod::montecarlo_cv}) {
    if (text == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(text) + "' (new_form, stephens, montecarlo_cv)");
}

std::vector<int> default_validation_sizes() { return {5, 6, 7, 8, 9, 10, 20, 30, 40, 50, 100, 200, 300}; }

std::vector<double> default_validation_alphas() {
  std::vector<double> out;
  for (int a = 1; a <= 25; ++a) out.push_back(a / 100.0);
  return out;
}

double ValidationReport::mean_rel_error(StatisticKind kind, CvMethod method, int n_lo, int n_hi) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : rows) {
    if (r.kind == kind && r.method == method && r.n >= n_lo && r.n < n_hi) {
      sum += r.rel_error;
      ++count;
    }
  }
  if (count == 0) throw DataError("no validation rows for " + std::string(kind_name(kind)) + "/" +
                                  std::string(method_name(method)));
  return sum / static_cast<double>(count);
}

const ValidationRow& ValidationReport::at(StatisticKind kind, int n, double alpha, CvMethod method) const {
  for (const auto& r : rows) {
    if (r.kind == kind && r.n == n && r.method == method && std::abs(r.alpha - alpha) < 1e-12) return r;
  }
  throw DataError("no validation row for " + std::string(kind_name(kind)) + " n=" + std::to_string(n));
}

void ValidationReport::write_csv(std::ostream& os) const {
  const auto precision = os.precision(8);
  os << "kind,p,n,alpha,method,rate,rel_error,std_error,M\n";
  const std::string p_text = p ? std::to_string(*p) : "";
  for (const auto& r : rows) {
    os << kind_name(r.kind) << ',' << p_text << ',' << r.n << ',' << r.alpha << ',' << method_name(r.method) << ','
       << r.rate << ',' << r.rel_error << ',' << r.std_error << ',' << M << '\n';
  }
  os << "\nkind,p,method,band,mean_rel_error\n";
  std::vector<std::pair<StatisticKind, CvMethod>> seen;
  for (const auto& r : rows) {
    const std::pair key{r.kind, r.method};
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
  }
  constexpr int kMax = std::numeric_limits<int>::max();
  const std::array<std::tuple<const char*, int, int>, 4> bands{
      {{"n<10", 0, 10}, {"10<=n<100", 10, 100}, {"n>=100", 100, kMax}, {"all", 0, kMax}}};
  for (const auto& [kind, method] : seen) {
    for (const auto& [label, lo, hi] : bands) {
      bool any = false;
      for (const auto& r : rows) any = any || (r.kind == kind && r.method == method && r.n >= lo && r.n < hi);
      if (!any) continue;
      os << kind_name(kind) << ',' << p_text << ',' << method_name(method) << ',' << label << ','
         << mean_rel_error(kind, method, lo, hi) << '\n';
    }
  }
  os.precision(precision);
}

ValidationReport validate(const ValidationRequest& req) {
  if (req.M < 10000) throw ConfigError("validation needs M >= 10^4");
  if (req.M_cv < 100) throw ConfigError("Monte Carlo critical values need M_cv >= 100");
  if (req.kinds.empty() || req.n_list.empty() || req.alphas.empty() || req.methods.empty()) {
    throw ConfigError("validation needs kinds, sample sizes, levels and methods");
  }
  for (double a : req.alphas) {
    if (!(a >= kSmallestAlpha && a <= 0.25 + 1e-12)) throw ConfigError("validation levels must lie in [0.001, 0.25]");
  }
  std::vector<StatisticKind> classical, directional;
  for (auto k : req.kinds) (is_classical(k) ? classical : directional).push_back(k);
  if (!directional.empty() && !req.p) throw ConfigError("directional kinds need p");
  const bool want_mc = std::find(req.methods.begin(), req.methods.end(), CvMethod::montecarlo_cv) != req.methods.end();

  ValidationReport report;
  report.M = req.M;
  report.M_cv = req.M_cv;
  if (!directional.empty()) report.p = req.p;
  const std::size_t total = req.n_list.size() * (!classical.empty() + !directional.empty());
  std::size_t done = 0;
  for (const auto* group : {&classical, &directional}) {
    if (group->empty()) continue;
    const auto p = is_classical(group->front()) ? std::nullopt : req.p;
    for (int n : req.n_list) {
      if (n < 1) throw ConfigError("sample sizes must be positive");
      const auto size = static_cast<std::size_t>(n);
      auto reps = simulate_null(*group, size, p, req.M, req.seed, req.workers);
      for (auto& v : reps) std::sort(v.begin(), v.end());
      std::vector<std::vector<std::vector<double>>> cv;  // [repeat][kind] sorted
      if (want_mc) {
        for (unsigned r = 0; r < req.cv_repeats; ++r) {
          const std::uint64_t cv_seed = req.seed + 0x9E3779B97F4A7C15ull * (r + 1);
          cv.push_back(simulate_null(*group, size, p, req.M_cv, cv_seed, req.workers));
          for (auto& v : cv.back()) std::sort(v.begin(), v.end());
        }
      }
      for (std::size_t k = 0; k < group->size(); ++k) {
        const auto kind = (*group)[k];
        for (double alpha : req.alphas) {
          const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(req.M));
          const double limit = limit_quantile(kind, p, alpha, *req.asymptotic);
          for (auto method : req.methods) {
            ValidationRow row{kind, n, alpha, method, 0.0, 0.0, se};
            const auto score = [&](double c) {
              const double rate = rate_above(reps[k], c);
              row.rate += rate;
              row.rel_error += std::abs(alpha - rate) / alpha;
            };
            switch (method) {
              case CvMethod::new_form:
                if (is_classical(kind)) {
                  const auto it = req.forms.find(kind);
                  const auto& form = it != req.forms.end() ? it->second : builtin_form(kind);
                  score(critical_value(form, n, alpha));
                } else {
                  score(critical_value(builtin_dim_form(kind), n, *p, alpha, *req.asymptotic));
                }
                break;
              case CvMethod::stephens:
                if (!is_classical(kind)) continue;
                score(stephens_form(kind).invert(limit, n, Validity::relaxed));
                break;
              case CvMethod::montecarlo_cv:
                for (const auto& repeat : cv) score(upper_quantile(repeat[k], alpha));
                row.rate /= static_cast<double>(cv.size());
                row.rel_error /= static_cast<double>(cv.size());
                break;
            }
            report.rows.push_back(row);
          }
        }
      }
      if (req.progress) req.progress(++done, total);
    }
  }
  return report;
}

}  // namespace gof
