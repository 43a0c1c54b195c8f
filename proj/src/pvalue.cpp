#include "gofstab/pvalue.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "gofstab/errors.hpp"

namespace gof {
namespace {

constexpr int kMaxNewton = 50;
constexpr double kStepTolerance = 1e-10;
// Extrapolation looks for the root down to alpha_1 * 2^-kMaxHalvings.
constexpr int kMaxHalvings = 60;

struct Equation {
  double T;
  const Multiplier& g;
  double a1, t1, slope;

  double operator()(double a) const { return T * g(a) - (t1 + slope * (a - a1)); }
  double derivative(double a) const { return T * g.derivative(a) - slope; }
};

// Root of h on [lo, hi] with h(lo) <= 0 < h(hi): Newton, falling back to
// bisection whenever a step leaves the bracket.
double solve(const Equation& h, double lo, double hi) {
  const double h_lo = h(lo), h_hi = h(hi);
  if (h_lo == 0.0) return lo;
  double x = lo + (hi - lo) * (-h_lo) / (h_hi - h_lo);
  for (int it = 0; it < kMaxNewton; ++it) {
    const double hx = h(x);
    if (hx == 0.0) return x;
    (hx < 0.0 ? lo : hi) = x;
    const double d = h.derivative(x);
    double next = x - hx / d;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < kStepTolerance) return next;
    x = next;
  }
  return x;
}

}  // namespace

std::string_view method_name(PValueMethod m) noexcept {
  switch (m) {
    case PValueMethod::newton: return "newton";
    case PValueMethod::extrapolated: return "extrapolated";
    case PValueMethod::capped: return "capped";
  }
  return "?";
}

QuantileColumn::QuantileColumn(std::vector<double> alphas, std::vector<double> values)
    : alphas_(std::move(alphas)), values_(std::move(values)) {
  if (alphas_.size() != values_.size()) throw DataError("quantile column: size mismatch");
  if (alphas_.size() < 2) throw DataError("quantile column needs at least two alphas");
  for (std::size_t k = 1; k < alphas_.size(); ++k) {
    if (!(alphas_[k] > alphas_[k - 1])) throw DataError("quantile column: alphas not increasing");
    if (!(values_[k] < values_[k - 1])) {
      throw DataError("asymptotic quantiles not strictly decreasing at alpha = " +
                      std::to_string(alphas_[k]));
    }
  }
}

QuantileColumn QuantileColumn::classical(StatisticKind kind, const AlphaGrid& grid, double alpha_max) {
  std::vector<double> a, v;
  const std::size_t count = grid.count_upto(alpha_max);
  for (std::size_t k = 0; k < count && k + 1 < grid.size(); ++k) {
    a.push_back(grid[k]);
    v.push_back(asymptotic_quantile(kind, grid[k]));
  }
  return QuantileColumn(std::move(a), std::move(v));
}

QuantileColumn QuantileColumn::from_table(const CriticalTable& table, StatisticKind kind,
                                          std::optional<int> p, double alpha_max) {
  std::vector<double> a, v;
  for (const auto& [alpha, value] : table.column(kind, p)) {
    if (alpha > alpha_max + 1e-12) break;
    a.push_back(alpha);
    v.push_back(value);
  }
  if (a.size() < 2) {
    throw TableMissError("no critical-value column for (" + std::string(kind_name(kind)) +
                         (p ? ", p=" + std::to_string(*p) : std::string()) + ")");
  }
  return QuantileColumn(std::move(a), std::move(v));
}

PValueResult approx_pvalue(double T, const Multiplier& g, const QuantileColumn& column) {
  const auto a = column.alphas();
  const auto v = column.values();
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!(T * g(a[j]) > v[j])) continue;
    PValueResult r;
    if (j == 0) {
      // Rejected at every grid level: extend the line through the two
      // smallest alphas below alpha_1 and take the nonnegative root.
      const Equation h{T, g, a[0], v[0], (v[1] - v[0]) / (a[1] - a[0])};
      r.method = PValueMethod::extrapolated;
      r.value = 0.0;
      double hi = a[0];
      for (int k = 0; k < kMaxHalvings; ++k) {
        const double lo = 0.5 * hi;
        if (h(lo) <= 0.0) {
          r.value = solve(h, lo, hi);
          break;
        }
        hi = lo;
      }
      return r;
    }
    const Equation h{T, g, a[j - 1], v[j - 1], (v[j] - v[j - 1]) / (a[j] - a[j - 1])};
    r.method = PValueMethod::newton;
    r.bracket = std::pair{a[j - 1], a[j]};
    r.value = solve(h, a[j - 1], a[j]);
    return r;
  }
  return {kPValueCap, std::nullopt, PValueMethod::capped};
}

PValueResult approx_pvalue(const StatisticValue& T, const AlphaGrid& grid, std::span<const double> T_inf,
                           const StabilizedForm& form, Validity validity) {
  if (T.kind != form.kind) throw ConfigError("statistic kind does not match the form");
  std::vector<double> a;
  for (std::size_t k = 0; k < T_inf.size(); ++k) {
    if (grid[k] > form.alpha_max + 1e-12 && validity == Validity::strict) break;
    a.push_back(grid[k]);
  }
  const QuantileColumn column(a, std::vector<double>(T_inf.begin(), T_inf.begin() + a.size()));
  return approx_pvalue(T.value, form.at(static_cast<double>(T.n), validity), column);
}

bool reject(const StatisticValue& T, double alpha, const StabilizedForm& form, Validity validity) {
  return stabilize(T, alpha, form, validity) > asymptotic_quantile(form.kind, alpha);
}

bool reject(const StatisticValue& T, double alpha, const DimStabilizedForm& form, const CriticalTable& table,
            Validity validity) {
  const double t_star = stabilize(T, alpha, form, validity);
  return t_star > projected_asymptotic_quantile(form.kind, *T.p, alpha, table);
}

PValueEngine::PValueEngine(AlphaGrid grid, CriticalTable table, Validity validity)
    : grid_(grid), table_(std::move(table)), validity_(validity) {}

const QuantileColumn& PValueEngine::column(StatisticKind kind, std::optional<int> p) const {
  const std::pair key{kind, is_classical(kind) ? 0 : p.value_or(0)};
  std::lock_guard lock(mutex_);
  auto it = columns_.find(key);
  if (it == columns_.end()) {
    auto col = is_classical(kind) ? QuantileColumn::classical(kind, grid_)
                                  : QuantileColumn::from_table(table_, kind, p);
    it = columns_.emplace(key, std::move(col)).first;
  }
  return it->second;
}

PValueResult PValueEngine::pvalue(const StatisticValue& T) const {
  const double n = static_cast<double>(T.n);
  if (is_classical(T.kind)) {
    return approx_pvalue(T.value, builtin_form(T.kind).at(n, validity_), column(T.kind, std::nullopt));
  }
  if (!T.p) throw ConfigError(std::string(kind_name(T.kind)) + " p-values need p");
  return approx_pvalue(T.value, builtin_dim_form(T.kind).at(n, *T.p, validity_), column(T.kind, T.p));
}

bool PValueEngine::reject(const StatisticValue& T, double alpha) const {
  if (is_classical(T.kind)) {
    const auto k = grid_.index_of(alpha);
    const auto& col = column(T.kind, std::nullopt);
    if (k < 0 || static_cast<std::size_t>(k) >= col.size()) {
      return gof::reject(T, alpha, builtin_form(T.kind), validity_);
    }
    return stabilize(T, alpha, builtin_form(T.kind), validity_) > col.values()[static_cast<std::size_t>(k)];
  }
  if (!T.p) throw ConfigError(std::string(kind_name(T.kind)) + " needs p");
  return gof::reject(T, alpha, builtin_dim_form(T.kind), table_, validity_);
}

std::size_t batch_pvalues(std::istream& in, std::ostream& out, StatisticKind kind, const PValueEngine& engine) {
  const auto table = csv::read_table(in, {"statistic", "n"}, {"p"});
  std::size_t failed = 0;
  out << "statistic,n,p,pvalue,method\n";
  const auto precision = out.precision(10);
  for (const auto& row : table.rows) {
    StatisticValue T;
    T.kind = kind;
    T.value = csv::to_number(row.fields[0], row.line);
    const double n = csv::to_number(row.fields[1], row.line);
    if (!(n >= 1) || n != std::floor(n)) throw ParseError("n must be a positive integer", row.line);
    T.n = static_cast<std::size_t>(n);
    if (!row.fields[2].empty()) T.p = static_cast<int>(csv::to_number(row.fields[2], row.line));
    out << row.fields[0] << ',' << row.fields[1] << ',' << row.fields[2] << ',';
    try {
      const auto r = engine.pvalue(T);
      out << r.value << ',' << method_name(r.method) << '\n';
    } catch (const Error& e) {
      ++failed;
      out << "NA,\"error: " << e.what() << "\"\n";
    }
  }
  out.precision(precision);
  return failed;
}

}  // namespace gof
