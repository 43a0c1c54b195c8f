#include "gofstab/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include "json.hpp"

#include "csv.hpp"
#include "gofstab/errors.hpp"

namespace gof {
namespace {

constexpr double kPi = std::numbers::pi;

// Smallest x where the alternating large-x series of the Kolmogorov and
// Kuiper laws is used; below it the Jacobi-transformed series converges faster.
constexpr double kSeriesSwitch = 1.0;

double kolmogorov_sf(double x, int K, double tol) {
  if (x < kSeriesSwitch) {
    const double c = kPi * kPi / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= K; ++k) {
      const double term = std::exp(-(2 * k - 1) * (2 * k - 1) * c);
      s += term;
      if (term < tol) break;
    }
    return 1.0 - std::sqrt(2.0 * kPi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < tol) break;
  }
  return s;
}

double kuiper_sf(double x, int K, double tol) {
  if (x < kSeriesSwitch) {
    const double c = kPi * kPi / (2.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= K; ++k) {
      const double term = static_cast<double>(k) * k * std::exp(-k * k * c);
      s += term;
      if (term < tol) break;
    }
    return 1.0 - std::sqrt(2.0) * std::pow(kPi, 2.5) / (x * x * x) * s;
  }
  double s = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k) * k;
    const double term = 2.0 * (4.0 * kk * x * x - 1.0) * std::exp(-2.0 * kk * x * x);
    s += term;
    if (std::abs(term) < tol) break;
  }
  return s;
}

// Gamma(j + 1/2) / (sqrt(pi) j!), by recurrence.
struct HalfBinomial {
  double value = 1.0;
  int j = 0;
  void next() {
    value *= (j + 0.5) / (j + 1.0);
    ++j;
  }
};

// Cramer-von Mises limiting cdf:
//   (1/(pi sqrt x)) sum_j c_j sqrt(4j+1) e^{-q} K_{1/4}(q),  q = (4j+1)^2/(16x).
double cramer_cdf(double x, int K, double tol) {
  HalfBinomial c;
  double s = 0.0;
  for (int j = 0; j < K; ++j, c.next()) {
    const double m = 4.0 * j + 1.0;
    const double q = m * m / (16.0 * x);
    if (q > 700.0) break;
    const double term = c.value * std::sqrt(m) * std::exp(-q) * boost::math::cyl_bessel_k(0.25, q);
    s += term;
    if (term < tol) break;
  }
  return s / (kPi * std::sqrt(x));
}

// Anderson-Darling limiting cdf:
//   (sqrt(2 pi)/z) sum_j (-1)^j c_j (4j+1) e^{-(4j+1)^2 pi^2/(8z)}
//       * int_0^inf exp(z/(8(w^2+1)) - (4j+1)^2 pi^2 w^2/(8z)) dw.
double anderson_cdf(double z, int K, double tol) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  HalfBinomial c;
  double s = 0.0;
  for (int j = 0; j < K; ++j, c.next()) {
    const double m = 4.0 * j + 1.0;
    const double b = m * m * kPi * kPi / (8.0 * z);
    if (b > 745.0 + z / 8.0) break;
    const double upper = std::sqrt((50.0 + z / 8.0) / b);
    auto f = [&](double w) { return std::exp(z / (8.0 * (w * w + 1.0)) - b * (w * w + 1.0)); };
    const double integral = Quad::integrate(f, 0.0, upper, 12, 1e-14);
    const double term = c.value * m * integral;
    s += (j % 2 ? -term : term);
    if (std::abs(term) < tol) break;
  }
  return std::sqrt(2.0 * kPi) / z * s;
}

double series_sf(StatisticKind kind, double x, int K, double tol) {
  double sf;
  switch (kind) {
    case StatisticKind::D:
      sf = kolmogorov_sf(x, K, tol);
      break;
    case StatisticKind::V:
      sf = kuiper_sf(x, K, tol);
      break;
    case StatisticKind::U2:
      sf = kolmogorov_sf(kPi * std::sqrt(x), K, tol);
      break;
    case StatisticKind::W2:
      sf = 1.0 - cramer_cdf(x, K, tol);
      break;
    case StatisticKind::A2:
      sf = 1.0 - anderson_cdf(x, K, tol);
      break;
    default:
      throw ConfigError(std::string(kind_name(kind)) + " has no series limiting law");
  }
  return std::clamp(sf, 0.0, 1.0);
}

std::string describe(StatisticKind kind, std::optional<int> p, double alpha) {
  std::ostringstream os;
  os << "(" << kind_name(kind) << ", p=" << (p ? std::to_string(*p) : std::string("-"))
     << ", alpha=" << alpha << ")";
  return os.str();
}

}  // namespace

AsymptoticLaw::AsymptoticLaw(StatisticKind k, int truncation, double tolerance)
    : kind(k), series_truncation(truncation), tail_tolerance(tolerance) {
  if (!is_classical(k)) {
    throw ConfigError(std::string(kind_name(k)) + " has no series limiting law");
  }
  if (truncation < 1) throw ConfigError("series truncation must be positive");
}

double AsymptoticLaw::sf(double x) const {
  if (!(x > 0.0)) throw DomainError("asymptotic survival function needs x > 0");
  if (std::isinf(x)) return 0.0;
  return series_sf(kind, x, series_truncation, tail_tolerance);
}

double AsymptoticLaw::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  double lo = 1e-6, hi = 50.0;
  auto f = [&](double x) { return sf(x) - alpha; };
  // Bisection to a narrow bracket, then Newton with a central-difference slope.
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double h = 1e-6 * x;
    const double slope = (sf(x + h) - sf(x - h)) / (2.0 * h);
    if (!(slope < 0.0)) break;
    double next = x - f(x) / slope;
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    (f(next) > 0.0 ? lo : hi) = next;
    const double step = std::abs(next - x);
    x = next;
    if (step < 1e-10) break;
  }
  return x;
}

double asymptotic_sf(StatisticKind kind, double x) { return AsymptoticLaw(kind).sf(x); }

double asymptotic_quantile(StatisticKind kind, double alpha) {
  return AsymptoticLaw(kind).quantile(alpha);
}

std::string_view provenance_name(TableProvenance p) noexcept {
  switch (p) {
    case TableProvenance::series:
      return "series";
    case TableProvenance::published:
      return "published";
    case TableProvenance::mc_n500:
      return "mc_n500";
  }
  return "unknown";
}

const CriticalTable& CriticalTable::published() {
  static const CriticalTable table = [] {
    CriticalTable t({TableProvenance::published, 10'000'000, 0, 500, ""});
    constexpr std::array<double, 3> alphas{0.10, 0.05, 0.01};
    struct Row {
      StatisticKind kind;
      std::array<std::array<double, 10>, 3> values;  // [alpha][p - 2]
    };
    const Row rows[] = {
        {StatisticKind::PCvM,
         {{{0.3035, 0.2768, 0.2606, 0.2500, 0.2421, 0.2361, 0.2312, 0.2272, 0.2239, 0.2210},
           {0.3735, 0.3288, 0.3027, 0.2858, 0.2735, 0.2641, 0.2568, 0.2508, 0.2458, 0.2416},
           {0.5358, 0.4461, 0.3960, 0.3638, 0.3413, 0.3244, 0.3115, 0.3008, 0.2922, 0.2849}}}},
        {StatisticKind::PAD,
         {{{1.6871, 1.5604, 1.4816, 1.4279, 1.3883, 1.3576, 1.3327, 1.3124, 1.2957, 1.2809},
           {2.0293, 1.8214, 1.6951, 1.6106, 1.5494, 1.5023, 1.4651, 1.4347, 1.4092, 1.3875},
           {2.8197, 2.4096, 2.1679, 2.0090, 1.8969, 1.8126, 1.7471, 1.6931, 1.6493, 1.6121}}}},
        {StatisticKind::NBak,
         {{{2.4034, 2.2141, 2.1003, 2.0231, 1.9673, 1.9238, 1.8887, 1.8601, 1.8367, 1.8158},
           {2.9906, 2.6305, 2.4320, 2.3034, 2.2119, 2.1423, 2.0879, 2.0437, 2.0067, 1.9752},
           {4.3495, 3.5687, 3.1669, 2.9136, 2.7402, 2.6112, 2.5124, 2.4314, 2.3661, 2.3108}}}},
    };
    for (const auto& row : rows) {
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        for (int p = 2; p <= 11; ++p) t.set(row.kind, p, alphas[a], row.values[a][p - 2]);
      }
    }
    return t;
  }();
  return table;
}

CriticalTable CriticalTable::from_series(const AlphaGrid& grid) {
  CriticalTable t({TableProvenance::series, 0, 0, 0, csv::now_iso8601()});
  for (auto kind : kClassicalKinds) {
    const AsymptoticLaw law(kind);
    for (double alpha : grid.quantile_alphas()) t.set(kind, std::nullopt, alpha, law.quantile(alpha));
  }
  return t;
}

void CriticalTable::set(StatisticKind kind, std::optional<int> p, double alpha, double value) {
  if (is_directional(kind) && !p) throw ConfigError("directional critical values need p");
  if (is_classical(kind) && p) throw ConfigError("classical critical values take no p");
  entries_[{kind, p.value_or(0), alpha_key(alpha)}] = value;
}

bool CriticalTable::contains(StatisticKind kind, std::optional<int> p, double alpha) const {
  return entries_.count({kind, p.value_or(0), alpha_key(alpha)}) > 0;
}

double CriticalTable::at(StatisticKind kind, std::optional<int> p, double alpha) const {
  const auto it = entries_.find({kind, p.value_or(0), alpha_key(alpha)});
  if (it == entries_.end()) throw TableMissError("critical table has no entry for " + describe(kind, p, alpha));
  return it->second;
}

std::vector<std::pair<double, double>> CriticalTable::column(StatisticKind kind,
                                                             std::optional<int> p) const {
  std::vector<std::pair<double, double>> out;
  const int pp = p.value_or(0);
  for (auto it = entries_.lower_bound({kind, pp, INT64_MIN});
       it != entries_.end() && std::get<0>(it->first) == kind && std::get<1>(it->first) == pp; ++it) {
    out.emplace_back(static_cast<double>(std::get<2>(it->first)) * 1e-9, it->second);
  }
  return out;
}

std::vector<std::pair<StatisticKind, std::optional<int>>> CriticalTable::series() const {
  std::vector<std::pair<StatisticKind, std::optional<int>>> out;
  for (const auto& [key, value] : entries_) {
    const auto kind = std::get<0>(key);
    const int p = std::get<1>(key);
    std::optional<int> op = p ? std::optional<int>(p) : std::nullopt;
    if (out.empty() || out.back().first != kind || out.back().second != op) out.emplace_back(kind, op);
  }
  return out;
}

void CriticalTable::check_monotone() const {
  for (const auto& [kind, p] : series()) {
    const auto col = column(kind, p);
    for (std::size_t i = 1; i < col.size(); ++i) {
      if (!(col[i].second < col[i - 1].second)) {
        throw DataError("critical values not strictly decreasing in alpha at " +
                        describe(kind, p, col[i].first));
      }
    }
  }
}

void CriticalTable::merge(const CriticalTable& other) {
  for (const auto& [key, value] : other.entries_) entries_[key] = value;
}

void CriticalTable::write(const std::filesystem::path& csv) const {
  std::ofstream out(csv);
  if (!out) throw IoError("cannot write " + csv.string());
  out << "kind,p,alpha,value\n";
  out.precision(17);
  for (const auto& [key, value] : entries_) {
    const auto [kind, p, a] = key;
    out << kind_name(kind) << ',';
    if (p) out << p;
    out << ',' << csv::format_alpha(a) << ',' << value << '\n';
  }
  if (!out) throw IoError("failed writing " + csv.string());

  nlohmann::json side{{"provenance", provenance_name(meta_.provenance)},
                      {"M", meta_.M},
                      {"seed", meta_.seed},
                      {"n_asymptotic", meta_.n_asymptotic},
                      {"created", meta_.created}};
  const auto side_path = csv::sidecar_path(csv);
  std::ofstream js(side_path);
  if (!js) throw IoError("cannot write " + side_path.string());
  js << side.dump(2) << '\n';
}

CriticalTable CriticalTable::read(const std::filesystem::path& path) {
  CriticalTable t;
  const auto side_path = csv::sidecar_path(path);
  if (std::filesystem::exists(side_path)) {
    std::ifstream js(side_path);
    nlohmann::json side;
    try {
      js >> side;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(side_path.string() + ": " + e.what(), 0);
    }
    const std::string prov = side.value("provenance", "series");
    t.meta_.provenance = prov == "mc_n500"     ? TableProvenance::mc_n500
                         : prov == "published" ? TableProvenance::published
                                               : TableProvenance::series;
    t.meta_.M = side.value("M", std::uint64_t{0});
    t.meta_.seed = side.value("seed", std::uint64_t{0});
    t.meta_.n_asymptotic = side.value("n_asymptotic", 0);
    t.meta_.created = side.value("created", std::string{});
  }
  const auto rows = csv::read_table(path, {"kind", "p", "alpha", "value"});
  for (const auto& row : rows.rows) {
    StatisticKind kind;
    try {
      kind = parse_kind(row.fields[0]);
    } catch (const ConfigError& e) {
      throw ParseError(path.string() + ": " + e.what(), row.line);
    }
    std::optional<int> p;
    if (!row.fields[1].empty()) p = static_cast<int>(csv::to_number(row.fields[1], row.line));
    t.set(kind, p, csv::to_number(row.fields[2], row.line), csv::to_number(row.fields[3], row.line));
  }
  return t;
}

double projected_asymptotic_quantile(StatisticKind kind, int p, double alpha,
                                     const CriticalTable& table) {
  if (!is_directional(kind)) {
    throw ConfigError(std::string(kind_name(kind)) + " is not a directional statistic");
  }
  return table.at(kind, p, alpha);
}

}  // namespace gof
