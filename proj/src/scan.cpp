#include "gofstab/scan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "csv.hpp"
#include "gofstab/errors.hpp"

namespace gof {
namespace {

constexpr std::size_t kMinWindow = 5;

int parse_int(const std::string& s, std::size_t pos, std::size_t len, std::size_t line) {
  int v = 0;
  const char* first = s.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, v);
  if (ec != std::errc() || ptr != first + len) throw ParseError("bad timestamp '" + s + "'", line);
  return v;
}

}  // namespace

std::vector<double> by_fdr(std::span<const double> pvalues) {
  const std::size_t m = pvalues.size();
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
  double c = 0.0;
  for (std::size_t k = 1; k <= m; ++k) c += 1.0 / static_cast<double>(k);
  const double scale = static_cast<double>(m) * c;
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    const double adj = std::min(1.0, pvalues[order[i]] * scale / static_cast<double>(i + 1));
    running = std::min(running, adj);
    out[order[i]] = running;
  }
  return out;
}

void ScanConfig::check() const {
  if (step < 1) throw ConfigError("scan step must be at least 1");
  if (window_days) {
    if (!(*window_days > 0.0)) throw ConfigError("window duration must be positive");
  } else {
    if (window < kMinWindow) throw ConfigError("scan window must hold at least 5 observations");
    if (step > window) throw ConfigError("scan step cannot exceed the window");
  }
}

StatisticValue circular_statistic(StatisticKind kind, std::span<const double> radians) {
  if (kind == StatisticKind::NBak) return bakshaev_statistic(SphericalSample::from_angles(radians));
  if (is_directional(kind)) {
    return projected_statistic(kind, SphericalSample::from_angles(radians), DirectionScheme::pairwise());
  }
  std::vector<double> u;
  u.reserve(radians.size());
  for (double a : radians) {
    double v = std::fmod(a / (2.0 * std::numbers::pi), 1.0);
    if (v < 0.0) v += 1.0;
    u.push_back(v);
  }
  return classical_statistic(kind, UnitSample(std::move(u)), BoundaryPolicy::clamp);
}

double parse_time(const std::string& text, std::size_t line) {
  const auto s = csv::trim(text);
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
    using namespace std::chrono;
    const year_month_day ymd{year(parse_int(s, 0, 4, line)), month(static_cast<unsigned>(parse_int(s, 5, 2, line))),
                             day(static_cast<unsigned>(parse_int(s, 8, 2, line)))};
    if (!ymd.ok()) throw ParseError("invalid date '" + s + "'", line);
    double days = static_cast<double>(sys_days(ymd).time_since_epoch().count());
    if (s.size() > 10) {
      if ((s[10] != 'T' && s[10] != ' ') || s.size() < 16 || s[13] != ':') {
        throw ParseError("bad timestamp '" + s + "'", line);
      }
      const int hh = parse_int(s, 11, 2, line), mm = parse_int(s, 14, 2, line);
      int ss = 0;
      std::size_t end = 16;
      if (s.size() >= 19 && s[16] == ':') {
        ss = parse_int(s, 17, 2, line);
        end = 19;
      }
      if (end < s.size() && !(end + 1 == s.size() && s[end] == 'Z')) {
        throw ParseError("bad timestamp '" + s + "'", line);
      }
      if (hh > 23 || mm > 59 || ss > 60) throw ParseError("invalid time of day '" + s + "'", line);
      days += (hh * 3600.0 + mm * 60.0 + ss) / 86400.0;
    }
    return days;
  }
  try {
    const double v = csv::to_number(s, line);
    if (!std::isfinite(v)) throw ParseError("bad timestamp '" + s + "'", line);
    return v;
  } catch (const ParseError&) {
    throw ParseError("bad timestamp '" + s + "'", line);
  }
}

std::vector<ScanObservation> read_scan_input(std::istream& in) {
  const auto table = csv::read_table(in, {"time", "longitude_deg"}, {"group"});
  std::vector<ScanObservation> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    ScanObservation o;
    o.time_text = row.fields[0];
    o.time = parse_time(row.fields[0], row.line);
    o.longitude_deg = csv::to_number(row.fields[1], row.line);
    if (!std::isfinite(o.longitude_deg)) throw ParseError("longitude must be finite", row.line);
    o.group = row.fields[2];
    out.push_back(std::move(o));
  }
  return out;
}

ScanResult scan(std::vector<ScanObservation> observations, const ScanConfig& config, const PValueEngine& engine) {
  config.check();
  std::stable_sort(observations.begin(), observations.end(),
                   [](const ScanObservation& a, const ScanObservation& b) { return a.time < b.time; });
  std::vector<std::string> groups;
  std::map<std::string, std::vector<const ScanObservation*>> by_group;
  for (const auto& o : observations) {
    auto& g = by_group[o.group];
    if (g.empty()) groups.push_back(o.group);
    g.push_back(&o);
  }

  ScanResult result;
  const auto label = [](const std::string& g) { return g.empty() ? std::string() : " (group " + g + ")"; };
  for (const auto& name : groups) {
    const auto& obs = by_group[name];
    const std::size_t N = obs.size();
    // Window bounds [first, last) in observation indices.
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    if (config.window_days) {
      std::size_t j = 0;
      for (std::size_t i = 0; i < N; i += config.step) {
        const double end = obs[i]->time + *config.window_days;
        if (end > obs.back()->time) break;
        j = std::max(j, i);
        while (j < N && obs[j]->time < end) ++j;
        windows.emplace_back(i, j);
      }
    } else {
      for (std::size_t i = 0; i + config.window <= N; i += config.step) windows.emplace_back(i, i + config.window);
    }
    if (windows.empty()) {
      result.notices.push_back("window larger than the stream" + label(name) + "; nothing to test");
      continue;
    }
    std::size_t skipped = 0;
    std::vector<ScanRow> rows;
    std::vector<double> radians;
    for (const auto& [first, last] : windows) {
      if (last - first < kMinWindow) {
        ++skipped;
        continue;
      }
      radians.clear();
      for (std::size_t k = first; k < last; ++k) radians.push_back(obs[k]->longitude_deg * std::numbers::pi / 180.0);
      auto T = circular_statistic(config.kind, radians);
      if (is_directional(config.kind)) T.p = 2;
      const auto pv = engine.pvalue(T);
      rows.push_back({name, obs[first]->time_text, obs[last - 1]->time_text, last - first, T.value, pv.value,
                      pv.value, pv.method});
    }
    if (skipped > 0) {
      result.notices.push_back(std::to_string(skipped) + " window(s) with fewer than 5 observations skipped" +
                               label(name));
    }
    if (config.fdr == FdrMethod::by && !rows.empty()) {
      std::vector<double> raw;
      for (const auto& r : rows) raw.push_back(r.p_raw);
      const auto adj = by_fdr(raw);
      for (std::size_t k = 0; k < rows.size(); ++k) rows[k].p_adjusted = adj[k];
    }
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

void write_scan_csv(const ScanResult& result, std::ostream& os) {
  if (result.rows.empty()) return;
  const auto precision = os.precision(10);
  os << "group,window_start,window_end,n,statistic,p_raw,p_adjusted,method\n";
  for (const auto& r : result.rows) {
    os << r.group << ',' << r.start << ',' << r.end << ',' << r.n << ',' << r.statistic << ',' << r.p_raw << ','
       << r.p_adjusted << ',' << method_name(r.method) << '\n';
  }
  os.precision(precision);
}

}  // namespace gof
