#include "gofstab/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <thread>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "csv.hpp"
#include "gofstab/errors.hpp"
#include "json.hpp"

namespace gof {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// Fills row i of the structure-of-arrays cloud with a normalized Gaussian vector.
void draw_point(std::mt19937_64& rng, std::normal_distribution<double>& normal, PointCloud& cloud,
                std::size_t i, double* scratch) {
  const std::size_t p = cloud.dim();
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      scratch[k] = normal(rng);
      norm2 += scratch[k] * scratch[k];
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t k = 0; k < p; ++k) cloud.column(k)[i] = scratch[k] * inv;
}

}  // namespace

std::mt19937_64 replicate_stream(std::uint64_t seed, StreamFamily family, std::size_t n, int p,
                                 std::uint64_t block) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed),  hi(seed),  lo(static_cast<std::uint64_t>(family)),
                    lo(n),     hi(n),     static_cast<std::uint32_t>(p),
                    lo(block), hi(block)};
  return std::mt19937_64(seq);
}

void sample_uniform_sorted(std::mt19937_64& rng, std::size_t n, std::vector<double>& out) {
  out.resize(n);
  for (auto& u : out) u = open_uniform(rng);
  std::sort(out.begin(), out.end());
}

SphericalSample sample_sphere(std::mt19937_64& rng, std::size_t n, int p) {
  require(p >= 2, "spherical samples need p >= 2");
  std::normal_distribution<double> normal;
  PointCloud cloud(n, static_cast<std::size_t>(p));
  std::vector<double> scratch(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < n; ++i) draw_point(rng, normal, cloud, i, scratch.data());
  std::vector<double> rows(n * static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cloud.dim(); ++k) rows[i * cloud.dim() + k] = cloud.column(k)[i];
  }
  return SphericalSample::normalized(std::move(rows), static_cast<std::size_t>(p));
}

NullSampler::NullSampler(std::vector<StatisticKind> kinds, std::size_t n, std::optional<int> p)
    : kinds_(std::move(kinds)), n_(n), p_(p.value_or(0)), cloud_(n, static_cast<std::size_t>(p.value_or(0))) {
  require(!kinds_.empty(), "no statistic requested");
  const auto family = family_of(kinds_.front());
  for (auto k : kinds_) require(family_of(k) == family, "cannot mix classical and directional kinds in one sample");
  require(n_ >= 1, "sample size must be positive");
  if (family == StreamFamily::classical) {
    require(!p, "classical statistics take no dimension");
    return;
  }
  require(p && *p >= 2, "directional statistics need p >= 2");
  require(n_ >= 2, "directional statistics need n >= 2");
  mean_chord_ = mean_chord(p_);
  for (auto k : kinds_) {
    int slot = -1;
    // Closed forms: P^CvM at p = 2 is twice Watson's U^2, at p = 3 an eighth of N.
    const bool closed = k == StatisticKind::NBak || (k == StatisticKind::PCvM && p_ <= 3);
    if (!closed) {
      slot = static_cast<int>(kernels_.size());
      kernels_.push_back(&ProjectedPairKernel::get(k, p_));
    }
    kernel_slot_.push_back(slot);
  }
  sums_.resize(1 + kernels_.size());
}

void NullSampler::draw(std::mt19937_64& rng, std::span<double> out) {
  if (family_of(kinds_.front()) == StreamFamily::classical) {
    sample_uniform_sorted(rng, n_, u_);
    for (std::size_t k = 0; k < kinds_.size(); ++k) out[k] = classical_value(kinds_[k], u_);
  } else if (p_ == 2) {
    draw_circle(rng, out);
  } else {
    draw_sphere(rng, out);
  }
}

void NullSampler::draw_circle(std::mt19937_64& rng, std::span<double> out) {
  sample_uniform_sorted(rng, n_, u_);
  const double n = static_cast<double>(n_);
  const bool need_pairs = !kernels_.empty();
  if (need_pairs) {
    for (std::size_t i = 0; i < n_; ++i) {
      cloud_.column(0)[i] = std::cos(kTwoPi * u_[i]);
      cloud_.column(1)[i] = std::sin(kTwoPi * u_[i]);
    }
    sum_pair_terms(cloud_, kernels_, sums_);
  }
  for (std::size_t k = 0; k < kinds_.size(); ++k) {
    switch (kinds_[k]) {
      case StatisticKind::PCvM:
        out[k] = 2.0 * classical_value(StatisticKind::U2, u_);
        break;
      case StatisticKind::NBak: {
        // sum_{i<j} 2 sin((t_j - t_i)/2) over sorted half-angles, via prefix sums.
        double sum_c = 0.0, sum_s = 0.0, chords = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
          const double h = std::numbers::pi * u_[j];
          const double s = std::sin(h), c = std::cos(h);
          chords += s * sum_c - c * sum_s;
          sum_c += c;
          sum_s += s;
        }
        out[k] = n * mean_chord_ - 4.0 * chords / n;
        break;
      }
      default: {
        const auto& kernel = *kernels_[static_cast<std::size_t>(kernel_slot_[k])];
        out[k] = kernel.diagonal() + 2.0 * sums_[1 + static_cast<std::size_t>(kernel_slot_[k])] / n;
      }
    }
  }
}

void NullSampler::draw_sphere(std::mt19937_64& rng, std::span<double> out) {
  std::normal_distribution<double> normal;
  double scratch[64];
  std::vector<double> big;
  double* buf = scratch;
  if (p_ > 64) {
    big.resize(static_cast<std::size_t>(p_));
    buf = big.data();
  }
  for (std::size_t i = 0; i < n_; ++i) draw_point(rng, normal, cloud_, i, buf);
  sum_pair_terms(cloud_, kernels_, sums_);
  const double n = static_cast<double>(n_);
  const double bakshaev = n * mean_chord_ - 2.0 * sums_[0] / n;
  for (std::size_t k = 0; k < kinds_.size(); ++k) {
    if (kinds_[k] == StatisticKind::NBak) {
      out[k] = bakshaev;
    } else if (kernel_slot_[k] < 0) {
      out[k] = bakshaev / 8.0;  // P^CvM at p = 3
    } else {
      const auto slot = static_cast<std::size_t>(kernel_slot_[k]);
      out[k] = kernels_[slot]->diagonal() + 2.0 * sums_[1 + slot] / n;
    }
  }
}

double sample_null(StatisticKind kind, std::size_t n, std::optional<int> p, std::mt19937_64& rng) {
  NullSampler sampler({kind}, n, p);
  double out = 0.0;
  sampler.draw(rng, {&out, 1});
  return out;
}

std::size_t upper_quantile_index(std::uint64_t M, std::size_t a, std::size_t A) {
  const std::uint64_t idx = (M * (A - a) + A - 1) / A;
  return static_cast<std::size_t>(std::max<std::uint64_t>(idx, 1));
}

QuantileTable::QuantileTable(StatisticKind kind, std::vector<int> n_list, std::vector<int> p_list, AlphaGrid grid,
                             std::uint64_t M, std::uint64_t seed)
    : kind_(kind), n_list_(std::move(n_list)), p_list_(std::move(p_list)), grid_(grid), M_(M), seed_(seed) {
  require(!n_list_.empty(), "quantile table needs at least one n");
  require(is_classical(kind_) ? p_list_.empty() : !p_list_.empty(),
          is_classical(kind_) ? "classical tables take no p list" : "directional tables need a p list");
  values_.assign(n_list_.size() * std::max<std::size_t>(p_list_.size(), 1) * (grid_.size() - 1), 0.0);
}

std::size_t QuantileTable::cell(int n, std::optional<int> p) const {
  const auto ni = std::find(n_list_.begin(), n_list_.end(), n);
  if (ni == n_list_.end()) throw TableMissError("quantile table has no n=" + std::to_string(n));
  std::size_t pi = 0;
  if (!p_list_.empty()) {
    if (!p) throw ConfigError("directional quantile table lookup needs p");
    const auto it = std::find(p_list_.begin(), p_list_.end(), *p);
    if (it == p_list_.end()) throw TableMissError("quantile table has no p=" + std::to_string(*p));
    pi = static_cast<std::size_t>(it - p_list_.begin());
  }
  const auto row = static_cast<std::size_t>(ni - n_list_.begin()) * std::max<std::size_t>(p_list_.size(), 1) + pi;
  return row * (grid_.size() - 1);
}

std::span<const double> QuantileTable::row(int n, std::optional<int> p) const {
  return {values_.data() + cell(n, p), grid_.size() - 1};
}

std::span<double> QuantileTable::row(int n, std::optional<int> p) {
  return {values_.data() + cell(n, p), grid_.size() - 1};
}

double QuantileTable::at(int n, std::optional<int> p, double alpha) const {
  const auto k = grid_.index_of(alpha);
  if (k < 0 || static_cast<std::size_t>(k) + 1 >= grid_.size()) {
    throw TableMissError("alpha=" + std::to_string(alpha) + " is not a quantile point of the grid");
  }
  return row(n, p)[static_cast<std::size_t>(k)];
}

void QuantileTable::check_monotone() const {
  const std::size_t width = grid_.size() - 1;
  for (std::size_t r = 0; r < values_.size(); r += width) {
    for (std::size_t k = 1; k < width; ++k) {
      if (values_[r + k] > values_[r + k - 1]) {
        throw DataError("quantiles increase in alpha at alpha=" + std::to_string(grid_[k]));
      }
    }
  }
}

void QuantileTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "kind,n,p,alpha,quantile\n";
  out.precision(17);
  const std::size_t P = std::max<std::size_t>(p_list_.size(), 1);
  for (std::size_t ni = 0; ni < n_list_.size(); ++ni) {
    for (std::size_t pi = 0; pi < P; ++pi) {
      const std::optional<int> p = p_list_.empty() ? std::nullopt : std::optional<int>(p_list_[pi]);
      const auto r = row(n_list_[ni], p);
      for (std::size_t k = 0; k < r.size(); ++k) {
        out << kind_name(kind_) << ',' << n_list_[ni] << ',';
        if (p) out << *p;
        out << ',' << csv::format_alpha(alpha_key(grid_[k])) << ',' << r[k] << '\n';
      }
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
  const nlohmann::json side{{"kind", kind_name(kind_)}, {"M", M_},         {"seed", seed_},
                            {"alpha_A", grid_.A()},     {"n_list", n_list_}, {"p_list", p_list_},
                            {"version", version_},      {"created", csv::now_iso8601()}};
  const auto side_path = csv::sidecar_path(path);
  std::ofstream js(side_path);
  if (!js) throw IoError("cannot write " + side_path.string());
  js << side.dump(2) << '\n';
}

QuantileTable QuantileTable::read(const std::filesystem::path& path) {
  const auto side_path = csv::sidecar_path(path);
  std::ifstream js(side_path);
  if (!js) throw IoError("missing sidecar " + side_path.string());
  nlohmann::json side;
  try {
    js >> side;
    QuantileTable t(parse_kind(side.at("kind").get<std::string>()), side.at("n_list").get<std::vector<int>>(),
                    side.at("p_list").get<std::vector<int>>(), AlphaGrid(side.at("alpha_A").get<std::size_t>()),
                    side.at("M").get<std::uint64_t>(), side.at("seed").get<std::uint64_t>());
    t.version_ = side.value("version", std::string(kVersion));
    const auto rows = csv::read_table(path, {"kind", "n", "p", "alpha", "quantile"});
    std::vector<char> seen(t.values_.size(), 0);
    for (const auto& row : rows.rows) {
      if (parse_kind(row.fields[0]) != t.kind_) throw ParseError("kind differs from the sidecar", row.line);
      const int n = static_cast<int>(csv::to_number(row.fields[1], row.line));
      std::optional<int> p;
      if (!row.fields[2].empty()) p = static_cast<int>(csv::to_number(row.fields[2], row.line));
      const auto k = t.grid_.index_of(csv::to_number(row.fields[3], row.line));
      if (k < 0 || static_cast<std::size_t>(k) + 1 >= t.grid_.size()) {
        throw ParseError("alpha not on the sidecar grid", row.line);
      }
      const auto idx = t.cell(n, p) + static_cast<std::size_t>(k);
      t.values_[idx] = csv::to_number(row.fields[4], row.line);
      seen[idx] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw DataError(path.string() + ": quantile table is incomplete");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(side_path.string() + ": " + e.what(), 0);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::vector<std::vector<double>> simulate_null(const std::vector<StatisticKind>& kinds, std::size_t n,
                                               std::optional<int> p, std::uint64_t M, std::uint64_t seed,
                                               unsigned workers) {
  require(!kinds.empty(), "no statistic requested");
  require(workers >= 1, "need at least one worker");
  const auto family = family_of(kinds.front());
  for (auto k : kinds) require(family_of(k) == family, "cannot mix classical and directional kinds");
  const std::size_t K = kinds.size();
  const std::uint64_t blocks = (M + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<double>> reps(K, std::vector<double>(M));
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    NullSampler sampler(kinds, n, p);
    std::vector<double> out(K);
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      auto rng = replicate_stream(seed, family, n, p.value_or(0), b);
      const std::uint64_t end = std::min<std::uint64_t>(M, (b + 1) * kBlockSize);
      for (std::uint64_t r = b * kBlockSize; r < end; ++r) {
        sampler.draw(rng, out);
        for (std::size_t k = 0; k < K; ++k) reps[k][r] = out[k];
      }
    }
  };
  // Construct kernels before fanning out so workers only read the cache.
  NullSampler warm(kinds, n, p);
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return reps;
}

double montecarlo_pvalue(const StatisticValue& T, std::uint64_t trials, std::uint64_t seed) {
  require(trials >= 1, "need at least one trial");
  require(is_classical(T.kind) || T.p.has_value(), "directional statistics need p");
  const auto reps = simulate_null({T.kind}, T.n, T.p, trials, seed);
  const auto hits = std::count_if(reps[0].begin(), reps[0].end(), [&](double t) { return t >= T.value; });
  return static_cast<double>(hits) / static_cast<double>(trials);
}

std::vector<QuantileTable> build_quantile_tables(const TableRequest& req) {
  require(!req.kinds.empty(), "no statistic requested");
  require(req.M >= 1000, "M must be at least 1000");
  require(req.workers >= 1, "need at least one worker");
  require(!req.n_list.empty(), "empty n list");
  const auto family = family_of(req.kinds.front());
  for (auto k : req.kinds) require(family_of(k) == family, "cannot mix classical and directional kinds");
  std::vector<std::optional<int>> dims;
  if (family == StreamFamily::classical) {
    require(req.p_list.empty(), "classical tables take no p list");
    dims.push_back(std::nullopt);
  } else {
    require(!req.p_list.empty(), "directional tables need a p list");
    for (int p : req.p_list) dims.emplace_back(p);
  }

  std::vector<QuantileTable> tables;
  for (auto k : req.kinds) {
    tables.emplace_back(k, req.n_list, family == StreamFamily::classical ? std::vector<int>{} : req.p_list, req.grid,
                        req.M, req.seed);
  }

  const std::size_t A = req.grid.size();
  const std::size_t total = req.n_list.size() * dims.size();
  std::size_t done = 0;
  for (int n : req.n_list) {
    require(n >= 1, "sample sizes must be positive");
    for (const auto& p : dims) {
      auto reps = simulate_null(req.kinds, static_cast<std::size_t>(n), p, req.M, req.seed, req.workers);
      for (std::size_t k = 0; k < req.kinds.size(); ++k) {
        auto& v = reps[k];
        std::sort(v.begin(), v.end());
        auto row = tables[k].row(n, p);
        for (std::size_t a = 1; a < A; ++a) row[a - 1] = v[upper_quantile_index(req.M, a, A) - 1];
      }
      if (req.progress) req.progress(++done, total);
    }
  }
  return tables;
}

QuantileTable build_quantile_table(StatisticKind kind, const std::vector<int>& n_list, const AlphaGrid& grid,
                                   std::uint64_t M, const std::vector<int>& p_list, std::uint64_t seed,
                                   unsigned workers) {
  TableRequest req;
  req.kinds = {kind};
  req.n_list = n_list;
  req.p_list = p_list;
  req.grid = grid;
  req.M = M;
  req.seed = seed;
  req.workers = workers;
  return std::move(build_quantile_tables(req).front());
}

CriticalTable build_projected_table(const std::vector<StatisticKind>& kinds, const std::vector<int>& dims,
                                    const AlphaGrid& grid, std::uint64_t M, std::uint64_t seed, unsigned workers) {
  for (auto k : kinds) require(is_directional(k), std::string(kind_name(k)) + " is not directional");
  TableRequest req;
  req.kinds = kinds;
  req.n_list = {kAsymptoticSampleSize};
  req.p_list = dims;
  req.grid = grid;
  req.M = M;
  req.seed = seed;
  req.workers = workers;
  const auto tables = build_quantile_tables(req);
  CriticalTable out({TableProvenance::mc_n500, M, seed, kAsymptoticSampleSize, csv::now_iso8601()});
  for (const auto& t : tables) {
    for (int p : dims) {
      const auto r = t.row(kAsymptoticSampleSize, p);
      for (std::size_t k = 0; k < r.size(); ++k) out.set(t.kind(), p, grid[k], r[k]);
    }
  }
  return out;
}

CriticalTable build_projected_table(StatisticKind kind, const std::vector<int>& dims, const AlphaGrid& grid,
                                    std::uint64_t M, std::uint64_t seed, unsigned workers) {
  return build_projected_table(std::vector<StatisticKind>{kind}, dims, grid, M, seed, workers);
}

RatioDataset ratio_dataset(const QuantileTable& table, const CriticalTable& asymptotic, double alpha_max) {
  RatioDataset out;
  out.kind = table.kind();
  out.M = table.M();
  const auto& grid = table.grid();
  const std::size_t count = std::min(grid.count_upto(alpha_max), grid.size() - 1);
  std::vector<std::optional<int>> dims;
  if (table.p_list().empty()) {
    dims.push_back(std::nullopt);
  } else {
    for (int p : table.p_list()) dims.emplace_back(p);
  }
  // Asymptotic numerators per (p, alpha), shared by every n. Directional
  // columns may cover only some alphas; rows exist where they do.
  std::map<int, std::vector<std::pair<std::size_t, double>>> numerators;
  for (const auto& p : dims) {
    auto& col = numerators[p.value_or(0)];
    for (std::size_t k = 0; k < count; ++k) {
      if (is_classical(table.kind())) {
        col.emplace_back(k, asymptotic.contains(table.kind(), std::nullopt, grid[k])
                                ? asymptotic.at(table.kind(), std::nullopt, grid[k])
                                : asymptotic_quantile(table.kind(), grid[k]));
      } else if (asymptotic.contains(table.kind(), p, grid[k])) {
        col.emplace_back(k, asymptotic.at(table.kind(), p, grid[k]));
      }
    }
    if (col.empty()) {
      throw TableMissError("no asymptotic quantiles for " + std::string(kind_name(table.kind())) +
                           (p ? ", p=" + std::to_string(*p) : std::string()) + " on the table's grid");
    }
  }
  for (int n : table.n_list()) {
    for (const auto& p : dims) {
      const auto r = table.row(n, p);
      for (const auto& [k, num] : numerators[p.value_or(0)]) {
        if (!(r[k] > 0.0) || !(num > 0.0)) {
          throw DataError("nonpositive quantile at n=" + std::to_string(n) + ", alpha=" + std::to_string(grid[k]));
        }
        out.rows.push_back({n, p, grid[k], num / r[k], r[k], num});
      }
    }
  }
  return out;
}

std::vector<double> quantile_densities(const QuantileTable& table, int n, std::optional<int> p) {
  const auto& grid = table.grid();
  const auto r = table.row(n, p);
  // Points (T_{n;alpha_k}, 1 - alpha_k) in increasing T; tied quantiles merge
  // into one point carrying the mean cdf level.
  std::vector<double> x, y;
  std::vector<int> count;
  for (std::size_t j = r.size(); j-- > 0;) {
    const double level = 1.0 - grid[j];
    if (!x.empty() && r[j] == x.back()) {
      y.back() += level;
      ++count.back();
    } else {
      x.push_back(r[j]);
      y.push_back(level);
      count.push_back(1);
    }
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= count[i];
  if (x.size() < 4) throw DataError("too few distinct quantiles for a density");
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x), std::move(y));
  std::vector<double> out(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) out[k] = spline.prime(r[k]);
  return out;
}

double density_at_quantile(const QuantileTable& table, int n, std::optional<int> p, double alpha) {
  const auto& grid = table.grid();
  const auto k = grid.index_of(alpha);
  if (k <= 0 || static_cast<std::size_t>(k) + 2 >= grid.size()) {
    throw DomainError("density needs alpha strictly inside the quantile grid");
  }
  return quantile_densities(table, n, p)[static_cast<std::size_t>(k)];
}

}  // namespace gof
