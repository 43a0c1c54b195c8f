#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "gofstab/errors.hpp"
#include "gofstab/simulation.hpp"
#include "gofstab/stabilizer.hpp"

using namespace gof;

namespace {

// Standard error of an upper alpha-quantile estimated from M replicates.
double quantile_se(double alpha, double M, double density) {
  return std::sqrt(alpha * (1.0 - alpha) / M) / density;
}

// D and U2 at n = 500 from one shared set of 10^6 samples.
const std::vector<QuantileTable>& large_tables() {
  static const auto tables = [] {
    TableRequest req;
    req.kinds = {StatisticKind::D, StatisticKind::U2};
    req.n_list = {500};
    req.M = 1'000'000;
    req.seed = 20;
    return build_quantile_tables(req);
  }();
  return tables;
}

const QuantileTable& d_table() {
  static const auto t = build_quantile_table(StatisticKind::D, {25, 100}, AlphaGrid(), 100000, {}, 5);
  return t;
}

std::filesystem::path temp_csv(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST(Sampling, UniformsInsideUnitInterval) {
  auto rng = replicate_stream(1, StreamFamily::classical, 50, 0, 0);
  std::vector<double> u;
  for (int r = 0; r < 100; ++r) {
    sample_uniform_sorted(rng, 50, u);
    EXPECT_TRUE(std::is_sorted(u.begin(), u.end()));
    for (double v : u) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Sampling, SphericalRowsAreUnitNorm) {
  auto rng = replicate_stream(1, StreamFamily::spherical, 40, 7, 0);
  const auto x = sample_sphere(rng, 40, 7);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0;
    for (double v : x.row(i)) s += v * v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Sampling, StreamsAreKeyed) {
  auto a = replicate_stream(9, StreamFamily::classical, 10, 0, 3);
  auto b = replicate_stream(9, StreamFamily::classical, 10, 0, 3);
  auto c = replicate_stream(9, StreamFamily::classical, 10, 0, 4);
  auto d = replicate_stream(9, StreamFamily::spherical, 10, 0, 3);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Sampling, SampleNullIsDeterministic) {
  for (auto kind : {StatisticKind::D, StatisticKind::A2, StatisticKind::PAD}) {
    const std::optional<int> p = is_classical(kind) ? std::nullopt : std::optional<int>(3);
    auto r1 = replicate_stream(2, family_of(kind), 30, p.value_or(0), 0);
    auto r2 = replicate_stream(2, family_of(kind), 30, p.value_or(0), 0);
    EXPECT_EQ(sample_null(kind, 30, p, r1), sample_null(kind, 30, p, r2));
  }
}

// The sampler's closed forms and pair pass agree with the direct statistics on
// the same replicate.
TEST(Sampling, CircularSamplerMatchesDirectStatistics) {
  NullSampler sampler({StatisticKind::PCvM, StatisticKind::PAD, StatisticKind::NBak}, 40, 2);
  for (std::uint64_t b = 0; b < 5; ++b) {
    auto r1 = replicate_stream(3, StreamFamily::spherical, 40, 2, b);
    auto r2 = r1;
    double out[3];
    sampler.draw(r1, out);
    std::vector<double> u;
    sample_uniform_sorted(r2, 40, u);
    std::vector<double> angles;
    for (double v : u) angles.push_back(2.0 * std::numbers::pi * v);
    const auto x = SphericalSample::from_angles(angles);
    const auto pw = DirectionScheme::pairwise();
    EXPECT_NEAR(out[0], projected_statistic(StatisticKind::PCvM, x, pw).value, 1e-6);
    EXPECT_NEAR(out[1], projected_statistic(StatisticKind::PAD, x, pw).value, 1e-9);
    EXPECT_NEAR(out[2], bakshaev_statistic(x).value, 1e-9);
  }
}

TEST(Sampling, SphericalSamplerMatchesDirectStatistics) {
  for (int p : {3, 4}) {
    NullSampler sampler({StatisticKind::PCvM, StatisticKind::PAD, StatisticKind::NBak}, 40, p);
    auto r1 = replicate_stream(4, StreamFamily::spherical, 40, p, 0);
    auto r2 = r1;
    double out[3];
    sampler.draw(r1, out);
    const auto x = sample_sphere(r2, 40, p);
    const auto pw = DirectionScheme::pairwise();
    EXPECT_NEAR(out[0], projected_statistic(StatisticKind::PCvM, x, pw).value, 1e-9) << p;
    EXPECT_NEAR(out[1], projected_statistic(StatisticKind::PAD, x, pw).value, 1e-9) << p;
    EXPECT_NEAR(out[2], bakshaev_statistic(x).value, 1e-9) << p;
  }
}

TEST(QuantileIndex, CeilingOfUpperTail) {
  EXPECT_EQ(upper_quantile_index(1000, 50, 1000), 950u);
  EXPECT_EQ(upper_quantile_index(1000, 1, 1000), 999u);
  EXPECT_EQ(upper_quantile_index(1001, 1, 1000), 1000u);
  EXPECT_EQ(upper_quantile_index(100000, 250, 1000), 75000u);
  EXPECT_EQ(upper_quantile_index(7, 999, 1000), 1u);
}

TEST(QuantileTables, IndependentOfWorkerCount) {
  TableRequest req;
  req.kinds = {StatisticKind::W2, StatisticKind::V};
  req.n_list = {7, 12};
  req.M = 5000;
  req.seed = 99;
  req.workers = 1;
  const auto one = build_quantile_tables(req);
  req.workers = 3;
  const auto three = build_quantile_tables(req);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_TRUE(one[0] == three[0]);
  EXPECT_TRUE(one[1] == three[1]);

  TableRequest dir;
  dir.kinds = {StatisticKind::PAD};
  dir.n_list = {20};
  dir.p_list = {3};
  dir.M = 2100;
  dir.workers = 1;
  const auto a = build_quantile_tables(dir);
  dir.workers = 2;
  EXPECT_TRUE(a[0] == build_quantile_tables(dir)[0]);
}

TEST(QuantileTables, SharedSamplesGiveTheSameTable) {
  const auto alone = build_quantile_table(StatisticKind::V, {9}, AlphaGrid(), 3000, {}, 4);
  TableRequest req;
  req.kinds = {StatisticKind::D, StatisticKind::V};
  req.n_list = {9};
  req.M = 3000;
  req.seed = 4;
  EXPECT_TRUE(build_quantile_tables(req)[1] == alone);
}

TEST(QuantileTables, MonotoneInAlpha) {
  d_table().check_monotone();
  EXPECT_GE(d_table().at(25, std::nullopt, 0.01), d_table().at(25, std::nullopt, 0.25));
  for (const auto& t : large_tables()) t.check_monotone();
}

TEST(QuantileTables, KolmogorovMatchesInverseStabilization) {
  const double alpha = 0.05;
  const double q = d_table().at(100, std::nullopt, alpha);
  const double se = quantile_se(alpha, 1e5, density_at_quantile(d_table(), 100, std::nullopt, alpha));
  EXPECT_NEAR(q, 1.3581 / eval_g(builtin_form(StatisticKind::D), 100, alpha), 3 * se);
}

TEST(QuantileTables, WatsonNearAsymptoticAtN500) {
  EXPECT_NEAR(large_tables()[1].at(500, std::nullopt, 0.05), 0.1869, 0.002);
}

TEST(QuantileTables, DoublingMIsStable) {
  int cells = 0;
  for (auto kind : kClassicalKinds) {
    const auto small = build_quantile_table(kind, {5, 10, 20, 50}, AlphaGrid(), 10000, {}, 8);
    const auto big = build_quantile_table(kind, {5, 10, 20, 50}, AlphaGrid(), 20000, {}, 8);
    for (int n : {5, 10, 20, 50}) {
      const double se = quantile_se(0.10, 1e4, density_at_quantile(big, n, std::nullopt, 0.10));
      EXPECT_LT(std::abs(small.at(n, std::nullopt, 0.10) - big.at(n, std::nullopt, 0.10)), 5 * se)
          << kind_name(kind) << " n=" << n;
      ++cells;
    }
  }
  EXPECT_EQ(cells, 20);
}

TEST(QuantileTables, CsvRoundTrip) {
  const auto path = temp_csv("gofstab_quantiles.csv");
  const auto t = build_quantile_table(StatisticKind::A2, {5, 8}, AlphaGrid(100), 2000, {}, 6);
  t.write(path);
  const auto back = QuantileTable::read(path);
  EXPECT_TRUE(back == t);
  EXPECT_EQ(back.version(), QuantileTable::kVersion);

  std::ofstream(path) << "kind,n,p,alpha,quantile\nA2,5,,0.01,3.5\n";
  EXPECT_THROW(QuantileTable::read(path), DataError);
  std::filesystem::remove(std::filesystem::path(path).replace_extension(".json"));
  EXPECT_THROW(QuantileTable::read(path), IoError);
  std::filesystem::remove(path);
}

TEST(QuantileTables, Validation) {
  EXPECT_THROW(build_quantile_table(StatisticKind::D, {10}, AlphaGrid(), 999), ConfigError);
  EXPECT_THROW(build_quantile_table(StatisticKind::PAD, {10}, AlphaGrid(), 1000), ConfigError);
  EXPECT_THROW(build_quantile_table(StatisticKind::D, {10}, AlphaGrid(), 1000, {3}), ConfigError);
  TableRequest mixed;
  mixed.kinds = {StatisticKind::D, StatisticKind::PAD};
  mixed.n_list = {10};
  mixed.p_list = {3};
  EXPECT_THROW(build_quantile_tables(mixed), ConfigError);
  EXPECT_THROW(d_table().at(30, std::nullopt, 0.05), TableMissError);
}

TEST(ProjectedTables, SharedBuildKeepsClosedFormRelation) {
  const auto t = build_projected_table({StatisticKind::PCvM, StatisticKind::NBak}, {3}, AlphaGrid(100), 1000, 2);
  EXPECT_EQ(t.meta().provenance, TableProvenance::mc_n500);
  EXPECT_EQ(t.meta().n_asymptotic, 500);
  for (double alpha : {0.01, 0.05, 0.5}) {
    EXPECT_NEAR(t.at(StatisticKind::PCvM, 3, alpha), t.at(StatisticKind::NBak, 3, alpha) / 8.0, 1e-12);
  }
  t.check_monotone();
}

TEST(RatioDataset, RowsAndSanityBands) {
  const auto ds = ratio_dataset(d_table(), CriticalTable());
  EXPECT_EQ(ds.rows.size(), 2u * 250u);
  for (const auto& row : ds.rows) {
    EXPECT_GT(row.Y, 0.0);
    EXPECT_DOUBLE_EQ(row.Y, row.T_inf_alpha / row.T_n_alpha);
  }
  // D at n = 25, alpha = 0.04 against the embedded form.
  const double q = d_table().at(25, std::nullopt, 0.04);
  const double se_rel = quantile_se(0.04, 1e5, density_at_quantile(d_table(), 25, std::nullopt, 0.04)) / q;
  const auto row = *std::find_if(ds.rows.begin(), ds.rows.end(),
                                 [](const RatioRow& r) { return r.n == 25 && std::abs(r.alpha - 0.04) < 1e-12; });
  EXPECT_NEAR(row.Y, 1.03024, 3 * se_rel * row.Y);

  for (const auto& t : large_tables()) {
    const auto big = ratio_dataset(t, CriticalTable());
    double mean = 0;
    int count = 0;
    for (const auto& r : big.rows) {
      if (r.alpha < 0.01 - 1e-12) continue;
      EXPECT_GE(r.Y, 0.97) << kind_name(t.kind()) << " alpha=" << r.alpha;
      EXPECT_LE(r.Y, 1.03) << kind_name(t.kind()) << " alpha=" << r.alpha;
      mean += r.Y;
      ++count;
    }
    mean /= count;
    EXPECT_GE(mean, 0.99) << kind_name(t.kind());
    EXPECT_LE(mean, 1.01) << kind_name(t.kind());
  }
}

TEST(RatioDataset, DirectionalNeedsAsymptoticColumn) {
  const auto t = build_quantile_table(StatisticKind::NBak, {10}, AlphaGrid(100), 1000, {3}, 1);
  EXPECT_THROW(ratio_dataset(t, CriticalTable()), TableMissError);
}

TEST(Density, PositiveForCramerVonMises) {
  const auto t = build_quantile_table(StatisticKind::W2, {50}, AlphaGrid(), 100000, {}, 12);
  double integral = 0, prev_x = 0, prev_f = 0;
  for (std::size_t k = t.grid().size() - 3; k >= 1; --k) {
    const double alpha = t.grid()[k];
    const double f = density_at_quantile(t, 50, std::nullopt, alpha);
    EXPECT_GT(f, 0.0) << alpha;
    const double x = t.at(50, std::nullopt, alpha);
    if (k != t.grid().size() - 3) integral += 0.5 * (f + prev_f) * (x - prev_x);
    prev_x = x;
    prev_f = f;
  }
  EXPECT_NEAR(integral, t.grid()[t.grid().size() - 3] - t.grid()[1], 0.01);
  EXPECT_THROW(density_at_quantile(t, 50, std::nullopt, 0.001), DomainError);
  EXPECT_THROW(density_at_quantile(t, 50, std::nullopt, 0.999), DomainError);
}

TEST(Density, KolmogorovAtN500MatchesLimit) {
  const double x = 1.3581, h = 1e-4;
  const double limit = (asymptotic_sf(StatisticKind::D, x - h) - asymptotic_sf(StatisticKind::D, x + h)) / (2 * h);
  const double f = density_at_quantile(large_tables()[0], 500, std::nullopt, 0.05);
  EXPECT_NEAR(f, limit, 0.10 * limit);
}
