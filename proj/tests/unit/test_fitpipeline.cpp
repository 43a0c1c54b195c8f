#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gofstab/errors.hpp"
#include "gofstab/fitpipeline.hpp"

using namespace gof;

namespace {

const Predictor kInvRootN{1, 0};
const Predictor kInvN{2, 0};
const Predictor kInvNRootAlpha{2, 1};
const Predictor kInvNAlpha{2, 2};
const Predictor kInvRootNRootAlpha{1, 1};

std::vector<int> desk_sizes() {
  std::vector<int> n;
  for (int k = 5; k <= 50; ++k) n.push_back(k);
  n.push_back(100);
  n.push_back(200);
  return n;
}

// D and W2 on shared samples, N = {5..50, 100, 200}, M = 10^5.
const std::vector<QuantileTable>& desk_tables() {
  static const auto tables = [] {
    TableRequest req;
    req.kinds = {StatisticKind::D, StatisticKind::W2};
    req.n_list = desk_sizes();
    req.M = 100000;
    req.seed = 41;
    return build_quantile_tables(req);
  }();
  return tables;
}

const QuantileTable& desk(StatisticKind kind) {
  return desk_tables()[kind == StatisticKind::D ? 0 : 1];
}

// Y = 1 + sum c_k predictor_k (+ noise) over n = 5..60, alpha = 0.005..0.25.
RatioDataset synthetic(const std::vector<std::pair<Predictor, double>>& truth, double noise = 0.0,
                       std::uint64_t seed = 1) {
  RatioDataset d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  for (int n = 5; n <= 60; n += 5) {
    for (int a = 1; a <= 50; ++a) {
      const double alpha = a * 0.005;
      double y = 1.0;
      for (const auto& [pr, c] : truth) y += c * pr(n, alpha);
      if (noise > 0) y += eps(rng);
      d.rows.push_back({n, std::nullopt, alpha, y, 1.0, y});
    }
  }
  return d;
}

std::vector<double> unit_weights(const RatioDataset& d) { return std::vector<double>(d.rows.size(), 1.0); }

bool has(const FittedModel& m, const Predictor& p) {
  return std::find(m.predictors.begin(), m.predictors.end(), p) != m.predictors.end();
}

}  // namespace

TEST(Weights, HandValues) {
  RatioDataset d;
  d.rows = {{25, {}, 0.10, 1.0, 1.0, 1.0}, {25, {}, 0.30, 1.0, 1.0, 1.0}, {100, {}, 0.01, 1.0, 1.0, 1.0}};
  const auto w2 = compute_weights(WeightScheme::w2, d);
  EXPECT_DOUBLE_EQ(w2[0], 0.2);
  EXPECT_EQ(w2[1], 0.0);
  EXPECT_DOUBLE_EQ(compute_weights(WeightScheme::w7, d)[2], 1.0);
  for (double w : compute_weights(WeightScheme::w1, d)) EXPECT_TRUE(w == 0.0 || w == 1.0);
  EXPECT_THROW(compute_weights(WeightScheme::w3, d), ConfigError);
  const std::vector<double> avar{4.0, 4.0, 1.0};
  const auto w4 = compute_weights(WeightScheme::w4, d, avar);
  EXPECT_DOUBLE_EQ(w4[0], 0.1);
  EXPECT_EQ(w4[1], 0.0);
  EXPECT_DOUBLE_EQ(compute_weights(WeightScheme::w5, d, avar)[1], 0.5);
  EXPECT_EQ(parse_weight_scheme("w6"), WeightScheme::w6);
  EXPECT_THROW(parse_weight_scheme("w8"), ConfigError);
}

TEST(Weights, IndicatorSchemesVanishExactlyAboveUpperTail) {
  const auto d = ratio_dataset(desk(StatisticKind::W2), CriticalTable{}, 1.0);
  const auto avar = row_avar(d, desk(StatisticKind::W2));
  for (int k = 1; k <= 7; ++k) {
    const auto scheme = static_cast<WeightScheme>(k);
    const auto w = compute_weights(scheme, d, avar);
    const bool indicator = k <= 4;
    for (std::size_t i = 0; i < w.size(); ++i) {
      ASSERT_GE(w[i], 0.0);
      ASSERT_TRUE(std::isfinite(w[i]));
      if (indicator) ASSERT_EQ(w[i] == 0.0, d.rows[i].alpha > 0.25) << weight_scheme_name(scheme);
      if (!indicator) ASSERT_GT(w[i], 0.0);
    }
  }
}

TEST(AvarRatio, HandValueAndScaling) {
  EXPECT_NEAR(avar_ratio(1, 1, 0.05, 1e6, 2), 1.1875e-8, 1e-20);
  EXPECT_NEAR(avar_ratio(1.3, 1.1, 0.1, 4e5, 0.7) / avar_ratio(1.3, 1.1, 0.1, 1e5, 0.7), 0.25, 1e-15);
  for (double a : {0.1, 0.3, 0.49, 0.51, 0.9}) {
    EXPECT_LT(avar_ratio(1, 1, a, 1e5, 1), avar_ratio(1, 1, 0.5, 1e5, 1));
  }
  EXPECT_THROW(avar_ratio(1, 1, 0.05, 1e6, 0.0), DataError);
  EXPECT_THROW(avar_ratio(1, 1, 1.0, 1e6, 1.0), DomainError);
}

TEST(Wls, RecoversNoiselessCoefficients) {
  const auto d = synthetic({{kInvRootN, 0.2}, {kInvNRootAlpha, 0.05}});
  const auto m = fit_model(d, unit_weights(d), {kInvRootN, kInvNRootAlpha});
  EXPECT_NEAR(m.coefficient(kInvRootN), 0.2, 1e-10);
  EXPECT_NEAR(m.coefficient(kInvNRootAlpha), 0.05, 1e-10);
}

TEST(Wls, ZeroWeightRowsHaveNoInfluence) {
  auto d = synthetic({{kInvRootN, 0.2}, {kInvN, -0.3}}, 0.01, 5);
  auto w = unit_weights(d);
  for (std::size_t i = 0; i < w.size(); i += 3) w[i] = 0.0;
  const auto with = fit_model(d, w, {kInvRootN, kInvN});
  RatioDataset kept;
  std::vector<double> kept_w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0) {
      kept.rows.push_back(d.rows[i]);
      kept_w.push_back(w[i]);
    }
  }
  const auto without = fit_model(kept, kept_w, {kInvRootN, kInvN});
  EXPECT_NEAR(with.coeff[0], without.coeff[0], 1e-13);
  EXPECT_NEAR(with.coeff[1], without.coeff[1], 1e-13);
  EXPECT_DOUBLE_EQ(with.bic, without.bic);
}

TEST(Wls, ResidualsOrthogonalToPredictors) {
  const auto d = ratio_dataset(desk(StatisticKind::D), CriticalTable{}, 1.0);
  const auto w = compute_weights(WeightScheme::w2, d);
  const auto scope = predictor_scope(2, 2);
  Eigen::MatrixXd X(d.rows.size(), scope.size());
  Eigen::VectorXd y(d.rows.size()), wv(d.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    for (std::size_t k = 0; k < scope.size(); ++k) X(i, k) = scope[k](d.rows[i].n, d.rows[i].alpha);
    y(i) = d.rows[i].Y - 1.0;
    wv(i) = w[i];
  }
  const auto fit = wls_fit(X, y, wv);
  for (std::size_t k = 0; k < scope.size(); ++k) {
    EXPECT_NEAR((wv.array() * fit.residuals.array() * X.col(k).array()).sum(), 0.0, 1e-8) << scope[k].name();
  }
}

TEST(Wls, SingularDesignNamesThePredictors) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(4, 0, 1);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  try {
    wls_fit(X, y, w, {"first", "second"});
    FAIL() << "expected SingularFitError";
  } catch (const SingularFitError& e) {
    const std::string what = e.what();
    EXPECT_TRUE(what.find("first") != std::string::npos || what.find("second") != std::string::npos) << what;
  }
}

TEST(Wls, KolmogorovRefitNearPublishedForm) {
  const auto d = ratio_dataset(desk(StatisticKind::D), CriticalTable{}, 1.0);
  const auto w = compute_weights(WeightScheme::w2, d);
  const auto m = fit_model(d, w, {kInvRootN, kInvNRootAlpha, kInvRootNRootAlpha});
  const std::array<std::pair<Predictor, double>, 3> published{
      {{kInvRootN, 0.1575}, {kInvNRootAlpha, 0.0192}, {kInvRootNRootAlpha, -0.0051}}};
  for (const auto& [pr, c] : published) {
    const double got = m.coefficient(pr);
    EXPECT_GT(got * c, 0.0) << pr.name();
    EXPECT_NEAR(got, c, 0.5 * std::abs(c)) << pr.name();
  }
}

TEST(Stepwise, SelectsTheGeneratingTerm) {
  const auto d = synthetic({{kInvRootN, 0.3}}, 1e-4, 9);
  RegressionSpec spec;
  spec.scheme = WeightScheme::w1;
  const auto m = stepwise_bic(spec, d, unit_weights(d));
  ASSERT_EQ(m.predictors.size(), 1u);
  EXPECT_EQ(m.predictors[0], kInvRootN);
}

TEST(Stepwise, NeverWorseThanStartAndDeterministic) {
  const auto d = ratio_dataset(desk(StatisticKind::D), CriticalTable{}, 1.0);
  const auto w = compute_weights(WeightScheme::w2, d);
  const RegressionSpec spec;
  const auto start = fit_model(d, w, spec.start);
  const auto m = stepwise_bic(spec, d, w);
  EXPECT_LE(m.bic, start.bic);
  EXPECT_EQ(m.predictors, stepwise_bic(spec, d, w).predictors);
  // Single-term moves from the result do not improve BIC.
  for (const auto& p : predictor_scope(2, 2)) {
    auto other = m.predictors;
    const auto it = std::find(other.begin(), other.end(), p);
    if (it != other.end()) {
      other.erase(it);
    } else {
      other.push_back(p);
    }
    EXPECT_GE(fit_model(d, w, other).bic, m.bic) << p.name();
  }
  const int families = has(m, kInvRootN) + has(m, kInvNRootAlpha) + has(m, kInvRootNRootAlpha);
  EXPECT_GE(families, 2);
  EXPECT_THROW(stepwise_bic({2, 2, WeightScheme::w2, {{3, 0}}}, d, w), ConfigError);
}

TEST(DropToThree, KeepsThreeTermModels) {
  const auto d = synthetic({{kInvRootN, 0.2}, {kInvN, 0.1}, {kInvNAlpha, 0.01}}, 1e-4, 3);
  const auto w = unit_weights(d);
  const auto m = fit_model(d, w, {kInvRootN, kInvN, kInvNAlpha});
  const auto same = drop_to_three(m, d, w);
  EXPECT_EQ(same.predictors, m.predictors);
  EXPECT_EQ(same.coeff, m.coeff);
}

TEST(DropToThree, SaturatedFitReturnsTheTrueTerms) {
  const auto d = synthetic({{kInvRootN, 0.2}, {kInvNRootAlpha, 0.05}, {kInvRootNRootAlpha, -0.01}}, 1e-4, 4);
  const auto w = unit_weights(d);
  const auto saturated = fit_model(d, w, predictor_scope(2, 2));
  ASSERT_EQ(saturated.predictors.size(), 6u);
  const auto m = drop_to_three(saturated, d, w);
  EXPECT_EQ(m.predictors, (std::vector<Predictor>{kInvRootN, kInvRootNRootAlpha, kInvNRootAlpha}));
  EXPECT_GE(m.r2_adj, saturated.r2_adj - 0.0015 * 3);
}

TEST(DropToThree, GuardKeepsTermsWhenDropsAreCostly) {
  const auto d = synthetic({{kInvRootN, 0.2}, {kInvN, 0.4}, {kInvNRootAlpha, 0.05}, {kInvNAlpha, 0.02}}, 1e-4, 6);
  const auto w = unit_weights(d);
  const auto start = fit_model(d, w, {kInvRootN, kInvN, kInvNRootAlpha, kInvNAlpha});
  // Every term is real, so with a tight guard nothing may go.
  const auto m = drop_to_three(start, d, w, 1e-6);
  EXPECT_EQ(m.predictors.size(), 4u);
  EXPECT_EQ(drop_to_three(start, d, w).predictors.size(), 3u);
  EXPECT_FALSE(m.history.empty());
}

TEST(DropToThree, KolmogorovPipelineMatchesPublishedShape) {
  const auto m = refit_classical(desk(StatisticKind::D));
  ASSERT_EQ(m.predictors.size(), 3u);
  EXPECT_GT(m.coefficient(kInvRootN), 0.0);
  EXPECT_GT(m.coefficient(kInvNRootAlpha), 0.0);
  EXPECT_LT(m.coefficient(kInvRootNRootAlpha), 0.0);
  const auto form = m.to_form();
  EXPECT_EQ(form.kind, StatisticKind::D);
  EXPECT_EQ(form.terms.size(), 3u);
  const auto back = form_from_json(to_json(form));
  ASSERT_TRUE(back.n_alpha);
  EXPECT_EQ(back.n_alpha->terms.size(), 3u);
}

TEST(Vif, OrthogonalDuplicatedAndPublishedScale) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 1, 1, -1, -1, 1, -1, -1;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  const auto orth = vif_diagnostics(X, w);
  EXPECT_NEAR(orth.vif[0], 1.0, 1e-12);
  EXPECT_NEAR(orth.vif[1], 1.0, 1e-12);
  Eigen::MatrixXd dup(4, 2);
  dup << 1, 1, 2, 2, 3, 3, 5, 5;
  EXPECT_TRUE(std::isinf(vif_diagnostics(dup, w).mvif));

  const auto d = ratio_dataset(desk(StatisticKind::D), CriticalTable{}, 1.0);
  const auto saturated = fit_model(d, compute_weights(WeightScheme::w2, d), predictor_scope(2, 2));
  ASSERT_TRUE(saturated.mvif);
  EXPECT_GT(*saturated.mvif, std::pow(10.0, 1.5));
  EXPECT_LT(*saturated.mvif, std::pow(10.0, 2.5));
}

TEST(FittedModel, UpperTailWeightingBeatsVarianceWeightingInTheTail) {
  const auto& table = desk(StatisticKind::W2);
  const auto d = ratio_dataset(table, CriticalTable{}, 1.0);
  const auto avar = row_avar(d, table);
  const auto scope = predictor_scope(2, 2);
  const auto w2 = fit_model(d, compute_weights(WeightScheme::w2, d, avar), scope, WeightScheme::w2);
  const auto w5 = fit_model(d, compute_weights(WeightScheme::w5, d, avar), scope, WeightScheme::w5);
  EXPECT_LE(w2.sigma_upper, w5.sigma_upper);
  EXPECT_EQ(w2.alpha_blocks.size(), 4u);
  EXPECT_EQ(w2.n_blocks.size(), 3u);
  std::ostringstream os;
  w2.print(os);
  EXPECT_NE(os.str().find("MVIF"), std::string::npos);
}

TEST(DimensionCurves, RecoversNoiselessCurve) {
  std::map<int, std::array<double, 3>> per_p;
  for (int p : {2, 3, 5, 8, 11}) {
    const double q = 0.1 / std::sqrt(p) - 0.5 / p;
    per_p[p] = {q, 2 * q, -q};
  }
  const auto fit = fit_dimension_curves(StatisticKind::PCvM, per_p);
  EXPECT_NEAR(fit.form.beta[0][0], 0.1, 1e-8);
  EXPECT_NEAR(fit.form.beta[0][1], -0.5, 1e-8);
  EXPECT_NEAR(fit.form.beta[1][0], 0.2, 1e-8);
  EXPECT_NEAR(fit.form.beta[2][1], 0.5, 1e-8);
  EXPECT_EQ(fit.form.p_min, 2);
  EXPECT_EQ(fit.form.p_max, 11);
  EXPECT_EQ(fit.rule[0], "saturated");
  per_p.erase(5);
  per_p.erase(8);
  per_p.erase(11);
  EXPECT_THROW(fit_dimension_curves(StatisticKind::PCvM, per_p), DataError);
}

TEST(DimensionCurves, NegligibleTermDroppedAndSingleTermCurvesDecay) {
  std::map<int, std::array<double, 3>> per_p;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> eps(0.0, 1e-4);
  for (int p = 2; p <= 11; ++p) {
    per_p[p] = {0.11 / std::sqrt(p) - 0.54 / p + eps(rng), -0.003 / std::sqrt(p) + 1e-6 * eps(rng),
                0.14 / std::sqrt(p) + eps(rng)};
  }
  const auto fit = fit_dimension_curves(StatisticKind::PCvM, per_p, {true, 2.0});
  EXPECT_EQ(fit.rule[0], "saturated");
  EXPECT_EQ(fit.rule[2], "t-test");
  EXPECT_EQ(fit.form.beta[2][1], 0.0);
  EXPECT_NEAR(fit.form.beta[2][0], 0.14, 1e-3);
  for (auto r : {DimStabilizedForm::inv_n_alpha, DimStabilizedForm::inv_n_sqrt_alpha}) {
    for (int p = 2; p < 11; ++p) EXPECT_GT(std::abs(fit.form.q(r, p)), std::abs(fit.form.q(r, p + 1)));
  }
}

TEST(DimensionCurves, CircularCramerVonMisesRefit) {
  // P^CvM_{n,2} = 2 U^2_n, so its limit quantiles are exact: 2 U^2_{inf;alpha}.
  const AlphaGrid grid;
  std::vector<int> sizes;
  for (int n = 5; n <= 50; n += 5) sizes.push_back(n);
  sizes.push_back(100);
  const auto table = build_quantile_table(StatisticKind::PCvM, sizes, grid, 100000, {2}, 17);
  CriticalTable limit;
  for (std::size_t k = 0; k < grid.count_upto(0.25); ++k) {
    limit.set(StatisticKind::PCvM, 2, grid[k], 2.0 * asymptotic_quantile(StatisticKind::U2, grid[k]));
  }
  const auto d = ratio_dataset(table, limit);
  const auto m = fit_dimension_model(d, 2);
  EXPECT_EQ(m.p, 2);
  const double published = 0.1438 / std::sqrt(2.0);
  EXPECT_NEAR(m.coefficient(kInvNRootAlpha), published, 0.3 * published);
  EXPECT_LT(m.coefficient(kInvN), 0.0);
}

TEST(QuantileRatios, UnitAtReferenceAndNearLimit) {
  TableRequest req;
  req.kinds = {StatisticKind::D, StatisticKind::W2};
  req.n_list = {10, 500};
  req.M = 100000;
  req.seed = 8;
  const auto tables = build_quantile_tables(req);
  const auto dd = quantile_ratio_diagnostics(tables[0], 0.05);
  const auto dw = quantile_ratio_diagnostics(tables[1], 0.05);
  for (const auto& r : dw.rows) {
    ASSERT_GT(r.ratio, 0.0);
    ASSERT_GT(r.k_inf, 0.0);
    if (std::abs(r.alpha - 0.05) < 1e-12) EXPECT_EQ(r.ratio, 1.0);
    if (r.n == 500 && r.alpha >= 0.01 - 1e-12 && r.alpha <= 0.25 + 1e-12) {
      EXPECT_NEAR(r.ratio / r.k_inf, 1.0, 0.02) << r.alpha;
    }
  }
  // Spread in n of the ratios, max over alpha <= 0.25.
  const auto spread = [](const QuantileRatioDiagnostics& q) {
    std::map<long, std::pair<double, double>> by_alpha;
    for (const auto& r : q.rows) {
      if (r.alpha > 0.25 + 1e-12) continue;
      auto& e = by_alpha[std::lround(r.alpha * 1000)];
      (r.n == 10 ? e.first : e.second) = r.ratio;
    }
    double worst = 0.0;
    for (const auto& [a, e] : by_alpha) worst = std::max(worst, std::abs(e.first / e.second - 1.0));
    return worst;
  };
  EXPECT_LT(spread(dd), spread(dw));
  std::ostringstream os;
  dw.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "kind,n,p,alpha,alpha0,ratio,Y,k_inf");
  EXPECT_THROW(quantile_ratio_diagnostics(tables[0], 0.0005), ConfigError);
}
