#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gofstab/simulation.hpp"
#include "gofstab/stabilizer.hpp"

namespace gof {

// Row weights for the ratio regression. AVar is the delta-method variance of Y.
//   w1 = 1{alpha <= 0.25}            w2 = n^{-1/2} 1{alpha <= 0.25}
//   w3 = AVar^{-1/2} 1{alpha <= 0.25} w4 = n^{-1/2} AVar^{-1/2} 1{alpha <= 0.25}
//   w5 = AVar^{-1/2}                 w6 = n^{-1/2} AVar^{-1/2}
//   w7 = (n alpha)^{-1/2}
enum class WeightScheme { w1 = 1, w2, w3, w4, w5, w6, w7 };

std::string_view weight_scheme_name(WeightScheme scheme) noexcept;
WeightScheme parse_weight_scheme(std::string_view text);
bool needs_avar(WeightScheme scheme) noexcept;

inline constexpr double kUpperTail = 0.25;

// n^{-n_half/2} alpha^{-alpha_half/2}.
struct Predictor {
  int n_half = 1;
  int alpha_half = 0;

  double operator()(double n, double alpha) const noexcept {
    return std::pow(n, -0.5 * n_half) * std::pow(alpha, -0.5 * alpha_half);
  }
  std::string name() const;
  auto operator<=>(const Predictor&) const = default;
};

// All n^{-l/2} alpha^{-m/2}, l = 1..lambda, m = 0..mu, ascending in (l, m).
std::vector<Predictor> predictor_scope(int lambda, int mu);

// Stephens' predictors 1/sqrt(n) and 1/n.
inline const std::vector<Predictor> kStephensStart{{1, 0}, {2, 0}};
// 1/n, 1/(n alpha), 1/(n sqrt(alpha)) in DimStabilizedForm::Predictor order.
inline constexpr std::array<Predictor, 3> kDimPredictors{{{2, 0}, {2, 2}, {2, 1}}};

struct RegressionSpec {
  int lambda = 2;
  int mu = 2;
  WeightScheme scheme = WeightScheme::w2;
  std::vector<Predictor> start = kStephensStart;
};

// T_inf^2 alpha (1 - alpha) / (M T_n^4 f_n(T_n)^2).
double avar_ratio(double T_inf_alpha, double T_n_alpha, double alpha, double M, double f_n);

// AVar[Y] for every row, with f_n from the table's monotone interpolant.
std::vector<double> row_avar(const RatioDataset& data, const QuantileTable& table);

// One weight per row. AVar-based schemes throw ConfigError without avar.
std::vector<double> compute_weights(WeightScheme scheme, const RatioDataset& data,
                                    std::span<const double> avar = {});

// Rows of one dimension (or the classical rows when p is empty).
RatioDataset subset(const RatioDataset& data, std::optional<int> p);

// Weighted least squares of y on X without intercept; rows with zero weight
// are ignored. BIC and the likelihood follow the Gaussian weighted-regression
// convention with N = number of positive weights:
//   logLik = (sum log w - N (log 2 pi + 1 - log N + log RSS_w)) / 2,
//   BIC = -2 logLik + log(N) (k + 1).
// R^2 is the uncentered mss / (mss + rss) of a no-intercept fit and
// R^2_adj = 1 - (1 - R^2) N / (N - k).
struct WlsFit {
  Eigen::VectorXd coeff;
  Eigen::VectorXd residuals;  // y - X coeff for every row
  double rss = 0.0;           // weighted
  double log_lik = 0.0;
  double bic = 0.0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  std::size_t n_eff = 0;
};

// Throws SingularFitError naming the collinear columns (names, when given).
WlsFit wls_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
               const std::vector<std::string>& names = {});

inline constexpr const char* kBicDefinition =
    "gaussian-weighted: -2 logLik + log(N)(k+1), N = positive weights";

// VIF_k = 1 / (1 - R^2_k), R^2_k from the weighted regression of predictor k
// on the others plus an intercept. Perfect collinearity gives infinity.
struct VifReport {
  std::vector<double> vif;
  double mvif = 0.0;
  std::size_t argmax = 0;
};
VifReport vif_diagnostics(const Eigen::MatrixXd& X, const Eigen::VectorXd& w);

struct ResidualBlock {
  std::string label;
  std::size_t count = 0;
  double sigma = 0.0;  // sample standard deviation of the residuals
};

struct FittedModel {
  StatisticKind kind = StatisticKind::D;
  std::optional<int> p;
  WeightScheme scheme = WeightScheme::w2;
  std::vector<Predictor> predictors;
  std::vector<double> coeff;
  double bic = 0.0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  std::size_t n_eff = 0;
  double sigma_upper = 0.0;  // residual sd over alpha <= 0.25
  std::vector<ResidualBlock> alpha_blocks;  // (0,.25], (.25,.5], (.5,.75], (.75,1)
  std::vector<ResidualBlock> n_blocks;      // [5,10), [10,100), [100,inf)
  std::vector<ResidualBlock> upper_n_blocks;  // n blocks restricted to alpha <= 0.25
  std::optional<double> mvif;
  std::optional<Predictor> mvif_predictor;
  std::string bic_definition = kBicDefinition;
  std::vector<std::string> history;  // selection and drop steps, in order

  double coefficient(const Predictor& pr) const;  // 0 when not selected
  // The (n, alpha) form g = 1 + sum coeff * predictor.
  StabilizedForm to_form(int n_min = 5, double alpha_max = kUpperTail) const;
  void print(std::ostream& os) const;
};

// WLS fit of Y - 1 on the given predictors plus every diagnostic.
FittedModel fit_model(const RatioDataset& data, std::span<const double> weights,
                      std::vector<Predictor> predictors, WeightScheme scheme = WeightScheme::w2);

// Forward-backward search from spec.start over predictor_scope(lambda, mu):
// each step takes the single add or drop with the lowest BIC, stopping when
// none improves. Ties go to the first candidate in (l, m) order.
FittedModel stepwise_bic(const RegressionSpec& spec, const RatioDataset& data,
                         std::span<const double> weights);

// Drops the predictor whose removal costs least adjusted R^2, refitting after
// each drop, while the model has more than three terms and the cost stays
// below max_loss.
FittedModel drop_to_three(const FittedModel& model, const RatioDataset& data,
                          std::span<const double> weights, double max_loss = 0.0015);

// table -> ratios -> weights -> stepwise BIC -> drop_to_three for a classical kind.
FittedModel refit_classical(const QuantileTable& table, const RegressionSpec& spec = {});

// Coefficients of 1/n, 1/(n alpha), 1/(n sqrt alpha) for one dimension.
FittedModel fit_dimension_model(const RatioDataset& data, int p, WeightScheme scheme = WeightScheme::w2,
                                std::span<const double> avar = {});

// q_r(p) = beta_1/sqrt(p) + beta_2/p per predictor, by least squares across p.
struct DimCurveFit {
  DimStabilizedForm form;
  std::array<std::array<double, 2>, 3> std_error{};
  // "saturated", or "t-test" when a negligible beta was dropped and the
  // remaining one refitted.
  std::array<std::string, 3> rule{};
};

struct DimCurveOptions {
  bool drop_negligible = false;
  double t_threshold = 2.0;  // |beta / se| below this counts as negligible
};

// per_p[p] holds the per-dimension coefficients in kDimPredictors order.
DimCurveFit fit_dimension_curves(StatisticKind kind, const std::map<int, std::array<double, 3>>& per_p,
                                 const DimCurveOptions& options = {});

struct QuantileRatioRow {
  int n = 0;
  std::optional<int> p;
  double alpha = 0.0;
  double ratio = 0.0;     // T_{n;alpha} / T_{n;alpha0}
  double Y = 0.0;         // T_{inf;alpha} / T_{n;alpha}
  double k_inf = 0.0;     // T_{inf;alpha} / T_{inf;alpha0}
};

struct QuantileRatioDiagnostics {
  StatisticKind kind = StatisticKind::D;
  double alpha0 = 0.05;
  std::vector<QuantileRatioRow> rows;

  void write_csv(std::ostream& os) const;
};

// Directional kinds read T_inf from `asymptotic`; classical kinds use the series.
QuantileRatioDiagnostics quantile_ratio_diagnostics(const QuantileTable& table, double alpha0,
                                                    const CriticalTable& asymptotic = {});

}  // namespace gof
