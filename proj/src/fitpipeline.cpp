#include "gofstab/fitpipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gofstab/errors.hpp"

namespace gof {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string half_power(const char* base, int half) {
  if (half == 0) return "";
  if (half == 1) return std::string("sqrt(") + base + ")";
  if (half == 2) return base;
  if (half % 2 == 0) return std::string(base) + "^" + std::to_string(half / 2);
  return std::string(base) + "^" + std::to_string(half) + "/2";
}

Eigen::MatrixXd design(const RatioDataset& data, const std::vector<Predictor>& predictors) {
  Eigen::MatrixXd X(data.rows.size(), predictors.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    for (std::size_t k = 0; k < predictors.size(); ++k) X(i, k) = predictors[k](r.n, r.alpha);
  }
  return X;
}

Eigen::VectorXd response(const RatioDataset& data) {
  Eigen::VectorXd y(data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) y(i) = data.rows[i].Y - 1.0;
  return y;
}

Eigen::VectorXd to_vector(std::span<const double> w, std::size_t rows) {
  if (w.size() != rows) throw ConfigError("one weight per dataset row required");
  Eigen::VectorXd out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw DataError("weights must be finite and nonnegative");
    out(i) = w[i];
  }
  return out;
}

std::vector<std::string> names_of(const std::vector<Predictor>& predictors) {
  std::vector<std::string> out;
  for (const auto& p : predictors) out.push_back(p.name());
  return out;
}

struct Problem {
  const RatioDataset& data;
  Eigen::VectorXd y;
  Eigen::VectorXd w;

  Problem(const RatioDataset& d, std::span<const double> weights)
      : data(d), y(response(d)), w(to_vector(weights, d.rows.size())) {}

  WlsFit fit(const std::vector<Predictor>& predictors) const {
    return wls_fit(design(data, predictors), y, w, names_of(predictors));
  }
};

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

template <class Pred>
ResidualBlock block(const RatioDataset& data, const Eigen::VectorXd& res, std::string label, Pred in) {
  std::vector<double> v;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    if (in(data.rows[i])) v.push_back(res(i));
  }
  return {std::move(label), v.size(), sample_sd(v)};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Least squares fit of y on the columns of X (no weights); returns beta and
// standard errors, the latter NaN without residual degrees of freedom.
std::pair<Eigen::VectorXd, Eigen::VectorXd> ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw SingularFitError("dimension-curve design is singular");
  const Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd se = Eigen::VectorXd::Constant(X.cols(), kNaN);
  const auto dof = X.rows() - X.cols();
  if (dof > 0) {
    const double s2 = (y - X * beta).squaredNorm() / static_cast<double>(dof);
    const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * s2;
    for (Eigen::Index k = 0; k < X.cols(); ++k) se(k) = std::sqrt(cov(k, k));
  }
  return {beta, se};
}

}  // namespace

std::string_view weight_scheme_name(WeightScheme scheme) noexcept {
  static constexpr std::array<std::string_view, 7> names{"w1", "w2", "w3", "w4", "w5", "w6", "w7"};
  return names[static_cast<int>(scheme) - 1];
}

WeightScheme parse_weight_scheme(std::string_view text) {
  if (text.size() == 2 && (text[0] == 'w' || text[0] == 'W') && text[1] >= '1' && text[1] <= '7') {
    return static_cast<WeightScheme>(text[1] - '0');
  }
  throw ConfigError("unknown weight scheme '" + std::string(text) + "' (w1..w7)");
}

bool needs_avar(WeightScheme scheme) noexcept {
  const int k = static_cast<int>(scheme);
  return k >= 3 && k <= 6;
}

std::string Predictor::name() const {
  const auto n = half_power("n", n_half);
  const auto a = half_power("alpha", alpha_half);
  const auto den = a.empty() ? n : n + "*" + a;
  return "1/" + ((n_half > 0 && alpha_half > 0) || n_half > 2 ? "(" + den + ")" : den);
}

std::vector<Predictor> predictor_scope(int lambda, int mu) {
  if (lambda < 1 || mu < 0) throw ConfigError("predictor scope needs lambda >= 1 and mu >= 0");
  std::vector<Predictor> out;
  for (int l = 1; l <= lambda; ++l) {
    for (int m = 0; m <= mu; ++m) out.push_back({l, m});
  }
  return out;
}

double avar_ratio(double T_inf_alpha, double T_n_alpha, double alpha, double M, double f_n) {
  if (!(T_inf_alpha > 0.0) || !(T_n_alpha > 0.0) || !(M > 0.0)) {
    throw DomainError("avar_ratio needs positive quantiles and M");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("avar_ratio needs 0 < alpha < 1");
  if (!(f_n > 0.0) || !std::isfinite(f_n)) throw DataError("singular density at the quantile");
  const double t2 = T_n_alpha * T_n_alpha;
  return T_inf_alpha * T_inf_alpha * alpha * (1.0 - alpha) / (M * t2 * t2 * f_n * f_n);
}

std::vector<double> row_avar(const RatioDataset& data, const QuantileTable& table) {
  std::map<std::pair<int, int>, std::vector<double>> densities;
  std::vector<double> out;
  out.reserve(data.rows.size());
  for (const auto& r : data.rows) {
    const std::pair key{r.n, r.p.value_or(0)};
    auto it = densities.find(key);
    if (it == densities.end()) it = densities.emplace(key, quantile_densities(table, r.n, r.p)).first;
    const auto k = table.grid().index_of(r.alpha);
    if (k < 0 || static_cast<std::size_t>(k) >= it->second.size()) {
      throw DataError("ratio row alpha is not a quantile point of the table");
    }
    out.push_back(avar_ratio(r.T_inf_alpha, r.T_n_alpha, r.alpha, static_cast<double>(table.M()),
                             it->second[static_cast<std::size_t>(k)]));
  }
  return out;
}

std::vector<double> compute_weights(WeightScheme scheme, const RatioDataset& data, std::span<const double> avar) {
  if (needs_avar(scheme) && avar.size() != data.rows.size()) {
    throw ConfigError(std::string(weight_scheme_name(scheme)) + " needs the quantile densities (AVar per row)");
  }
  std::vector<double> w(data.rows.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& r = data.rows[i];
    const double tail = r.alpha <= kUpperTail + 1e-12 ? 1.0 : 0.0;
    const double root_n = 1.0 / std::sqrt(static_cast<double>(r.n));
    const double inv_sd = needs_avar(scheme) ? 1.0 / std::sqrt(avar[i]) : 0.0;
    switch (scheme) {
      case WeightScheme::w1: w[i] = tail; break;
      case WeightScheme::w2: w[i] = root_n * tail; break;
      case WeightScheme::w3: w[i] = inv_sd * tail; break;
      case WeightScheme::w4: w[i] = root_n * inv_sd * tail; break;
      case WeightScheme::w5: w[i] = inv_sd; break;
      case WeightScheme::w6: w[i] = root_n * inv_sd; break;
      case WeightScheme::w7: w[i] = 1.0 / std::sqrt(static_cast<double>(r.n) * r.alpha); break;
    }
  }
  return w;
}

RatioDataset subset(const RatioDataset& data, std::optional<int> p) {
  RatioDataset out{data.kind, data.M, {}};
  for (const auto& r : data.rows) {
    if (r.p == p) out.rows.push_back(r);
  }
  return out;
}

WlsFit wls_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
               const std::vector<std::string>& names) {
  const auto rows = X.rows();
  const auto k = X.cols();
  if (y.size() != rows || w.size() != rows) throw ConfigError("wls_fit: dimension mismatch");
  std::vector<Eigen::Index> used;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (w(i) > 0.0) used.push_back(i);
  }
  const auto N = static_cast<Eigen::Index>(used.size());
  if (N < k || N == 0) throw SingularFitError("fewer positive-weight rows than predictors");
  Eigen::MatrixXd Xw(N, k);
  Eigen::VectorXd yw(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const double s = std::sqrt(w(used[j]));
    Xw.row(j) = s * X.row(used[j]);
    yw(j) = s * y(used[j]);
  }
  WlsFit fit;
  fit.coeff = Eigen::VectorXd::Zero(k);
  if (k > 0) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
    if (qr.rank() < k) {
      std::string which;
      for (Eigen::Index c = qr.rank(); c < k; ++c) {
        const auto col = qr.colsPermutation().indices()(c);
        if (!which.empty()) which += ", ";
        which += static_cast<std::size_t>(col) < names.size() ? names[col] : "column " + std::to_string(col);
      }
      throw SingularFitError("rank-deficient weighted design; collinear predictors: " + which);
    }
    fit.coeff = qr.solve(yw);
  }
  fit.residuals = y - X * fit.coeff;
  double mss = 0.0, sum_log_w = 0.0;
  for (auto i : used) {
    const double f = y(i) - fit.residuals(i);
    fit.rss += w(i) * fit.residuals(i) * fit.residuals(i);
    mss += w(i) * f * f;
    sum_log_w += std::log(w(i));
  }
  const double n = static_cast<double>(N);
  fit.n_eff = used.size();
  fit.log_lik = 0.5 * (sum_log_w - n * (std::log(2.0 * std::numbers::pi) + 1.0 - std::log(n) + std::log(fit.rss)));
  fit.bic = -2.0 * fit.log_lik + std::log(n) * static_cast<double>(k + 1);
  fit.r2 = mss + fit.rss > 0.0 ? mss / (mss + fit.rss) : kNaN;
  fit.r2_adj = N > k ? 1.0 - (1.0 - fit.r2) * n / static_cast<double>(N - k) : kNaN;
  return fit;
}

VifReport vif_diagnostics(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
  const auto k = X.cols();
  if (k < 2) throw ConfigError("VIF needs at least two predictors");
  if (w.size() != X.rows()) throw ConfigError("vif_diagnostics: dimension mismatch");
  std::vector<Eigen::Index> used;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (w(i) > 0.0) used.push_back(i);
  }
  const auto N = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd Xw(N, k);
  Eigen::VectorXd s(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    s(j) = std::sqrt(w(used[j]));
    Xw.row(j) = s(j) * X.row(used[j]);
  }
  VifReport out;
  for (Eigen::Index c = 0; c < k; ++c) {
    // Others plus the (weighted) intercept column.
    Eigen::MatrixXd Z(N, k);
    Z.col(0) = s;
    for (Eigen::Index o = 0, z = 1; o < k; ++o) {
      if (o != c) Z.col(z++) = Xw.col(o);
    }
    const Eigen::VectorXd target = Xw.col(c);
    const double mean = target.dot(s) / s.squaredNorm();
    const double tss = (target - mean * s).squaredNorm();
    const Eigen::VectorXd resid = target - Z * Z.colPivHouseholderQr().solve(target);
    const double rss = resid.squaredNorm();
    const double v = (tss <= 0.0 || rss <= 1e-12 * tss) ? kInf : tss / rss;
    out.vif.push_back(v);
  }
  const auto it = std::max_element(out.vif.begin(), out.vif.end());
  out.mvif = *it;
  out.argmax = static_cast<std::size_t>(it - out.vif.begin());
  return out;
}

double FittedModel::coefficient(const Predictor& pr) const {
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    if (predictors[k] == pr) return coeff[k];
  }
  return 0.0;
}

StabilizedForm FittedModel::to_form(int n_min, double alpha_max) const {
  StabilizedForm form;
  form.kind = kind;
  form.n_min = n_min;
  form.alpha_max = alpha_max;
  form.name = std::string(kind_name(kind)) + "_refit_" + std::string(weight_scheme_name(scheme));
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    form.terms.push_back({predictors[k].n_half, predictors[k].alpha_half, coeff[k]});
  }
  return form;
}

void FittedModel::print(std::ostream& os) const {
  os << "kind " << kind_name(kind);
  if (p) os << " p=" << *p;
  os << ", weights " << weight_scheme_name(scheme) << ", N=" << n_eff << '\n';
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    os << "  " << predictors[k].name() << "  " << fmt(coeff[k]) << '\n';
  }
  os << "BIC " << fmt(bic) << "  R2_adj " << fmt(r2_adj) << "  sigma(alpha<=0.25) " << fmt(sigma_upper) << '\n';
  if (mvif) os << "MVIF " << fmt(*mvif) << " (" << mvif_predictor->name() << ")\n";
  const auto blocks = [&os](const char* title, const std::vector<ResidualBlock>& bs) {
    os << title;
    for (const auto& b : bs) os << "  " << b.label << ": " << fmt(b.sigma) << " [" << b.count << ']';
    os << '\n';
  };
  blocks("sigma by alpha:", alpha_blocks);
  blocks("sigma by n:", n_blocks);
  blocks("sigma by n, alpha<=0.25:", upper_n_blocks);
  for (const auto& h : history) os << "  step: " << h << '\n';
}

FittedModel fit_model(const RatioDataset& data, std::span<const double> weights, std::vector<Predictor> predictors,
                      WeightScheme scheme) {
  std::sort(predictors.begin(), predictors.end());
  predictors.erase(std::unique(predictors.begin(), predictors.end()), predictors.end());
  const Problem problem(data, weights);
  const auto X = design(data, predictors);
  const auto fit = wls_fit(X, problem.y, problem.w, names_of(predictors));

  FittedModel m;
  m.kind = data.kind;
  if (!data.rows.empty()) m.p = data.rows.front().p;
  m.scheme = scheme;
  m.predictors = predictors;
  m.coeff.assign(fit.coeff.data(), fit.coeff.data() + fit.coeff.size());
  m.bic = fit.bic;
  m.r2 = fit.r2;
  m.r2_adj = fit.r2_adj;
  m.n_eff = fit.n_eff;

  const auto& res = fit.residuals;
  const auto upper = [](const RatioRow& r) { return r.alpha <= kUpperTail + 1e-12; };
  m.sigma_upper = block(data, res, "", upper).sigma;
  const std::array<double, 5> a_edges{0.0, 0.25, 0.5, 0.75, 1.0};
  static const std::array<const char*, 4> a_labels{"(0,0.25]", "(0.25,0.5]", "(0.5,0.75]", "(0.75,1)"};
  for (int b = 0; b < 4; ++b) {
    m.alpha_blocks.push_back(block(data, res, a_labels[b], [&](const RatioRow& r) {
      return r.alpha > a_edges[b] + 1e-12 && r.alpha <= a_edges[b + 1] + 1e-12;
    }));
  }
  const std::array<int, 4> n_edges{0, 10, 100, std::numeric_limits<int>::max()};
  static const std::array<const char*, 3> n_labels{"n<10", "10<=n<100", "n>=100"};
  for (int b = 0; b < 3; ++b) {
    const auto in_n = [&](const RatioRow& r) { return r.n >= n_edges[b] && r.n < n_edges[b + 1]; };
    m.n_blocks.push_back(block(data, res, n_labels[b], in_n));
    m.upper_n_blocks.push_back(
        block(data, res, n_labels[b], [&](const RatioRow& r) { return in_n(r) && upper(r); }));
  }
  if (predictors.size() >= 2) {
    const auto vif = vif_diagnostics(X, problem.w);
    m.mvif = vif.mvif;
    m.mvif_predictor = predictors[vif.argmax];
  }
  return m;
}

FittedModel stepwise_bic(const RegressionSpec& spec, const RatioDataset& data, std::span<const double> weights) {
  const auto scope = predictor_scope(spec.lambda, spec.mu);
  std::vector<Predictor> current;
  for (const auto& p : spec.start) {
    if (std::find(scope.begin(), scope.end(), p) == scope.end()) {
      throw ConfigError("start predictor " + p.name() + " is outside the scope");
    }
    current.push_back(p);
  }
  std::sort(current.begin(), current.end());
  current.erase(std::unique(current.begin(), current.end()), current.end());

  const Problem problem(data, weights);
  double current_bic = problem.fit(current).bic;
  std::vector<std::string> history;
  history.push_back("start BIC " + fmt(current_bic));
  for (std::size_t iter = 0; iter < 4 * scope.size() + 8; ++iter) {
    std::optional<std::vector<Predictor>> best;
    double best_bic = current_bic;
    std::string move;
    for (const auto& p : scope) {
      auto candidate = current;
      const auto it = std::find(candidate.begin(), candidate.end(), p);
      const bool drop = it != candidate.end();
      if (drop) {
        candidate.erase(it);
      } else {
        candidate.insert(std::upper_bound(candidate.begin(), candidate.end(), p), p);
      }
      double bic;
      try {
        bic = problem.fit(candidate).bic;
      } catch (const SingularFitError&) {
        continue;
      }
      if (bic < best_bic) {
        best_bic = bic;
        best = std::move(candidate);
        move = (drop ? "- " : "+ ") + p.name();
      }
    }
    if (!best) break;
    current = std::move(*best);
    current_bic = best_bic;
    history.push_back(move + ", BIC " + fmt(current_bic));
  }
  auto model = fit_model(data, weights, current, spec.scheme);
  model.history = std::move(history);
  return model;
}

FittedModel drop_to_three(const FittedModel& model, const RatioDataset& data, std::span<const double> weights,
                          double max_loss) {
  if (model.predictors.size() <= 3) return model;
  const Problem problem(data, weights);
  auto current = model.predictors;
  double current_r2 = problem.fit(current).r2_adj;
  std::vector<std::string> history = model.history;
  while (current.size() > 3) {
    std::size_t best = current.size();
    double best_r2 = -kInf;
    for (std::size_t k = 0; k < current.size(); ++k) {
      auto candidate = current;
      candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(k));
      const double r2 = problem.fit(candidate).r2_adj;
      if (r2 > best_r2) {
        best_r2 = r2;
        best = k;
      }
    }
    const double loss = current_r2 - best_r2;
    if (!(loss < max_loss)) {
      history.push_back("keep " + std::to_string(current.size()) + " terms: dropping " + current[best].name() +
                        " would cost " + fmt(loss) + " of R2_adj");
      break;
    }
    history.push_back("drop " + current[best].name() + ", R2_adj " + fmt(best_r2));
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(best));
    current_r2 = best_r2;
  }
  auto out = fit_model(data, weights, current, model.scheme);
  out.history = std::move(history);
  return out;
}

FittedModel refit_classical(const QuantileTable& table, const RegressionSpec& spec) {
  if (!is_classical(table.kind())) throw ConfigError("refit_classical needs a classical table");
  const auto data = ratio_dataset(table, CriticalTable{}, 1.0);
  const auto avar = needs_avar(spec.scheme) ? row_avar(data, table) : std::vector<double>{};
  const auto w = compute_weights(spec.scheme, data, avar);
  return drop_to_three(stepwise_bic(spec, data, w), data, w);
}

FittedModel fit_dimension_model(const RatioDataset& data, int p, WeightScheme scheme, std::span<const double> avar) {
  RatioDataset sub{data.kind, data.M, {}};
  std::vector<double> sub_avar;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    if (data.rows[i].p != p) continue;
    sub.rows.push_back(data.rows[i]);
    if (!avar.empty()) sub_avar.push_back(avar[i]);
  }
  if (sub.rows.empty()) throw DataError("no ratio rows for p=" + std::to_string(p));
  const auto w = compute_weights(scheme, sub, sub_avar);
  return fit_model(sub, w, {kDimPredictors.begin(), kDimPredictors.end()}, scheme);
}

DimCurveFit fit_dimension_curves(StatisticKind kind, const std::map<int, std::array<double, 3>>& per_p,
                                 const DimCurveOptions& options) {
  if (per_p.size() < 3) throw DataError("dimension curves need coefficients for at least three dimensions");
  const auto m = static_cast<Eigen::Index>(per_p.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::Index i = 0;
  for (const auto& [p, c] : per_p) {
    if (p < 1) throw DataError("dimension must be positive");
    X(i, 0) = 1.0 / std::sqrt(static_cast<double>(p));
    X(i, 1) = 1.0 / static_cast<double>(p);
    ++i;
  }
  DimCurveFit out;
  out.form.kind = kind;
  out.form.name = std::string(kind_name(kind)) + "_refit";
  out.form.p_min = per_p.begin()->first;
  out.form.p_max = per_p.rbegin()->first;
  for (std::size_t r = 0; r < 3; ++r) {
    Eigen::VectorXd y(m);
    i = 0;
    for (const auto& [p, c] : per_p) y(i++) = c[r];
    auto [beta, se] = ols(X, y);
    out.rule[r] = "saturated";
    if (options.drop_negligible && m > 2) {
      const double t0 = std::abs(beta(0) / se(0)), t1 = std::abs(beta(1) / se(1));
      if (std::min(t0, t1) < options.t_threshold) {
        const Eigen::Index keep = t0 >= t1 ? 0 : 1;
        const auto [b1, s1] = ols(X.col(keep), y);
        beta.setZero();
        se.setConstant(kNaN);
        beta(keep) = b1(0);
        se(keep) = s1(0);
        out.rule[r] = "t-test";
      }
    }
    out.form.beta[r] = {beta(0), beta(1)};
    out.std_error[r] = {se(0), se(1)};
  }
  return out;
}

void QuantileRatioDiagnostics::write_csv(std::ostream& os) const {
  os << "kind,n,p,alpha,alpha0,ratio,Y,k_inf\n";
  const auto precision = os.precision(12);
  for (const auto& r : rows) {
    os << kind_name(kind) << ',' << r.n << ',';
    if (r.p) os << *r.p;
    os << ',' << r.alpha << ',' << alpha0 << ',' << r.ratio << ',' << r.Y << ',' << r.k_inf << '\n';
  }
  os.precision(precision);
}

QuantileRatioDiagnostics quantile_ratio_diagnostics(const QuantileTable& table, double alpha0,
                                                    const CriticalTable& asymptotic) {
  const auto& grid = table.grid();
  const auto k0 = grid.index_of(alpha0);
  if (k0 < 0 || static_cast<std::size_t>(k0) + 1 >= grid.size()) {
    throw ConfigError("alpha0 must be a quantile point of the table's grid");
  }
  const auto kind = table.kind();
  const auto t_inf = [&](std::optional<int> p, double a) -> std::optional<double> {
    if (is_classical(kind)) return asymptotic_quantile(kind, a);
    if (asymptotic.contains(kind, p, a)) return asymptotic.at(kind, p, a);
    return std::nullopt;
  };
  QuantileRatioDiagnostics out;
  out.kind = kind;
  out.alpha0 = grid[static_cast<std::size_t>(k0)];
  std::vector<std::optional<int>> dims;
  if (table.p_list().empty()) dims.push_back(std::nullopt);
  for (int p : table.p_list()) dims.emplace_back(p);
  for (const auto& p : dims) {
    const auto inf0 = t_inf(p, out.alpha0);
    if (!inf0) {
      throw TableMissError("no asymptotic quantile for p=" + std::to_string(p.value_or(0)) + " at alpha0");
    }
    std::vector<std::pair<std::size_t, double>> inf;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      if (const auto v = t_inf(p, grid[k])) inf.emplace_back(k, *v);
    }
    for (int n : table.n_list()) {
      const auto row = table.row(n, p);
      const double base = row[static_cast<std::size_t>(k0)];
      for (const auto& [k, v] : inf) {
        out.rows.push_back({n, p, grid[k], row[k] / base, v / row[k], v / *inf0});
      }
    }
  }
  return out;
}

}  // namespace gof
