#include "gofstab/stabilizer.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "gofstab/errors.hpp"
#include "json.hpp"

namespace gof {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_alpha(double alpha, double alpha_max, Validity validity) {
  if (validity == Validity::strict) {
    if (!(alpha > 0.0 && alpha <= alpha_max)) {
      throw ValidityError("alpha = " + fmt(alpha) + " outside the fitted range (0, " +
                          fmt(alpha_max) + "]");
    }
  } else if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidityError("alpha = " + fmt(alpha) + " outside (0, 1)");
  }
}

void check_n(double n, int n_min, Validity validity) {
  const double lower = validity == Validity::strict ? n_min : 1.0;
  if (!(n >= lower)) {
    throw ValidityError("n = " + fmt(n) + " below the minimum sample size " + fmt(lower));
  }
}

void require_kind(StatisticKind got, StatisticKind want) {
  if (got != want) {
    throw ConfigError("statistic " + std::string(kind_name(got)) + " does not match the " +
                      std::string(kind_name(want)) + " form");
  }
}

StabilizedForm make_form(StatisticKind kind, std::vector<FormTerm> terms, std::string name) {
  StabilizedForm f;
  f.kind = kind;
  f.terms = std::move(terms);
  f.name = std::move(name);
  return f;
}

// Term shapes that occur in the published forms.
constexpr int kSqrtN = 1;  // n^{-1/2}
constexpr int kN = 2;      // n^{-1}

}  // namespace

void Multiplier::add(double coeff, double alpha_exponent) { terms_.emplace_back(coeff, alpha_exponent); }

double Multiplier::operator()(double alpha) const noexcept {
  double g = 1.0;
  for (const auto& [c, e] : terms_) g += e == 0.0 ? c : c * std::pow(alpha, -e);
  return g;
}

double Multiplier::derivative(double alpha) const noexcept {
  double d = 0.0;
  for (const auto& [c, e] : terms_) {
    if (e != 0.0) d -= e * c * std::pow(alpha, -e - 1.0);
  }
  return d;
}

void StabilizedForm::check(double n, double alpha, Validity validity) const {
  check_n(n, n_min, validity);
  check_alpha(alpha, alpha_max, validity);
}

Multiplier StabilizedForm::at(double n, Validity validity) const {
  check_n(n, n_min, validity);
  Multiplier m;
  for (const auto& t : terms) m.add(t.coeff * std::pow(n, -0.5 * t.n_half), 0.5 * t.alpha_half);
  return m;
}

void DimStabilizedForm::check(double n, int p, double alpha, Validity validity) const {
  check_n(n, n_min, validity);
  check_alpha(alpha, alpha_max, validity);
  if (p < 2 || (validity == Validity::strict && (p < p_min || p > p_max))) {
    throw ValidityError("p = " + std::to_string(p) + " outside the fitted range [" +
                        std::to_string(p_min) + ", " + std::to_string(p_max) + "]");
  }
}

StabilizedForm DimStabilizedForm::specialize(int p, Validity validity) const {
  if (p < 2 || (validity == Validity::strict && (p < p_min || p > p_max))) {
    throw ValidityError("p = " + std::to_string(p) + " outside the fitted range [" +
                        std::to_string(p_min) + ", " + std::to_string(p_max) + "]");
  }
  StabilizedForm f;
  f.kind = kind;
  f.n_min = n_min;
  f.alpha_max = alpha_max;
  f.name = name + "@p=" + std::to_string(p);
  const double pp = p;
  f.terms = {{kN, 0, q(inv_n, pp)}, {kN, 1, q(inv_n_sqrt_alpha, pp)}, {kN, 2, q(inv_n_alpha, pp)}};
  return f;
}

Multiplier DimStabilizedForm::at(double n, int p, Validity validity) const {
  return specialize(p, validity).at(n, validity);
}

double StephensForm::modify(double T, double n, Validity validity) const {
  check_n(n, n_min, validity);
  return (T - subtract[0] / n - subtract[1] / (n * n)) *
         (1.0 + multiply[0] / std::sqrt(n) + multiply[1] / n);
}

double StephensForm::invert(double t_star, double n, Validity validity) const {
  check_n(n, n_min, validity);
  return t_star / (1.0 + multiply[0] / std::sqrt(n) + multiply[1] / n) + subtract[0] / n +
         subtract[1] / (n * n);
}

const StabilizedForm& builtin_form(StatisticKind kind) {
  static const std::map<StatisticKind, StabilizedForm> forms = {
      {StatisticKind::D,
       make_form(StatisticKind::D, {{kSqrtN, 0, 0.1575}, {kN, 1, 0.0192}, {kSqrtN, 1, -0.0051}}, "D")},
      {StatisticKind::W2,
       make_form(StatisticKind::W2, {{kN, 0, -0.1651}, {kN, 1, 0.0749}, {kN, 2, -0.0014}}, "W2")},
      {StatisticKind::V,
       make_form(StatisticKind::V, {{kSqrtN, 0, 0.2330}, {kN, 1, 0.0276}, {kSqrtN, 1, -0.0068}}, "V")},
      {StatisticKind::U2,
       make_form(StatisticKind::U2, {{kN, 0, -0.1505}, {kN, 1, 0.0917}, {kN, 2, -0.0018}}, "U2")},
      {StatisticKind::A2,
       make_form(StatisticKind::A2, {{kN, 0, 0.0360}, {kN, 1, -0.0234}, {kN, 2, 0.0006}}, "A2")},
  };
  const auto it = forms.find(kind);
  if (it == forms.end()) {
    throw ConfigError("no built-in (n, alpha) form for " + std::string(kind_name(kind)));
  }
  return it->second;
}

const DimStabilizedForm& builtin_dim_form(StatisticKind kind) {
  static const std::map<StatisticKind, DimStabilizedForm> forms = [] {
    std::map<StatisticKind, DimStabilizedForm> m;
    auto add = [&](StatisticKind k, std::array<std::array<double, 2>, 3> beta) {
      DimStabilizedForm f;
      f.kind = k;
      f.beta = beta;
      f.name = std::string(kind_name(k));
      m[k] = f;
    };
    // rows: 1/n, 1/(n alpha), 1/(n sqrt alpha); columns: p^{-1/2}, p^{-1}
    add(StatisticKind::PCvM, {{{0.1130, -0.5415}, {-0.0031, 0.0}, {0.1438, 0.0}}});
    add(StatisticKind::PAD, {{{0.0978, -0.3596}, {-0.0025, 0.0}, {0.1126, 0.0}}});
    add(StatisticKind::NBak, {{{0.1189, -0.5838}, {-0.0030, 0.0}, {0.1210, 0.0385}}});
    return m;
  }();
  const auto it = forms.find(kind);
  if (it == forms.end()) {
    throw ConfigError("no built-in (n, p, alpha) form for " + std::string(kind_name(kind)));
  }
  return it->second;
}

const StephensForm& stephens_form(StatisticKind kind) {
  static const std::map<StatisticKind, StephensForm> forms = {
      {StatisticKind::D, {StatisticKind::D, {0.0, 0.0}, {0.12, 0.11}}},
      {StatisticKind::W2, {StatisticKind::W2, {0.4, -0.6}, {0.0, 1.0}}},
      {StatisticKind::V, {StatisticKind::V, {0.0, 0.0}, {0.155, 0.24}}},
      {StatisticKind::U2, {StatisticKind::U2, {0.1, -0.1}, {0.0, 0.8}}},
      // Anderson-Darling is used unmodified.
      {StatisticKind::A2, {StatisticKind::A2, {0.0, 0.0}, {0.0, 0.0}}},
  };
  const auto it = forms.find(kind);
  if (it == forms.end()) throw ConfigError("no Stephens form for " + std::string(kind_name(kind)));
  return it->second;
}

const StabilizedForm& circular_variant(const std::string& name) {
  static const std::map<std::string, StabilizedForm> forms = {
      {"PCvM_p2",
       make_form(StatisticKind::PCvM, {{kN, 0, -0.1505}, {kN, 1, 0.0917}, {kN, 2, -0.0018}}, "PCvM_p2")},
      {"PCvM_p2_from_np",
       make_form(StatisticKind::PCvM, {{kN, 0, -0.1908}, {kN, 1, 0.1017}, {kN, 2, -0.0022}},
                 "PCvM_p2_from_np")},
      {"PAD_p2",
       make_form(StatisticKind::PAD, {{kN, 0, -0.0751}, {kN, 1, 0.0692}, {kN, 2, -0.0014}}, "PAD_p2")},
      {"PAD_p2_from_np",
       make_form(StatisticKind::PAD, {{kN, 0, -0.1106}, {kN, 1, 0.0796}, {kN, 2, -0.0018}},
                 "PAD_p2_from_np")},
  };
  const auto it = forms.find(name);
  if (it == forms.end()) throw ConfigError("unknown circular form variant '" + name + "'");
  return it->second;
}

std::vector<std::string> circular_variant_names() {
  return {"PCvM_p2", "PCvM_p2_from_np", "PAD_p2", "PAD_p2_from_np"};
}

double eval_g(const StabilizedForm& form, double n, double alpha, Validity validity) {
  form.check(n, alpha, validity);
  return form.at(n, validity)(alpha);
}

double eval_g_dim(const DimStabilizedForm& form, double n, int p, double alpha, Validity validity) {
  form.check(n, p, alpha, validity);
  return form.at(n, p, validity)(alpha);
}

double stabilize(const StatisticValue& T, double alpha, const StabilizedForm& form, Validity validity) {
  require_kind(T.kind, form.kind);
  return T.value * eval_g(form, static_cast<double>(T.n), alpha, validity);
}

double stabilize(const StatisticValue& T, double alpha, const DimStabilizedForm& form,
                 Validity validity) {
  require_kind(T.kind, form.kind);
  if (!T.p) throw ConfigError("directional statistic without dimension");
  return T.value * eval_g_dim(form, static_cast<double>(T.n), *T.p, alpha, validity);
}

double critical_value(const StabilizedForm& form, double n, double alpha, Validity validity) {
  if (alpha < kSmallestAlpha) throw ValidityError("critical values below alpha = 0.001 are not provided");
  if (!is_classical(form.kind)) {
    throw ConfigError("directional forms need a dimension and a critical table");
  }
  return asymptotic_quantile(form.kind, alpha) / eval_g(form, n, alpha, validity);
}

double critical_value(const DimStabilizedForm& form, double n, int p, double alpha,
                      const CriticalTable& table, Validity validity) {
  if (alpha < kSmallestAlpha) throw ValidityError("critical values below alpha = 0.001 are not provided");
  const double g = eval_g_dim(form, n, p, alpha, validity);
  return projected_asymptotic_quantile(form.kind, p, alpha, table) / g;
}

double critical_value(StatisticKind kind, double n, double alpha, std::optional<int> p,
                      const CriticalTable& table) {
  if (is_classical(kind)) return critical_value(builtin_form(kind), n, alpha);
  if (!p) throw ConfigError(std::string(kind_name(kind)) + " critical values need p");
  return critical_value(builtin_dim_form(kind), n, *p, alpha, table);
}

double stephens_modify(StatisticKind kind, double T, double n, Validity validity) {
  return stephens_form(kind).modify(T, n, validity);
}

std::string to_json(const StabilizedForm& form) {
  json terms = json::array();
  for (const auto& t : form.terms) {
    terms.push_back({{"n_exp", 0.5 * t.n_half}, {"alpha_exp", 0.5 * t.alpha_half}, {"coeff", t.coeff}});
  }
  json j{{"kind", kind_name(form.kind)},
         {"model", "n_alpha"},
         {"terms", terms},
         {"n_min", form.n_min},
         {"alpha_max", form.alpha_max},
         {"p_range", nullptr}};
  if (!form.name.empty()) j["name"] = form.name;
  return j.dump(2);
}

std::string to_json(const DimStabilizedForm& form) {
  json q{{"1/n", form.beta[0]}, {"1/(n alpha)", form.beta[1]}, {"1/(n sqrt(alpha))", form.beta[2]}};
  json j{{"kind", kind_name(form.kind)},
         {"model", "n_p_alpha"},
         {"q", q},
         {"n_min", form.n_min},
         {"alpha_max", form.alpha_max},
         {"p_range", {form.p_min, form.p_max}}};
  if (!form.name.empty()) j["name"] = form.name;
  return j.dump(2);
}

std::string to_json(const StephensForm& form) {
  json j{{"kind", kind_name(form.kind)},
         {"model", "stephens"},
         {"subtract", form.subtract},
         {"multiply", form.multiply},
         {"n_min", form.n_min},
         {"alpha_max", nullptr},
         {"p_range", nullptr}};
  return j.dump(2);
}

FormBundle form_from_json(const std::string& text) {
  FormBundle out;
  try {
    const json j = json::parse(text);
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    const auto model = j.at("model").get<std::string>();
    if (model == "n_alpha") {
      StabilizedForm f;
      f.kind = kind;
      f.n_min = j.value("n_min", 5);
      f.alpha_max = j.value("alpha_max", 0.25);
      f.name = j.value("name", std::string{});
      for (const auto& t : j.at("terms")) {
        const double ne = t.at("n_exp").get<double>();
        const double ae = t.at("alpha_exp").get<double>();
        if (ne < 0.5 || ae < 0.0 || std::fmod(2 * ne, 1.0) != 0.0 || std::fmod(2 * ae, 1.0) != 0.0) {
          throw ConfigError("form exponents must be half-integers with n_exp >= 1/2");
        }
        f.terms.push_back({static_cast<int>(2 * ne), static_cast<int>(2 * ae), t.at("coeff").get<double>()});
      }
      if (f.terms.size() > 6) throw ConfigError("an (n, alpha) form has at most 6 terms");
      out.n_alpha = f;
    } else if (model == "n_p_alpha") {
      DimStabilizedForm f;
      f.kind = kind;
      f.n_min = j.value("n_min", 5);
      f.alpha_max = j.value("alpha_max", 0.25);
      f.name = j.value("name", std::string{});
      const auto& q = j.at("q");
      f.beta[0] = q.at("1/n").get<std::array<double, 2>>();
      f.beta[1] = q.at("1/(n alpha)").get<std::array<double, 2>>();
      f.beta[2] = q.at("1/(n sqrt(alpha))").get<std::array<double, 2>>();
      if (j.contains("p_range") && j["p_range"].is_array()) {
        f.p_min = j["p_range"][0].get<int>();
        f.p_max = j["p_range"][1].get<int>();
      }
      out.n_p_alpha = f;
    } else if (model == "stephens") {
      StephensForm f;
      f.kind = kind;
      f.subtract = j.at("subtract").get<std::array<double, 2>>();
      f.multiply = j.at("multiply").get<std::array<double, 2>>();
      f.n_min = j.value("n_min", 8);
      out.stephens = f;
    } else {
      throw ConfigError("unknown form model '" + model + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("form bundle: ") + e.what(), 0);
  }
  return out;
}

}  // namespace gof
