#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gofstab/asymptotics.hpp"
#include "gofstab/statistics.hpp"

namespace gof {

// Strict enforces the fitted range (n >= n_min, 0 < alpha <= alpha_max,
// 2 <= p <= 300); relaxed accepts any n >= 1 and alpha in (0, 1) for
// diagnostics.
enum class Validity { strict, relaxed };

// coeff * n^{-n_half/2} * alpha^{-alpha_half/2}
struct FormTerm {
  int n_half = 1;
  int alpha_half = 0;
  double coeff = 0.0;

  bool operator==(const FormTerm&) const = default;
};

// g(n, alpha) for fixed n (and p): 1 + sum_k c_k alpha^{-e_k}.
class Multiplier {
 public:
  Multiplier() = default;
  void add(double coeff, double alpha_exponent);

  double operator()(double alpha) const noexcept;
  double derivative(double alpha) const noexcept;

 private:
  std::vector<std::pair<double, double>> terms_;  // (coefficient, exponent of 1/alpha)
};

// T*_n(alpha) = T_n g(n, alpha), g = 1 + sum of terms.
struct StabilizedForm {
  StatisticKind kind = StatisticKind::D;
  std::vector<FormTerm> terms;
  int n_min = 5;
  double alpha_max = 0.25;
  std::string name;

  Multiplier at(double n, Validity validity = Validity::strict) const;
  void check(double n, double alpha, Validity validity) const;
};

// g(n, p, alpha) = 1 + q_{1/n}(p)/n + q_{1/(n alpha)}(p)/(n alpha)
//                    + q_{1/(n sqrt alpha)}(p)/(n sqrt alpha),
// q_r(p) = beta_{r,1}/sqrt(p) + beta_{r,2}/p.
struct DimStabilizedForm {
  enum Predictor { inv_n = 0, inv_n_alpha = 1, inv_n_sqrt_alpha = 2 };

  StatisticKind kind = StatisticKind::PCvM;
  std::array<std::array<double, 2>, 3> beta{};
  int n_min = 5;
  double alpha_max = 0.25;
  int p_min = 2;
  int p_max = 300;
  std::string name;

  double q(Predictor r, double p) const noexcept {
    return beta[r][0] / std::sqrt(p) + beta[r][1] / p;
  }
  // The (n, alpha) form obtained by fixing p.
  StabilizedForm specialize(int p, Validity validity = Validity::strict) const;
  Multiplier at(double n, int p, Validity validity = Validity::strict) const;
  void check(double n, int p, double alpha, Validity validity) const;
};

// (T - subtract[0]/n - subtract[1]/n^2) (1 + multiply[0]/sqrt(n) + multiply[1]/n)
struct StephensForm {
  StatisticKind kind = StatisticKind::D;
  std::array<double, 2> subtract{};
  std::array<double, 2> multiply{};
  int n_min = 8;

  double modify(double T, double n, Validity validity = Validity::strict) const;
  // Inverse of modify: the T whose modified value equals t_star.
  double invert(double t_star, double n, Validity validity = Validity::strict) const;
};

// Built-in bundles.
const StabilizedForm& builtin_form(StatisticKind classical_kind);
const DimStabilizedForm& builtin_dim_form(StatisticKind directional_kind);
const StephensForm& stephens_form(StatisticKind classical_kind);

// Named p = 2 variants of the directional statistics:
//   "PCvM_p2"          Watson form (P^CvM_{n,2} is proportional to U^2_n)
//   "PCvM_p2_from_np"  (n, p, alpha) form at p = 2, rounded as published
//   "PAD_p2"           fitted directly at p = 2
//   "PAD_p2_from_np"   (n, p, alpha) form at p = 2, rounded as published
const StabilizedForm& circular_variant(const std::string& name);
std::vector<std::string> circular_variant_names();

double eval_g(const StabilizedForm& form, double n, double alpha,
              Validity validity = Validity::strict);
double eval_g_dim(const DimStabilizedForm& form, double n, int p, double alpha,
                  Validity validity = Validity::strict);

// T*_n(alpha); throws ConfigError on kind mismatch.
double stabilize(const StatisticValue& T, double alpha, const StabilizedForm& form,
                 Validity validity = Validity::strict);
double stabilize(const StatisticValue& T, double alpha, const DimStabilizedForm& form,
                 Validity validity = Validity::strict);

// T_{n;alpha} ~ T_{inf;alpha} / g(n, alpha). Refuses alpha < 0.001.
double critical_value(const StabilizedForm& form, double n, double alpha,
                      Validity validity = Validity::strict);
double critical_value(const DimStabilizedForm& form, double n, int p, double alpha,
                      const CriticalTable& table = CriticalTable::published(),
                      Validity validity = Validity::strict);
// Built-in forms; p is required for the directional kinds.
double critical_value(StatisticKind kind, double n, double alpha, std::optional<int> p = std::nullopt,
                      const CriticalTable& table = CriticalTable::published());

double stephens_modify(StatisticKind kind, double T, double n, Validity validity = Validity::strict);

// JSON bundle text: {kind, model, terms | q | subtract/multiply, n_min, alpha_max, p_range}.
std::string to_json(const StabilizedForm& form);
std::string to_json(const DimStabilizedForm& form);
std::string to_json(const StephensForm& form);

// Parses any bundle; exactly one of the returned members is set.
struct FormBundle {
  std::optional<StabilizedForm> n_alpha;
  std::optional<DimStabilizedForm> n_p_alpha;
  std::optional<StephensForm> stephens;
};
FormBundle form_from_json(const std::string& text);

inline constexpr double kSmallestAlpha = 0.001;

}  // namespace gof
