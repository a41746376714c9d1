#pragma once

#include <optional>
#include <span>
#include <vector>

#include "msurv/outcomes.hpp"
#include "msurv/survival.hpp"

namespace msurv {

enum class MetaModel { CommonEffect, RandomEffects };

struct MetaResult {
  MetaModel model = MetaModel::CommonEffect;
  Scale scale = Scale::Natural;
  std::size_t k_studies = 0;
  double alpha = 0.05;

  double pooled = 0.0;
  double pooled_se = 0.0;  // standard error behind pooled_ci (Hartung-Knapp for random effects)
  double model_se = 0.0;   // 1 / sqrt(sum w)
  std::optional<Interval> pooled_ci;

  double tau2 = 0.0;
  std::optional<Interval> tau2_ci;
  double q_statistic = 0.0;
  double i2_percent = 0.0;
  std::optional<Interval> prediction_interval;

  std::vector<double> weights;

  bool degenerate_df = false;      // a single study: no t interval exists
  bool degenerate_hk = false;      // zero Hartung-Knapp dispersion, zero-width interval
  bool reml_converged = true;
  int reml_iterations = 0;
};

/// Fixed-effect (common-effect) inverse-variance pooling with a t_{N-1} interval.
MetaResult pool_common(std::span<const StudyOutcome> outcomes, double alpha);

struct RemlFit {
  double tau2 = 0.0;
  int iterations = 0;
  bool converged = true;
};

inline constexpr int kRemlMaxIterations = 200;
inline constexpr double kRemlTolerance = 1e-10;

/// REML between-study variance by Fisher scoring truncated at zero, safeguarded
/// by a sign-change bracket on the score.
RemlFit reml_tau2(std::span<const StudyOutcome> outcomes);

/// d l_R / d tau^2 at the given tau^2.
double reml_score(std::span<const StudyOutcome> outcomes, double tau2);

/// Random-effects pooling: REML tau^2, inverse-variance weights 1/(se^2 + tau^2)
/// and a Hartung-Knapp t_{N-1} interval. Also fills Cochran's Q.
MetaResult pool_random(std::span<const StudyOutcome> outcomes, double alpha);

/// Cochran's Q at fixed-effect weights.
double cochran_q(std::span<const StudyOutcome> outcomes);

/// sum_i w_i(tau2) (y_i - mean(tau2))^2 with w_i(tau2) = 1/(se_i^2 + tau2).
double generalized_q(std::span<const StudyOutcome> outcomes, double tau2);

/// Q-profile interval for tau^2 (bracketing plus bisection, truncated at 0).
Interval q_profile_ci(std::span<const StudyOutcome> outcomes, double alpha);

/// I^2 = 100 tau^2 / (tau^2 + s^2) with the typical within-study variance
/// s^2 = (N-1) sum w / ((sum w)^2 - sum w^2), w = 1/se^2.
double i_squared(std::span<const StudyOutcome> outcomes, double tau2);

/// Adds I^2 (typical-variance form) and, for N >= 3, the prediction interval
/// pooled +/- t_{N-2} sqrt(tau^2 + pooled_se^2), which contains pooled_ci.
MetaResult derived_stats(std::span<const StudyOutcome> outcomes, MetaResult meta, double alpha);

/// Full analysis: pool_common, or pool_random + q_profile_ci + derived_stats.
MetaResult meta_analyze(std::span<const StudyOutcome> outcomes, MetaModel model, double alpha);

}  // namespace msurv
