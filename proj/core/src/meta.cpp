#include "msurv/meta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "msurv/error.hpp"
#include "msurv/quantiles.hpp"

namespace msurv {

namespace {

void validate(std::span<const StudyOutcome> outcomes, std::size_t min_studies) {
  if (outcomes.empty()) fail(ErrorCode::EmptyMeta, "no study outcomes to pool");
  if (outcomes.size() < min_studies) {
    fail(ErrorCode::InsufficientStudies,
         "need at least " + std::to_string(min_studies) + " studies, got " + std::to_string(outcomes.size()));
  }
  for (const auto& o : outcomes) {
    if (!(o.se > 0.0) || !std::isfinite(o.se)) {
      fail(ErrorCode::ZeroVariance, "study '" + o.study_id + "' has a non-positive standard error");
    }
    if (!std::isfinite(o.estimate)) {
      fail(ErrorCode::InvalidArgument, "study '" + o.study_id + "' has a non-finite estimate");
    }
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
}

struct WeightedMean {
  double mean = 0.0;
  double sum_w = 0.0;
};

WeightedMean weighted_mean(std::span<const StudyOutcome> outcomes, double tau2) {
  WeightedMean out;
  double sum_wy = 0.0;
  for (const auto& o : outcomes) {
    const double w = 1.0 / (o.se * o.se + tau2);
    out.sum_w += w;
    sum_wy += w * o.estimate;
  }
  out.mean = sum_wy / out.sum_w;
  return out;
}

MetaResult base_result(std::span<const StudyOutcome> outcomes, MetaModel model, double alpha, double tau2) {
  MetaResult r;
  r.model = model;
  r.scale = outcomes.front().scale;
  r.k_studies = outcomes.size();
  r.alpha = alpha;
  r.tau2 = tau2;
  const auto wm = weighted_mean(outcomes, tau2);
  r.pooled = wm.mean;
  r.model_se = std::sqrt(1.0 / wm.sum_w);
  r.weights.reserve(outcomes.size());
  for (const auto& o : outcomes) r.weights.push_back(1.0 / (o.se * o.se + tau2));
  r.q_statistic = cochran_q(outcomes);
  return r;
}

// Fisher-scoring ingredients: tr(P), y'PPy and tr(PP) for
// P = W - w w' / sum(w).
struct RemlTerms {
  double trace_p = 0.0;
  double ypp_y = 0.0;
  double trace_pp = 0.0;
};

RemlTerms reml_terms(std::span<const StudyOutcome> outcomes, double tau2) {
  const auto wm = weighted_mean(outcomes, tau2);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, ypp = 0.0;
  for (const auto& o : outcomes) {
    const double w = 1.0 / (o.se * o.se + tau2);
    const double r = o.estimate - wm.mean;
    s1 += w;
    s2 += w * w;
    s3 += w * w * w;
    ypp += w * w * r * r;
  }
  RemlTerms t;
  t.trace_p = s1 - s2 / s1;
  t.ypp_y = ypp;
  t.trace_pp = s2 - 2.0 * s3 / s1 + (s2 * s2) / (s1 * s1);
  return t;
}

}  // namespace

double cochran_q(std::span<const StudyOutcome> outcomes) { return generalized_q(outcomes, 0.0); }

double generalized_q(std::span<const StudyOutcome> outcomes, double tau2) {
  const auto wm = weighted_mean(outcomes, tau2);
  double q = 0.0;
  for (const auto& o : outcomes) {
    const double r = o.estimate - wm.mean;
    q += r * r / (o.se * o.se + tau2);
  }
  return q;
}

MetaResult pool_common(std::span<const StudyOutcome> outcomes, double alpha) {
  require_alpha(alpha);
  validate(outcomes, 1);
  MetaResult r = base_result(outcomes, MetaModel::CommonEffect, alpha, 0.0);
  r.pooled_se = r.model_se;
  if (outcomes.size() == 1) {
    r.degenerate_df = true;
    return r;
  }
  const double t = student_t_quantile(static_cast<double>(outcomes.size() - 1), 1.0 - alpha / 2.0);
  r.pooled_ci = Interval{r.pooled - t * r.pooled_se, r.pooled + t * r.pooled_se};
  return r;
}

double reml_score(std::span<const StudyOutcome> outcomes, double tau2) {
  const auto t = reml_terms(outcomes, tau2);
  return 0.5 * (t.ypp_y - t.trace_p);
}

RemlFit reml_tau2(std::span<const StudyOutcome> outcomes) {
  validate(outcomes, 2);

  // Start from the DerSimonian-Laird moment estimate.
  const auto fixed = weighted_mean(outcomes, 0.0);
  double sum_w2 = 0.0;
  for (const auto& o : outcomes) sum_w2 += 1.0 / (o.se * o.se * o.se * o.se);
  const double c = fixed.sum_w - sum_w2 / fixed.sum_w;
  const double q = cochran_q(outcomes);
  double tau2 = std::max(0.0, (q - static_cast<double>(outcomes.size() - 1)) / c);

  RemlFit fit;
  fit.converged = false;
  // Fisher steps are kept inside the bracket [lo, hi] of the score's sign
  // change; an overshoot is replaced by the secant through the last two
  // iterates, and a step leaving the bracket by its midpoint.
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  double prev = 0.0, prev_score = 0.0;
  bool have_prev = false;
  for (int it = 1; it <= kRemlMaxIterations; ++it) {
    fit.iterations = it;
    const auto terms = reml_terms(outcomes, tau2);
    const double score = terms.ypp_y - terms.trace_p;
    if (tau2 == 0.0 && score <= 0.0) {
      fit.converged = true;
      break;
    }
    if (score > 0.0) {
      lo = std::max(lo, tau2);
    } else {
      hi = std::min(hi, tau2);
    }
    double next = std::max(0.0, tau2 + score / terms.trace_pp);
    if (have_prev && (score > 0.0) != (prev_score > 0.0) && score != prev_score) {
      next = tau2 - score * (tau2 - prev) / (score - prev_score);
    }
    if (std::isfinite(hi) && !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::fabs(next - tau2);
    prev = tau2;
    prev_score = score;
    have_prev = true;
    tau2 = next;
    if (change < kRemlTolerance * (1.0 + tau2)) {
      fit.converged = true;
      break;
    }
  }
  fit.tau2 = tau2;
  return fit;
}

MetaResult pool_random(std::span<const StudyOutcome> outcomes, double alpha) {
  require_alpha(alpha);
  validate(outcomes, 2);
  const RemlFit fit = reml_tau2(outcomes);
  MetaResult r = base_result(outcomes, MetaModel::RandomEffects, alpha, fit.tau2);
  r.reml_converged = fit.converged;
  r.reml_iterations = fit.iterations;

  double dispersion = 0.0;
  double sum_w = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double resid = outcomes[i].estimate - r.pooled;
    dispersion += r.weights[i] * resid * resid;
    sum_w += r.weights[i];
  }
  const double k1 = static_cast<double>(outcomes.size() - 1);
  r.pooled_se = std::sqrt(dispersion / (k1 * sum_w));
  r.degenerate_hk = r.pooled_se == 0.0;
  const double t = student_t_quantile(k1, 1.0 - alpha / 2.0);
  r.pooled_ci = Interval{r.pooled - t * r.pooled_se, r.pooled + t * r.pooled_se};
  return r;
}

Interval q_profile_ci(std::span<const StudyOutcome> outcomes, double alpha) {
  require_alpha(alpha);
  validate(outcomes, 2);
  const double df = static_cast<double>(outcomes.size() - 1);
  const double q0 = generalized_q(outcomes, 0.0);

  // Q_gen decreases from q0 towards 0 as tau^2 grows.
  auto solve = [&](double target) {
    if (q0 <= target) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    for (const auto& o : outcomes) hi = std::max(hi, o.se * o.se);
    while (generalized_q(outcomes, hi) > target) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (generalized_q(outcomes, mid) > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  Interval ci;
  ci.lower = solve(chi_squared_quantile(df, 1.0 - alpha / 2.0));
  ci.upper = solve(chi_squared_quantile(df, alpha / 2.0));
  return ci;
}

double i_squared(std::span<const StudyOutcome> outcomes, double tau2) {
  validate(outcomes, 1);
  if (outcomes.size() < 2 || !(tau2 > 0.0)) return 0.0;
  double sum_w = 0.0, sum_w2 = 0.0;
  for (const auto& o : outcomes) {
    const double w = 1.0 / (o.se * o.se);
    sum_w += w;
    sum_w2 += w * w;
  }
  const double k = static_cast<double>(outcomes.size());
  const double typical = (k - 1.0) * sum_w / (sum_w * sum_w - sum_w2);
  return 100.0 * tau2 / (tau2 + typical);
}

MetaResult derived_stats(std::span<const StudyOutcome> outcomes, MetaResult meta, double alpha) {
  require_alpha(alpha);
  meta.i2_percent = i_squared(outcomes, meta.tau2);
  if (outcomes.size() < 3) {
    fail(ErrorCode::InsufficientStudies, "prediction interval needs at least 3 studies");
  }
  const double t = student_t_quantile(static_cast<double>(outcomes.size()) - 2.0, 1.0 - alpha / 2.0);
  const double half = t * std::sqrt(meta.tau2 + meta.pooled_se * meta.pooled_se);
  meta.prediction_interval = Interval{meta.pooled - half, meta.pooled + half};
  return meta;
}

MetaResult meta_analyze(std::span<const StudyOutcome> outcomes, MetaModel model, double alpha) {
  if (model == MetaModel::CommonEffect) return pool_common(outcomes, alpha);
  MetaResult r = pool_random(outcomes, alpha);
  r.tau2_ci = q_profile_ci(outcomes, alpha);
  if (outcomes.size() >= 3) return derived_stats(outcomes, std::move(r), alpha);
  r.i2_percent = i_squared(outcomes, r.tau2);
  return r;
}

}  // namespace msurv
