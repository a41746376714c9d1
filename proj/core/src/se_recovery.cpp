#include "msurv/se_recovery.hpp"

#include <cmath>
#include <string>

#include "msurv/error.hpp"
#include "msurv/quantiles.hpp"

namespace msurv {

namespace {

double level_z(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidLevel, "confidence level must lie in (0, 1)");
  return two_sided_z(1.0 - level);
}

}  // namespace

MedianSummary MedianSummary::make(double estimate, std::optional<double> lower, std::optional<double> upper,
                                  double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidLevel, "confidence level must lie in (0, 1)");
  if (!(estimate > 0.0) || !std::isfinite(estimate)) {
    fail(ErrorCode::InvariantViolation, "median estimate must be positive and finite");
  }
  if (lower && (!(*lower >= 0.0) || *lower > estimate)) {
    fail(ErrorCode::InvariantViolation,
         "lower limit " + std::to_string(*lower) + " must lie in [0, " + std::to_string(estimate) + "]");
  }
  if (upper && (!std::isfinite(*upper) || *upper < estimate)) {
    fail(ErrorCode::InvariantViolation,
         "upper limit " + std::to_string(*upper) + " is below the estimate " + std::to_string(estimate));
  }
  return MedianSummary{estimate, lower, upper, level};
}

double wald_se(const MedianSummary& summary) {
  const double z = level_z(summary.level);
  if (!summary.lower || !summary.upper) fail(ErrorCode::MissingLimit, "wald_se needs both limits");
  if (*summary.upper < *summary.lower) fail(ErrorCode::InvariantViolation, "upper limit below lower limit");
  return (*summary.upper - *summary.lower) / (2.0 * z);
}

double wald_se_one_sided(const MedianSummary& summary) {
  const double z = level_z(summary.level);
  if (!summary.lower) fail(ErrorCode::MissingLimit, "one-sided recovery needs the lower limit");
  if (summary.estimate < *summary.lower) fail(ErrorCode::InvariantViolation, "estimate below lower limit");
  return (summary.estimate - *summary.lower) / z;
}

RecoveredSe recover_se(const MedianSummary& summary) {
  RecoveredSe out;
  if (summary.lower && summary.upper) {
    out.value = wald_se(summary);
    out.route = SeRoute::TwoSided;
  } else if (summary.lower) {
    out.value = wald_se_one_sided(summary);
    out.route = SeRoute::OneSided;
  } else {
    fail(ErrorCode::MissingLimit, "no lower confidence limit reported; standard error not recoverable");
  }
  out.zero_width = out.value == 0.0;
  return out;
}

AsymmetryFactor asymmetry_factor(double alpha1, double alpha2) {
  if (!(alpha1 > 0.0 && alpha2 > 0.0 && alpha1 + alpha2 < 1.0)) {
    fail(ErrorCode::InvalidTails, "tail probabilities must be positive with sum below 1");
  }
  AsymmetryFactor out;
  out.factor = 1.0 / (normal_quantile(1.0 - alpha1) + normal_quantile(1.0 - alpha2));
  out.bias_ratio = out.factor * 2.0 * normal_quantile(1.0 - (alpha1 + alpha2) / 2.0);
  return out;
}

}  // namespace msurv
