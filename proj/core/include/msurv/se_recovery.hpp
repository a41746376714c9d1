#pragma once

#include <optional>

namespace msurv {

/// A reported median with its (possibly partial) confidence interval.
struct MedianSummary {
  double estimate = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  double level = 0.95;

  /// Validates the invariants (estimate > 0, lower <= estimate <= upper,
  /// level in (0, 1)) and throws InvariantViolation / InvalidLevel otherwise.
  static MedianSummary make(double estimate, std::optional<double> lower, std::optional<double> upper,
                            double level = 0.95);
};

/// (upper - lower) / (2 z_{1-alpha/2}).
double wald_se(const MedianSummary& summary);

/// (estimate - lower) / z_{1-alpha/2}, for intervals reported without an upper limit.
double wald_se_one_sided(const MedianSummary& summary);

enum class SeRoute { TwoSided, OneSided };

struct RecoveredSe {
  double value = 0.0;
  SeRoute route = SeRoute::TwoSided;
  bool zero_width = false;  // value is 0; inverse-variance weighting will reject it
};

/// Two-sided recovery when both limits are present, one-sided when only the
/// lower limit is, MissingLimit otherwise.
RecoveredSe recover_se(const MedianSummary& summary);

struct AsymmetryFactor {
  double factor = 0.0;      // 1 / (z_{1-a1} + z_{1-a2})
  double bias_ratio = 0.0;  // factor * 2 z_{1-(a1+a2)/2}; 1 at a1 == a2, below 1 otherwise
};

/// Effect of unequal tail probabilities on the symmetric back-calculation.
AsymmetryFactor asymmetry_factor(double alpha1, double alpha2);

}  // namespace msurv
