#pragma once

#include <string>

#include "msurv/se_recovery.hpp"

namespace msurv {

enum class Scale { Natural, Log };

/// One study's effect estimate and standard error on the analysis scale.
/// Ratio outcomes live on the log scale; exponentiation happens only when
/// results are reported.
struct StudyOutcome {
  double estimate = 0.0;
  double se = 0.0;
  Scale scale = Scale::Natural;
  std::string study_id;
  bool arm_zero_width = false;  // one arm had a zero-width interval (SE 0)
};

/// A median estimate paired with a standard error, however obtained.
struct ArmEstimate {
  double median = 0.0;
  double se = 0.0;
};

ArmEstimate arm_estimate(const MedianSummary& arm);

StudyOutcome median_outcome(const MedianSummary& arm, std::string study_id = {});
StudyOutcome difference_outcome(const MedianSummary& arm1, const MedianSummary& arm2,
                                std::string study_id = {});
StudyOutcome ratio_outcome(const MedianSummary& arm1, const MedianSummary& arm2, std::string study_id = {});

// Same contrasts from already-known arm standard errors (used by the
// simulation benchmark, which substitutes true standard errors).
StudyOutcome median_outcome(ArmEstimate arm, std::string study_id = {});
StudyOutcome difference_outcome(ArmEstimate arm1, ArmEstimate arm2, std::string study_id = {});
StudyOutcome ratio_outcome(ArmEstimate arm1, ArmEstimate arm2, std::string study_id = {});

}  // namespace msurv
