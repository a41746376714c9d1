#include "msurv/outcomes.hpp"

#include <cmath>
#include <utility>

#include "msurv/error.hpp"

namespace msurv {

namespace {

StudyOutcome checked(StudyOutcome out) {
  if (!(out.se > 0.0)) {
    fail(ErrorCode::ZeroSE, "study '" + out.study_id + "' has a zero standard error (zero-width interval)");
  }
  return out;
}

}  // namespace

ArmEstimate arm_estimate(const MedianSummary& arm) { return {arm.estimate, recover_se(arm).value}; }

StudyOutcome median_outcome(ArmEstimate arm, std::string study_id) {
  return checked({arm.median, arm.se, Scale::Natural, std::move(study_id), arm.se == 0.0});
}

StudyOutcome difference_outcome(ArmEstimate arm1, ArmEstimate arm2, std::string study_id) {
  const double se = std::sqrt(arm1.se * arm1.se + arm2.se * arm2.se);
  return checked({arm1.median - arm2.median, se, Scale::Natural, std::move(study_id),
                  arm1.se == 0.0 || arm2.se == 0.0});
}

StudyOutcome ratio_outcome(ArmEstimate arm1, ArmEstimate arm2, std::string study_id) {
  if (!(arm1.median > 0.0) || !(arm2.median > 0.0)) {
    fail(ErrorCode::NonpositiveMedian, "ratio of medians needs positive medians");
  }
  const double r1 = arm1.se / arm1.median;
  const double r2 = arm2.se / arm2.median;
  return checked({std::log(arm1.median / arm2.median), std::sqrt(r1 * r1 + r2 * r2), Scale::Log,
                  std::move(study_id), arm1.se == 0.0 || arm2.se == 0.0});
}

StudyOutcome median_outcome(const MedianSummary& arm, std::string study_id) {
  return median_outcome(arm_estimate(arm), std::move(study_id));
}

StudyOutcome difference_outcome(const MedianSummary& arm1, const MedianSummary& arm2, std::string study_id) {
  return difference_outcome(arm_estimate(arm1), arm_estimate(arm2), std::move(study_id));
}

StudyOutcome ratio_outcome(const MedianSummary& arm1, const MedianSummary& arm2, std::string study_id) {
  if (!(arm1.estimate > 0.0) || !(arm2.estimate > 0.0)) {
    fail(ErrorCode::NonpositiveMedian, "ratio of medians needs positive medians");
  }
  return ratio_outcome(arm_estimate(arm1), arm_estimate(arm2), std::move(study_id));
}

}  // namespace msurv
