#include <gtest/gtest.h>

#include <cmath>

#include "msurv/error.hpp"
#include "msurv/outcomes.hpp"

namespace {

using namespace msurv;

const MedianSummary kExp = MedianSummary::make(10.90, 9.50, 12.00);
const MedianSummary kComp = MedianSummary::make(9.20, 8.70, 10.30);

TEST(Outcomes, Median) {
  const auto m = median_outcome(kComp, "NCT00946712");
  EXPECT_EQ(m.estimate, 9.20);
  EXPECT_NEAR(m.se, 0.408171, 1e-6);
  EXPECT_EQ(m.scale, Scale::Natural);
  EXPECT_EQ(m.study_id, "NCT00946712");
  EXPECT_NEAR(median_outcome(MedianSummary::make(10, 8, 12)).se, 1.020427, 1e-6);
}

TEST(Outcomes, ZeroWidthRejected) {
  try {
    median_outcome(MedianSummary::make(5, 5, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroSE);
  }
}

TEST(Outcomes, Difference) {
  const auto d = difference_outcome(kExp, kComp);
  EXPECT_NEAR(d.estimate, 1.70, 1e-12);
  EXPECT_NEAR(d.se, std::hypot(1.25 / 1.959963984540054, 0.8 / 1.959963984540054), 1e-14);
  EXPECT_NEAR(d.se, 0.757200, 5e-6);
  const auto same = difference_outcome(kComp, kComp);
  EXPECT_EQ(same.estimate, 0.0);
  EXPECT_NEAR(same.se, std::sqrt(2.0) * 0.408171, 1e-6);
  const auto forced = difference_outcome(ArmEstimate{10.9, 0.6}, ArmEstimate{9.2, 0.0});
  EXPECT_EQ(forced.se, 0.6);
}

TEST(Outcomes, Ratio) {
  const auto r = ratio_outcome(kExp, kComp);
  EXPECT_NEAR(r.estimate, std::log(10.90 / 9.20), 1e-15);
  EXPECT_NEAR(r.estimate, 0.169613, 1e-4);
  const double z = 1.959963984540054;
  EXPECT_NEAR(r.se, std::hypot(1.25 / z / 10.90, 0.8 / z / 9.20), 1e-14);
  EXPECT_NEAR(r.se, 0.073431, 5e-6);
  EXPECT_EQ(r.scale, Scale::Log);
  const auto same = ratio_outcome(kComp, kComp);
  EXPECT_EQ(same.estimate, 0.0);
  EXPECT_NEAR(same.se, std::sqrt(2.0) * 0.408171 / 9.2, 1e-6);
  EXPECT_NEAR(ratio_outcome(ArmEstimate{20, 2}, ArmEstimate{10, 1}).estimate, std::log(2.0), 1e-15);
  try {
    ratio_outcome(ArmEstimate{0.0, 1}, ArmEstimate{10, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonpositiveMedian);
  }
}

TEST(Outcomes, Antisymmetry) {
  const auto ab = difference_outcome(kExp, kComp), ba = difference_outcome(kComp, kExp);
  EXPECT_EQ(ab.estimate, -ba.estimate);
  EXPECT_EQ(ab.se, ba.se);
  const auto rab = ratio_outcome(kExp, kComp), rba = ratio_outcome(kComp, kExp);
  EXPECT_NEAR(rab.estimate, -rba.estimate, 1e-15);
  EXPECT_EQ(rab.se, rba.se);
}

TEST(Outcomes, Units) {
  const double c = 30.4375;
  const auto e2 = MedianSummary::make(10.90 * c, 9.50 * c, 12.00 * c);
  const auto c2 = MedianSummary::make(9.20 * c, 8.70 * c, 10.30 * c);
  EXPECT_NEAR(ratio_outcome(e2, c2).estimate, ratio_outcome(kExp, kComp).estimate, 1e-12);
  EXPECT_NEAR(ratio_outcome(e2, c2).se, ratio_outcome(kExp, kComp).se, 1e-12);
  EXPECT_NEAR(difference_outcome(e2, c2).estimate, c * 1.70, 1e-9);
  EXPECT_NEAR(difference_outcome(e2, c2).se, c * difference_outcome(kExp, kComp).se, 1e-9);
}

TEST(Outcomes, DeltaMethodFirstOrder) {
  const ArmEstimate a{20.0, 0.02}, b{10.0, 0.01};
  const auto r = ratio_outcome(a, b);
  const double rel = std::sqrt(2.0) * 0.001;
  EXPECT_NEAR(std::exp(r.estimate + r.se), 2.0 * (1.0 + rel), 1e-5);
  EXPECT_NEAR(std::exp(r.estimate - r.se), 2.0 * (1.0 - rel), 1e-5);
}

TEST(Outcomes, ZeroWidthArmFlagged) {
  const auto d = difference_outcome(kExp, MedianSummary::make(9.2, 9.2, 9.2));
  EXPECT_TRUE(d.arm_zero_width);
  EXPECT_NEAR(d.se, 0.637767, 1e-6);
}

}  // namespace
