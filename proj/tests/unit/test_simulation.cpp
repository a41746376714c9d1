#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "msurv/error.hpp"
#include "msurv/simulation.hpp"
#include "support/oracles.hpp"

namespace {

using namespace msurv;

constexpr double kInf = std::numeric_limits<double>::infinity();

double censoring_integral(const AnalyticDistribution& event, const AnalyticDistribution& censor, double cutoff) {
  // P(T > min(C, cutoff)) for C with a density on [0, cutoff].
  return oracle::simpson([&](double c) { return pdf(censor, c) * survival(event, c); }, 0.0, cutoff, 200000) +
         survival(censor, cutoff) * survival(event, cutoff);
}

TEST(GenerateStudy, NoCensoringReturnsRawDraws) {
  auto a = RngStream(11);
  auto b = RngStream(11);
  const auto records = generate_study(Exponential{0.025}, PointMass{}, kInf, 200, a);
  for (const auto& r : records) {
    const double t = sample(Exponential{0.025}, b);
    sample(PointMass{}, b);
    EXPECT_TRUE(r.is_event());
    EXPECT_EQ(r.time, t);
  }
}

TEST(GenerateStudy, ObservedTimeAndStatus) {
  auto s = RngStream(3);
  const auto records = generate_study(Weibull{2, 35}, Uniform{0, 40}, 30.0, 5000, s);
  for (const auto& r : records) {
    EXPECT_LE(r.time, 30.0);
    if (r.time == 30.0) EXPECT_FALSE(r.is_event());
  }
}

TEST(CensoringRate, MatchesIntegral) {
  const double rate = censoring_rate(Exponential{0.025}, Uniform{0, 100}, 100.0, 1000000, 5);
  EXPECT_NEAR(rate, (1.0 - std::exp(-2.5)) / 2.5, 0.002);
  const double weib = censoring_rate(Weibull{2, 35}, Exponential{1.0 / 60.0}, 100.0, 1000000, 6);
  EXPECT_NEAR(weib, censoring_integral(Weibull{2, 35}, Exponential{1.0 / 60.0}, 100.0), 0.002);
}

TEST(TrueSe, UncensoredExponentialAndDeterminism) {
  const auto a = monte_carlo_true_se(Exponential{0.025}, PointMass{}, kInf, 1000, 20000, 8, 4);
  EXPECT_NEAR(a.se / (40.0 / std::sqrt(1000.0)), 1.0, 0.03);
  EXPECT_EQ(a.undefined, 0);
  const auto b = monte_carlo_true_se(Exponential{0.025}, PointMass{}, kInf, 1000, 20000, 8, 1);
  EXPECT_EQ(a.se, b.se);
  EXPECT_EQ(a.se_log, b.se_log);
  const auto quarter = monte_carlo_true_se(Exponential{0.025}, PointMass{}, kInf, 4000, 5000, 9, 4);
  EXPECT_NEAR(quarter.se / a.se, 0.5, 0.05);
}

TEST(TrueSe, UndefinedRateGuard) {
  try {
    monte_carlo_true_se(Exponential{0.025}, PointMass{}, 20.0, 100, 1000, 1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndefinedRateExceeded);
  }
}

TEST(StudyLevel, SelfReferentialZeroAndWorkerInvariance) {
  ScenarioConfig cfg;
  cfg.n = 200;
  cfg.replications = 60;
  cfg.bootstrap_replicates = 200;
  cfg.seed = 17;
  const auto one = run_study_level(cfg, 3.0);
  cfg.workers = 3;
  const auto three = run_study_level(cfg, 3.0);
  ASSERT_EQ(one.methods.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(one.methods[j].relative_bias_pct, three.methods[j].relative_bias_pct);
    EXPECT_EQ(one.methods[j].coverage, three.methods[j].coverage);
    cfg.methods = {one.methods[j].method};
    const auto own = run_study_level(cfg, one.methods[j].mean_se);
    EXPECT_NEAR(own.methods[0].relative_bias_pct, 0.0, 1e-9);
  }
}

TEST(EffectTargets, ClosedForms) {
  MetaScenarioConfig cfg;
  const double m0 = std::numbers::ln2 / 0.025;
  cfg.outcome = MetaOutcome::Median;
  EXPECT_NEAR(effect_targets(cfg).theta, m0, 1e-12);
  cfg.tau2 = 4.0;
  EXPECT_NEAR(effect_targets(cfg).theta, m0, 1e-7);
  EXPECT_NEAR(effect_targets(cfg).tau2, 4.0, 1e-6);

  cfg.heterogeneity_scale = HeterogeneityScale::Multiplicative;
  cfg.tau2 = 0.03;
  EXPECT_NEAR(effect_targets(cfg).theta, m0 * std::exp(0.015), 1e-8);
  EXPECT_NEAR(effect_targets(cfg).tau2, m0 * m0 * (std::exp(0.06) - std::exp(0.03)), 1e-6);
  cfg.outcome = MetaOutcome::Difference;
  EXPECT_NEAR(effect_targets(cfg).theta, m0 * (std::exp(0.015) - 1.0), 1e-8);
  cfg.outcome = MetaOutcome::Ratio;
  EXPECT_NEAR(effect_targets(cfg).theta, 0.0, 1e-12);
  EXPECT_NEAR(effect_targets(cfg).tau2, 0.03, 1e-9);

  // Additive law on a ratio: E log(m/m0) with m ~ N(m0, 12) has a second-order
  // expansion -tau2 / (2 m0^2).
  cfg.heterogeneity_scale = HeterogeneityScale::Additive;
  cfg.tau2 = 12.0;
  EXPECT_NEAR(effect_targets(cfg).theta, -6.0 / (m0 * m0), 3e-4);
}

TEST(MetaLevel, SmallRunIsDeterministic) {
  MetaScenarioConfig cfg;
  cfg.outcome = MetaOutcome::Difference;
  cfg.tau2 = 4.0;
  cfg.n_studies = 5;
  cfg.n_lo = 80;
  cfg.n_hi = 200;
  cfg.replications = 12;
  cfg.bootstrap_replicates = 100;
  cfg.benchmark_oracle_reps = 200;
  cfg.seed = 5;
  const auto a = run_meta_level(cfg);
  cfg.workers = 4;
  const auto b = run_meta_level(cfg);
  ASSERT_EQ(a.pipelines.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(a.pipelines[j].used, 12);
    EXPECT_EQ(a.pipelines[j].theta_bias, b.pipelines[j].theta_bias);
    EXPECT_EQ(a.pipelines[j].tau2_bias, b.pipelines[j].tau2_bias);
    EXPECT_FALSE(std::isnan(a.pipelines[j].tau2_coverage));
  }
  EXPECT_EQ(a.mean_paired_difference, b.mean_paired_difference);
  EXPECT_LT(std::fabs(a.mean_paired_difference), 2.0);

  cfg.tau2 = 0.0;
  cfg.benchmark = false;
  const auto common = run_meta_level(cfg);
  ASSERT_EQ(common.pipelines.size(), 1u);
  EXPECT_TRUE(std::isnan(common.pipelines[0].tau2_coverage));
  EXPECT_TRUE(std::isnan(common.mean_paired_difference));
}

TEST(Prop1, ScaledWidthApproachesLimit) {
  Prop1Config cfg;
  cfg.n_grid = {100, 1600};
  cfg.replications = 300;
  cfg.workers = 4;
  const auto rows = prop1_convergence(cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].target, 40.0);
  EXPECT_NEAR(rows[1].mean_scaled_width / 40.0, 1.0, 0.05);
  EXPECT_LT(rows[1].sd_scaled_width, rows[0].sd_scaled_width);

  cfg.alpha = 0.10;
  const auto wider = prop1_convergence(cfg);
  EXPECT_NEAR(wider[1].mean_scaled_width / rows[1].mean_scaled_width, 1.0, 0.05);
}

TEST(Validation, RejectsBadConfigs) {
  ScenarioConfig s;
  s.n = 0;
  EXPECT_THROW(validate(s), Error);
  MetaScenarioConfig m;
  m.n_lo = 500;
  m.n_hi = 100;
  EXPECT_THROW(validate(m), Error);
  m = MetaScenarioConfig{};
  m.tau2 = -1.0;
  EXPECT_THROW(validate(m), Error);
  Prop1Config p;
  p.n_grid = {100, 50};
  EXPECT_THROW(prop1_convergence(p), Error);
}

}  // namespace
