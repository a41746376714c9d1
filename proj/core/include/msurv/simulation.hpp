#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msurv/distributions.hpp"
#include "msurv/rng.hpp"
#include "msurv/survival.hpp"

namespace msurv {

/// Interval types a simulated study may report.
enum class StudyCiMethod { BcLog, BcLogLog, Bootstrap };

std::string_view to_string(StudyCiMethod method) noexcept;
StudyCiMethod parse_study_ci_method(std::string_view text);

inline const std::vector<StudyCiMethod> kAllStudyCiMethods = {StudyCiMethod::BcLog, StudyCiMethod::BcLogLog,
                                                              StudyCiMethod::Bootstrap};

/// One-arm data generating mechanism plus the study-level experiment settings.
struct ScenarioConfig {
  std::string id = "scenario";
  AnalyticDistribution event_dist = Exponential{0.025};
  AnalyticDistribution censor_dist = Uniform{0.0, 100.0};
  double admin_cutoff = 100.0;
  int n = 1000;
  int replications = 1000;
  std::vector<StudyCiMethod> methods = kAllStudyCiMethods;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int bootstrap_replicates = 1000;
  int oracle_reps = 100000;
  unsigned workers = 1;  // never affects results
};

void validate(const ScenarioConfig& cfg);

/// n subjects: T from event_dist, then C from censor_dist; observed time
/// min(T, C, cutoff), an event iff T <= min(C, cutoff).
std::vector<EventRecord> generate_study(const AnalyticDistribution& event_dist,
                                        const AnalyticDistribution& censor_dist, double admin_cutoff, int n,
                                        RngStream& stream);
std::vector<EventRecord> generate_study(const ScenarioConfig& cfg, RngStream& stream);

/// Fraction of censored subjects among `subjects` draws.
double censoring_rate(const AnalyticDistribution& event_dist, const AnalyticDistribution& censor_dist,
                      double admin_cutoff, std::int64_t subjects, std::uint64_t seed);

struct TrueSe {
  double se = 0.0;      // SD of the KM median over defined replicates
  double se_log = 0.0;  // SD of its logarithm
  double mean = 0.0;
  std::int64_t used = 0;
  std::int64_t undefined = 0;
  double undefined_fraction() const noexcept {
    const auto total = used + undefined;
    return total == 0 ? 0.0 : static_cast<double>(undefined) / static_cast<double>(total);
  }
};

inline constexpr double kMaxUndefinedFraction = 0.01;

/// Monte Carlo sampling distribution of the KM median. Replicate r uses the
/// stream derived from (seed, r). Throws UndefinedRateExceeded when more than
/// 1% of the replicates have no estimable median.
TrueSe monte_carlo_true_se(const AnalyticDistribution& event_dist, const AnalyticDistribution& censor_dist,
                           double admin_cutoff, int n, int oracle_reps, std::uint64_t seed, unsigned workers = 1);
TrueSe monte_carlo_true_se(const ScenarioConfig& cfg, int oracle_reps);

/// Median interval of the requested type for one data set.
struct StudyInterval {
  std::optional<double> median;
  std::optional<double> lower;
  std::optional<double> upper;
  bool bounded() const noexcept { return median && lower && upper; }
};

StudyInterval study_interval(std::span<const EventRecord> records, StudyCiMethod method, double alpha,
                             int bootstrap_replicates, std::uint64_t bootstrap_seed);

struct MethodBias {
  StudyCiMethod method = StudyCiMethod::BcLog;
  double relative_bias_pct = 0.0;   // mean of (SE_hat - SE) / SE * 100
  double relative_bias_mcse = 0.0;  // Monte Carlo standard error of that mean
  double mean_se = 0.0;
  double sd_se = 0.0;
  double coverage = 0.0;  // share of intervals containing the true median
  std::int64_t used = 0;
  std::int64_t dropped_unbounded = 0;
};

struct StudyLevelResult {
  double true_se = 0.0;
  double true_median = 0.0;
  std::int64_t undefined_medians = 0;
  std::vector<MethodBias> methods;
};

/// Relative bias of the Wald standard error for each configured interval type.
StudyLevelResult run_study_level(const ScenarioConfig& cfg, double true_se);

enum class MetaOutcome { Median, Difference, Ratio };
enum class HeterogeneityScale { Additive, Multiplicative };

std::string_view to_string(MetaOutcome outcome) noexcept;
std::string_view to_string(HeterogeneityScale scale) noexcept;
MetaOutcome parse_meta_outcome(std::string_view text);
HeterogeneityScale parse_heterogeneity_scale(std::string_view text);

/// Meta-analytic experiment. Study i has sample size n_i ~ U{n_lo..n_hi}
/// per arm; arm 1 is exponential with median m_i, arm 2 (two-arm outcomes)
/// is exponential with the base rate. Under the additive law m_i ~ N(m0,
/// tau2) truncated to (0, inf); under the multiplicative law log(m_i / m0) ~
/// N(0, tau2), with m0 = log 2 / base_rate.
struct MetaScenarioConfig {
  std::string id = "meta";
  MetaOutcome outcome = MetaOutcome::Median;
  double tau2 = 0.0;
  int n_studies = 20;
  int n_lo = 50;
  int n_hi = 1000;
  double base_rate = 0.025;
  HeterogeneityScale heterogeneity_scale = HeterogeneityScale::Additive;
  std::uint64_t seed = 1;
  int replications = 1000;
  double alpha = 0.05;
  double admin_cutoff = 100.0;
  std::vector<AnalyticDistribution> censor_options = {Uniform{0.0, 100.0}, Exponential{1.0 / 60.0}};
  std::vector<StudyCiMethod> ci_methods = kAllStudyCiMethods;
  int bootstrap_replicates = 1000;
  bool benchmark = true;
  int benchmark_oracle_reps = 1000;
  unsigned workers = 1;  // never affects results
};

void validate(const MetaScenarioConfig& cfg);

/// Natural heterogeneity law of each outcome: additive for medians and
/// differences, multiplicative for ratios.
HeterogeneityScale default_heterogeneity(MetaOutcome outcome) noexcept;

/// Mean and variance of the true study effects on the analysis scale.
struct EffectTargets {
  double theta = 0.0;
  double tau2 = 0.0;
};

EffectTargets effect_targets(const MetaScenarioConfig& cfg);

struct PipelineSummary {
  std::string pipeline;  // "wald" or "benchmark"
  std::int64_t used = 0;
  double theta_bias = 0.0;
  double theta_se = 0.0;
  double theta_coverage = 0.0;
  // NaN under the common-effect model, which estimates no tau^2.
  double tau2_bias = std::numeric_limits<double>::quiet_NaN();
  double tau2_se = std::numeric_limits<double>::quiet_NaN();
  double tau2_coverage = std::numeric_limits<double>::quiet_NaN();
  std::int64_t reml_nonconverged = 0;
};

struct MetaLevelResult {
  EffectTargets targets;
  std::vector<PipelineSummary> pipelines;
  std::int64_t study_redraws = 0;  // studies regenerated for an undefined median or unusable interval
  std::int64_t truncated_redraws = 0;  // effect draws rejected for a nonpositive median
  double mean_paired_difference = std::numeric_limits<double>::quiet_NaN();  // wald - benchmark pooled
};

MetaLevelResult run_meta_level(const MetaScenarioConfig& cfg);

struct Prop1Config {
  AnalyticDistribution event_dist = Exponential{0.025};
  AnalyticDistribution censor_dist = PointMass{};
  double admin_cutoff = std::numeric_limits<double>::infinity();
  std::vector<int> n_grid = {250, 1000, 4000};
  int replications = 1000;
  double alpha = 0.05;
  TransformKind transform = TransformKind::LogMinusLog;
  std::uint64_t seed = 1;
  int oracle_reps = 10000;  // used only when no closed-form limit exists
  unsigned workers = 1;
};

struct Prop1Row {
  int n = 0;
  double mean_scaled_width = 0.0;  // mean of sqrt(n) (U - L) / (2 z)
  double sd_scaled_width = 0.0;
  double target = 0.0;             // sqrt(V(m))
  std::int64_t used = 0;
  std::int64_t dropped = 0;
};

/// Analytic sqrt(V(m)) when it has a closed form (uncensored exponential: 1/rate).
std::optional<double> analytic_scaled_se(const Prop1Config& cfg);

std::vector<Prop1Row> prop1_convergence(const Prop1Config& cfg);

}  // namespace msurv
