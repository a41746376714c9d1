#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msurv/survival.hpp"

namespace msurv {

enum class CiMethod { BrookmeyerCrowley, BootstrapPercentile };

/// Confidence interval for a survival quantile. An empty optional limit is
/// unbounded (the data never rule out later times, or earlier ones).
struct MedianCI {
  std::optional<double> lower;
  std::optional<double> upper;
  double level = 0.95;
  CiMethod method = CiMethod::BrookmeyerCrowley;
  TransformKind transform = TransformKind::LogMinusLog;  // BrookmeyerCrowley only
  int replicates = 0;                                     // BootstrapPercentile only

  bool bounded() const noexcept { return lower.has_value() && upper.has_value(); }
};

/// Outcome of the pointwise test H0: S(t) = 1 - p at one event time.
enum class BcVerdict {
  Accepted,
  RejectedHigh,  // S(t) significantly above 1 - p
  RejectedLow,   // S(t) significantly below 1 - p
  Excluded,      // variance undefined, or S(t) on the boundary of the transform's domain
};

/// Test statistic |g(S) - g(1-p)| / (|g'(S)| * SE(S)) at event time `index`,
/// or nullopt where the point is excluded.
std::optional<double> bc_statistic(const SurvivalCurve& curve, std::size_t index, double p,
                                   TransformKind transform);

/// Verdict at every event time of the curve.
std::vector<BcVerdict> bc_scan(const SurvivalCurve& curve, double p, double alpha,
                               TransformKind transform);

/// Brookmeyer-Crowley interval: lower is the first accepted event time and
/// upper the event time following the last accepted one (interior gaps in
/// the acceptance set are ignored). If no event time is accepted the limits
/// fall back to the first time not rejected as too high and the first later
/// time rejected as too low.
MedianCI bc_interval(const SurvivalCurve& curve, double p, double alpha, TransformKind transform);

/// Replicate quantile estimates (Undefined mapped to +inf), in replicate
/// order. Replicate b resamples with the stream derived from (seed, b).
std::vector<double> bootstrap_quantiles(std::span<const EventRecord> records, double p, int replicates,
                                        std::uint64_t seed, unsigned workers = 1);

/// Percentile bootstrap interval with type-1 (inverse ECDF) empirical
/// quantiles of the replicate estimates.
MedianCI bootstrap_percentile_ci(std::span<const EventRecord> records, double p, double alpha,
                                 int replicates, std::uint64_t seed, unsigned workers = 1);

/// Inverse-ECDF quantile of an ascending sample: the ceil(q*B)-th order statistic.
double type1_quantile(std::span<const double> sorted, double q);

}  // namespace msurv
