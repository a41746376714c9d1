#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace msurv {

enum class EventStatus : std::uint8_t { Censored = 0, Event = 1 };

/// One right-censored observation: observed time min(T, C) and whether the
/// event was observed.
struct EventRecord {
  double time = 0.0;
  EventStatus status = EventStatus::Event;

  bool is_event() const noexcept { return status == EventStatus::Event; }
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Transform g applied to S(t) before forming Wald-type statements about it.
enum class TransformKind { Identity, Log, LogMinusLog };

std::string_view to_string(TransformKind kind) noexcept;
TransformKind parse_transform(std::string_view text);

/// Closed interval with possibly infinite endpoints.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Kaplan-Meier product-limit fit.
///
/// Stores one entry per distinct event time. `greenwood_cumsum()[i]` is the
/// running sum of d/(n(n-d)) through event time i; it is +infinity from the
/// first time at which everyone at risk fails (n == d), and the Greenwood
/// variance is undefined there.
class SurvivalCurve {
 public:
  std::span<const double> event_times() const noexcept { return times_; }
  std::span<const std::int64_t> deaths() const noexcept { return deaths_; }
  std::span<const std::int64_t> at_risk() const noexcept { return at_risk_; }
  std::span<const double> survival() const noexcept { return survival_; }
  std::span<const double> greenwood_cumsum() const noexcept { return greenwood_; }

  std::size_t sample_size() const noexcept { return sample_size_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool has_events() const noexcept { return !times_.empty(); }

  bool greenwood_defined(std::size_t index) const;

  /// Number of event times <= t; 0 means t precedes the first event.
  std::size_t steps_through(double t) const;

 private:
  friend SurvivalCurve km_fit(std::span<const EventRecord> records);

  std::vector<double> times_;
  std::vector<std::int64_t> deaths_;
  std::vector<std::int64_t> at_risk_;
  std::vector<double> survival_;
  std::vector<double> greenwood_;
  std::size_t sample_size_ = 0;
};

/// Fits the product-limit estimator. Censored observations tied with an event
/// time remain at risk for that event.
SurvivalCurve km_fit(std::span<const EventRecord> records);

/// Right-continuous step evaluation of the fitted survival function.
double survival_at(const SurvivalCurve& curve, double t);

/// Greenwood variance S(t)^2 * sum d/(n(n-d)); nullopt when undefined.
std::optional<double> greenwood_variance_at(const SurvivalCurve& curve, double t);

/// inf{t : S(t) <= 1 - p}; nullopt when the curve never gets there.
///
/// Survival values within 1e-12 of 1 - p count as reaching it, so products
/// such as (3/4)(2/3) that equal 1/2 exactly in real arithmetic are not
/// missed because of rounding.
std::optional<double> km_quantile(const SurvivalCurve& curve, double p);

/// Pointwise confidence interval for S given the estimate and its standard
/// error, on the Identity, Log or LogMinusLog scale. The Log scales need
/// 0 < S < 1 (BoundaryValue otherwise).
Interval transformed_survival_ci(double survival, double se, double alpha, TransformKind transform);

/// Pointwise confidence interval for S(t) from the fitted curve.
Interval survival_ci_at(const SurvivalCurve& curve, double t, double alpha, TransformKind transform);

/// Tolerance used when comparing survival values against 1 - p.
inline constexpr double kSurvivalTolerance = 1e-12;

}  // namespace msurv
