#include "msurv/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msurv/error.hpp"
#include "msurv/quantiles.hpp"

namespace msurv {

std::string_view to_string(TransformKind kind) noexcept {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::Log: return "log";
    case TransformKind::LogMinusLog: return "loglog";
  }
  return "unknown";
}

TransformKind parse_transform(std::string_view text) {
  if (text == "identity" || text == "plain") return TransformKind::Identity;
  if (text == "log") return TransformKind::Log;
  if (text == "loglog" || text == "log-log" || text == "log-minus-log") {
    return TransformKind::LogMinusLog;
  }
  fail(ErrorCode::InvalidArgument, "unknown transform '" + std::string(text) + "'");
}

bool SurvivalCurve::greenwood_defined(std::size_t index) const {
  return index < greenwood_.size() && std::isfinite(greenwood_[index]);
}

std::size_t SurvivalCurve::steps_through(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

SurvivalCurve km_fit(std::span<const EventRecord> records) {
  if (records.empty()) fail(ErrorCode::EmptyInput, "km_fit: no records");
  for (const auto& r : records) {
    if (!std::isfinite(r.time) || r.time < 0.0) {
      fail(ErrorCode::InvalidTime, "km_fit: time " + std::to_string(r.time) + " is negative or non-finite");
    }
  }

  std::vector<EventRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });

  SurvivalCurve curve;
  curve.sample_size_ = sorted.size();

  const auto n = static_cast<std::int64_t>(sorted.size());
  std::int64_t at_risk = n;
  double s = 1.0;
  double cumsum = 0.0;
  std::size_t k = 0;
  while (k < sorted.size()) {
    const double t = sorted[k].time;
    std::int64_t d = 0;
    std::int64_t c = 0;
    for (; k < sorted.size() && sorted[k].time == t; ++k) {
      if (sorted[k].is_event()) {
        ++d;
      } else {
        ++c;
      }
    }
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      if (at_risk == d) {
        cumsum = std::numeric_limits<double>::infinity();
      } else {
        cumsum += static_cast<double>(d) /
                  (static_cast<double>(at_risk) * static_cast<double>(at_risk - d));
      }
      curve.times_.push_back(t);
      curve.deaths_.push_back(d);
      curve.at_risk_.push_back(at_risk);
      curve.survival_.push_back(s);
      curve.greenwood_.push_back(cumsum);
    }
    at_risk -= d + c;
  }
  return curve;
}

double survival_at(const SurvivalCurve& curve, double t) {
  const std::size_t steps = curve.steps_through(t);
  return steps == 0 ? 1.0 : curve.survival()[steps - 1];
}

std::optional<double> greenwood_variance_at(const SurvivalCurve& curve, double t) {
  const std::size_t steps = curve.steps_through(t);
  if (steps == 0) return 0.0;
  if (!curve.greenwood_defined(steps - 1)) return std::nullopt;
  const double s = curve.survival()[steps - 1];
  return s * s * curve.greenwood_cumsum()[steps - 1];
}

std::optional<double> km_quantile(const SurvivalCurve& curve, double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "km_quantile: p must lie in (0, 1)");
  const double target = 1.0 - p + kSurvivalTolerance;
  const auto s = curve.survival();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] <= target) return curve.event_times()[i];
  }
  return std::nullopt;
}

Interval transformed_survival_ci(double survival, double se, double alpha, TransformKind transform) {
  if (!(survival >= 0.0 && survival <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "survival estimate must lie in [0, 1]");
  }
  if (!(se >= 0.0) || !std::isfinite(se)) fail(ErrorCode::UndefinedVariance, "standard error is undefined");
  if (transform != TransformKind::Identity && (survival <= 0.0 || survival >= 1.0)) {
    fail(ErrorCode::BoundaryValue, "survival estimate on the boundary of the transform's domain");
  }
  const double z = two_sided_z(alpha);
  if (se == 0.0) return {survival, survival};

  switch (transform) {
    case TransformKind::Identity:
      return {std::clamp(survival - z * se, 0.0, 1.0), std::clamp(survival + z * se, 0.0, 1.0)};
    case TransformKind::Log:
    case TransformKind::LogMinusLog:
      if (survival <= 0.0 || survival >= 1.0) {
        fail(ErrorCode::BoundaryValue, "log-scale intervals need 0 < S < 1");
      }
      break;
  }
  if (transform == TransformKind::Log) {
    const double half = z * se / survival;
    return {survival * std::exp(-half), survival * std::exp(half)};
  }
  const double half = z * se / (survival * std::log(survival));
  const double a = std::pow(survival, std::exp(half));
  const double b = std::pow(survival, std::exp(-half));
  return {std::min(a, b), std::max(a, b)};
}

Interval survival_ci_at(const SurvivalCurve& curve, double t, double alpha, TransformKind transform) {
  const auto variance = greenwood_variance_at(curve, t);
  if (!variance) fail(ErrorCode::UndefinedVariance, "Greenwood variance undefined at t");
  return transformed_survival_ci(survival_at(curve, t), std::sqrt(*variance), alpha, transform);
}

}  // namespace msurv
