#include "msurv/median_ci.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msurv/error.hpp"
#include "msurv/parallel.hpp"
#include "msurv/quantiles.hpp"
#include "msurv/rng.hpp"

namespace msurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_open_unit(double value, const char* what) {
  if (!(value > 0.0 && value < 1.0)) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must lie in (0, 1)");
  }
}

// Resamples n-out-of-n from the sample ordered by (time, status), so draws
// do not depend on the input order, and returns the product-limit quantile
// of each resample in O(n) without re-sorting. The survival product uses
// the same operations as km_fit, so results are bit-identical to
// km_quantile(km_fit(resample)).
class ResampleKernel {
 public:
  explicit ResampleKernel(std::span<const EventRecord> records) : n_(records.size()) {
    std::vector<EventRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const EventRecord& a, const EventRecord& b) {
                return a.time < b.time || (a.time == b.time && a.status < b.status);
              });
    group_of_.reserve(n_);
    event_.reserve(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      if (group_times_.empty() || sorted[k].time != group_times_.back()) {
        group_times_.push_back(sorted[k].time);
      }
      group_of_.push_back(group_times_.size() - 1);
      event_.push_back(sorted[k].is_event());
    }
  }

  double quantile(RngStream& rng, double p, std::vector<std::int64_t>& events,
                  std::vector<std::int64_t>& censored) const {
    events.assign(group_times_.size(), 0);
    censored.assign(group_times_.size(), 0);
    for (std::size_t draw = 0; draw < n_; ++draw) {
      const auto j = static_cast<std::size_t>(rng.uniform_index(n_));
      if (event_[j]) {
        ++events[group_of_[j]];
      } else {
        ++censored[group_of_[j]];
      }
    }
    const double target = 1.0 - p + kSurvivalTolerance;
    auto at_risk = static_cast<std::int64_t>(n_);
    double s = 1.0;
    for (std::size_t g = 0; g < group_times_.size(); ++g) {
      const std::int64_t d = events[g];
      if (d > 0) {
        s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
        if (s <= target) return group_times_[g];
      }
      at_risk -= d + censored[g];
    }
    return kInf;
  }

 private:
  std::size_t n_;
  std::vector<double> group_times_;
  std::vector<std::size_t> group_of_;
  std::vector<bool> event_;
};

}  // namespace

std::optional<double> bc_statistic(const SurvivalCurve& curve, std::size_t index, double p,
                                   TransformKind transform) {
  if (index >= curve.size() || !curve.greenwood_defined(index)) return std::nullopt;
  const double s = curve.survival()[index];
  const double root_cumsum = std::sqrt(curve.greenwood_cumsum()[index]);
  const double target = 1.0 - p;
  switch (transform) {
    case TransformKind::Identity:
      if (s <= 0.0) return std::nullopt;
      return std::fabs(s - target) / (s * root_cumsum);
    case TransformKind::Log:
      if (s <= 0.0 || s >= 1.0) return std::nullopt;
      return std::fabs(std::log(s) - std::log(target)) / root_cumsum;
    case TransformKind::LogMinusLog: {
      if (s <= 0.0 || s >= 1.0) return std::nullopt;
      const double log_s = std::log(s);
      return std::fabs(std::log(-log_s) - std::log(-std::log(target))) * std::fabs(log_s) / root_cumsum;
    }
  }
  return std::nullopt;
}

std::vector<BcVerdict> bc_scan(const SurvivalCurve& curve, double p, double alpha,
                               TransformKind transform) {
  require_open_unit(p, "p");
  const double z = two_sided_z(alpha);
  const double target = 1.0 - p;
  std::vector<BcVerdict> verdicts(curve.size(), BcVerdict::Excluded);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto stat = bc_statistic(curve, i, p, transform);
    if (!stat) continue;
    if (*stat <= z) {
      verdicts[i] = BcVerdict::Accepted;
    } else {
      verdicts[i] = curve.survival()[i] > target ? BcVerdict::RejectedHigh : BcVerdict::RejectedLow;
    }
  }
  return verdicts;
}

MedianCI bc_interval(const SurvivalCurve& curve, double p, double alpha, TransformKind transform) {
  if (!curve.has_events()) fail(ErrorCode::NoEvents, "bc_interval: curve has no events");
  const auto verdicts = bc_scan(curve, p, alpha, transform);
  const auto times = curve.event_times();

  MedianCI ci;
  ci.level = 1.0 - alpha;
  ci.method = CiMethod::BrookmeyerCrowley;
  ci.transform = transform;

  const auto first = std::find(verdicts.begin(), verdicts.end(), BcVerdict::Accepted);
  if (first != verdicts.end()) {
    const auto last = std::find(verdicts.rbegin(), verdicts.rend(), BcVerdict::Accepted);
    const auto lo = static_cast<std::size_t>(first - verdicts.begin());
    const auto hi = static_cast<std::size_t>(verdicts.rend() - last) - 1;
    ci.lower = times[lo];
    if (hi + 1 < times.size()) ci.upper = times[hi + 1];
    return ci;
  }

  const auto not_high = std::find_if(verdicts.begin(), verdicts.end(),
                                     [](BcVerdict v) { return v != BcVerdict::RejectedHigh; });
  if (not_high == verdicts.end()) return ci;
  ci.lower = times[static_cast<std::size_t>(not_high - verdicts.begin())];
  const auto low = std::find(not_high, verdicts.end(), BcVerdict::RejectedLow);
  if (low != verdicts.end()) ci.upper = times[static_cast<std::size_t>(low - verdicts.begin())];
  return ci;
}

double type1_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::EmptyInput, "type1_quantile: empty sample");
  const auto count = static_cast<double>(sorted.size());
  // The small offset keeps products such as 0.975 * 1000 from rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil(q * count - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<double> bootstrap_quantiles(std::span<const EventRecord> records, double p, int replicates,
                                        std::uint64_t seed, unsigned workers) {
  if (records.empty()) fail(ErrorCode::EmptyInput, "bootstrap: no records");
  if (replicates < 2) fail(ErrorCode::InvalidArgument, "bootstrap: need at least 2 replicates");
  require_open_unit(p, "p");
  for (const auto& r : records) {
    if (!std::isfinite(r.time) || r.time < 0.0) fail(ErrorCode::InvalidTime, "bootstrap: invalid time");
  }

  const ResampleKernel kernel(records);
  std::vector<double> estimates(static_cast<std::size_t>(replicates));
  const unsigned pool = std::max(1u, workers);
  std::vector<std::vector<std::int64_t>> events(pool), censored(pool);
  parallel_for(estimates.size(), pool, [&](std::size_t b, unsigned w) {
    RngStream rng = RngStream::derive(seed, {static_cast<std::uint64_t>(b)});
    estimates[b] = kernel.quantile(rng, p, events[w], censored[w]);
  });
  return estimates;
}

MedianCI bootstrap_percentile_ci(std::span<const EventRecord> records, double p, double alpha,
                                 int replicates, std::uint64_t seed, unsigned workers) {
  require_open_unit(alpha, "alpha");
  if (std::none_of(records.begin(), records.end(), [](const EventRecord& r) { return r.is_event(); })) {
    fail(ErrorCode::NoEvents, "bootstrap: no replicate can contain an event");
  }
  auto estimates = bootstrap_quantiles(records, p, replicates, seed, workers);
  std::sort(estimates.begin(), estimates.end());

  MedianCI ci;
  ci.level = 1.0 - alpha;
  ci.method = CiMethod::BootstrapPercentile;
  ci.replicates = replicates;
  const double lower = type1_quantile(estimates, alpha / 2.0);
  const double upper = type1_quantile(estimates, 1.0 - alpha / 2.0);
  if (!std::isfinite(upper)) {
    fail(ErrorCode::UpperUnstable, "bootstrap: upper percentile falls on an undefined replicate estimate");
  }
  ci.lower = lower;
  ci.upper = upper;
  return ci;
}

}  // namespace msurv
