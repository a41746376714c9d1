#include "msurv/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "msurv/error.hpp"
#include "msurv/median_ci.hpp"
#include "msurv/meta.hpp"
#include "msurv/outcomes.hpp"
#include "msurv/parallel.hpp"
#include "msurv/quantiles.hpp"

namespace msurv {

namespace {

// First key of every derived stream; keeps the experiments' streams disjoint.
enum StreamTag : std::uint64_t {
  kTagOracle = 1,
  kTagStudy = 2,
  kTagStudyBootstrap = 3,
  kTagMeta = 4,
  kTagBenchmark = 5,
  kTagBenchmarkCache = 6,
  kTagProp1 = 7,
  kTagProp1Oracle = 8,
  kTagCensoring = 9,
};

constexpr std::int64_t kMaxStudyAttempts = 10000;

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  std::int64_t count = 0;
};

// Two-pass sample moments in input order, so sums never depend on scheduling.
MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  out.count = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) {
    out.mean = out.sd = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    out.sd = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

std::optional<double> km_median(std::span<const EventRecord> records) {
  return km_quantile(km_fit(records), 0.5);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidLevel, "alpha must lie in (0, 1)");
}

}  // namespace

std::string_view to_string(StudyCiMethod method) noexcept {
  switch (method) {
    case StudyCiMethod::BcLog:
      return "bc_log";
    case StudyCiMethod::BcLogLog:
      return "bc_loglog";
    case StudyCiMethod::Bootstrap:
      return "bootstrap";
  }
  return "?";
}

StudyCiMethod parse_study_ci_method(std::string_view text) {
  if (text == "bc_log") return StudyCiMethod::BcLog;
  if (text == "bc_loglog") return StudyCiMethod::BcLogLog;
  if (text == "bootstrap") return StudyCiMethod::Bootstrap;
  fail(ErrorCode::ParseError, "unknown interval method '" + std::string(text) + "'");
}

std::string_view to_string(MetaOutcome outcome) noexcept {
  switch (outcome) {
    case MetaOutcome::Median:
      return "median";
    case MetaOutcome::Difference:
      return "difference";
    case MetaOutcome::Ratio:
      return "ratio";
  }
  return "?";
}

std::string_view to_string(HeterogeneityScale scale) noexcept {
  return scale == HeterogeneityScale::Additive ? "additive" : "multiplicative";
}

MetaOutcome parse_meta_outcome(std::string_view text) {
  if (text == "median") return MetaOutcome::Median;
  if (text == "difference") return MetaOutcome::Difference;
  if (text == "ratio") return MetaOutcome::Ratio;
  fail(ErrorCode::ParseError, "unknown outcome '" + std::string(text) + "'");
}

HeterogeneityScale parse_heterogeneity_scale(std::string_view text) {
  if (text == "additive") return HeterogeneityScale::Additive;
  if (text == "multiplicative") return HeterogeneityScale::Multiplicative;
  fail(ErrorCode::ParseError, "unknown heterogeneity scale '" + std::string(text) + "'");
}

void validate(const ScenarioConfig& cfg) {
  validate(cfg.event_dist);
  validate(cfg.censor_dist);
  check_alpha(cfg.alpha);
  if (!(cfg.admin_cutoff > 0.0)) fail(ErrorCode::InvalidArgument, "admin_cutoff must be positive");
  if (cfg.n < 2) fail(ErrorCode::InvalidArgument, "n must be at least 2");
  if (cfg.replications < 1) fail(ErrorCode::InvalidArgument, "replications must be at least 1");
  if (cfg.bootstrap_replicates < 2) fail(ErrorCode::InvalidArgument, "bootstrap_replicates must be at least 2");
  if (cfg.oracle_reps < 2) fail(ErrorCode::InvalidArgument, "oracle_reps must be at least 2");
  if (cfg.methods.empty()) fail(ErrorCode::InvalidArgument, "no interval methods configured");
}

std::vector<EventRecord> generate_study(const AnalyticDistribution& event_dist,
                                        const AnalyticDistribution& censor_dist, double admin_cutoff, int n,
                                        RngStream& stream) {
  std::vector<EventRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = sample(event_dist, stream);
    const double c = sample(censor_dist, stream);
    const double limit = std::min(c, admin_cutoff);
    records.push_back(t <= limit ? EventRecord{t, EventStatus::Event} : EventRecord{limit, EventStatus::Censored});
  }
  return records;
}

std::vector<EventRecord> generate_study(const ScenarioConfig& cfg, RngStream& stream) {
  return generate_study(cfg.event_dist, cfg.censor_dist, cfg.admin_cutoff, cfg.n, stream);
}

double censoring_rate(const AnalyticDistribution& event_dist, const AnalyticDistribution& censor_dist,
                      double admin_cutoff, std::int64_t subjects, std::uint64_t seed) {
  if (subjects < 1) fail(ErrorCode::InvalidArgument, "censoring_rate needs at least one subject");
  constexpr std::int64_t kBlock = 10000;
  std::int64_t censored = 0;
  for (std::int64_t start = 0, block = 0; start < subjects; start += kBlock, ++block) {
    auto stream = RngStream::derive(seed, {kTagCensoring, static_cast<std::uint64_t>(block)});
    const auto count = static_cast<int>(std::min(kBlock, subjects - start));
    for (const auto& r : generate_study(event_dist, censor_dist, admin_cutoff, count, stream)) {
      censored += r.is_event() ? 0 : 1;
    }
  }
  return static_cast<double>(censored) / static_cast<double>(subjects);
}

TrueSe monte_carlo_true_se(const AnalyticDistribution& event_dist, const AnalyticDistribution& censor_dist,
                           double admin_cutoff, int n, int oracle_reps, std::uint64_t seed, unsigned workers) {
  if (oracle_reps < 2) fail(ErrorCode::InvalidArgument, "oracle_reps must be at least 2");
  std::vector<std::optional<double>> medians(static_cast<std::size_t>(oracle_reps));
  parallel_for(medians.size(), workers, [&](std::size_t r, unsigned) {
    auto stream = RngStream::derive(seed, {kTagOracle, r});
    medians[r] = km_median(generate_study(event_dist, censor_dist, admin_cutoff, n, stream));
  });

  std::vector<double> values;
  std::vector<double> logs;
  values.reserve(medians.size());
  logs.reserve(medians.size());
  TrueSe out;
  for (const auto& m : medians) {
    if (!m) {
      ++out.undefined;
      continue;
    }
    values.push_back(*m);
    logs.push_back(std::log(*m));
  }
  out.used = static_cast<std::int64_t>(values.size());
  if (out.undefined_fraction() > kMaxUndefinedFraction) {
    fail(ErrorCode::UndefinedRateExceeded, "true-SE oracle: " + std::to_string(out.undefined) + " of " +
                                               std::to_string(oracle_reps) + " replicates had no estimable median");
  }
  const auto level = mean_sd(values);
  out.mean = level.mean;
  out.se = level.sd;
  out.se_log = mean_sd(logs).sd;
  return out;
}

TrueSe monte_carlo_true_se(const ScenarioConfig& cfg, int oracle_reps) {
  validate(cfg);
  return monte_carlo_true_se(cfg.event_dist, cfg.censor_dist, cfg.admin_cutoff, cfg.n, oracle_reps, cfg.seed,
                             cfg.workers);
}

StudyInterval study_interval(std::span<const EventRecord> records, StudyCiMethod method, double alpha,
                             int bootstrap_replicates, std::uint64_t bootstrap_seed) {
  const auto curve = km_fit(records);
  StudyInterval out;
  out.median = km_quantile(curve, 0.5);
  if (!out.median) return out;

  MedianCI ci;
  switch (method) {
    case StudyCiMethod::BcLog:
      ci = bc_interval(curve, 0.5, alpha, TransformKind::Log);
      break;
    case StudyCiMethod::BcLogLog:
      ci = bc_interval(curve, 0.5, alpha, TransformKind::LogMinusLog);
      break;
    case StudyCiMethod::Bootstrap:
      try {
        ci = bootstrap_percentile_ci(records, 0.5, alpha, bootstrap_replicates, bootstrap_seed);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UpperUnstable) throw;
        return out;
      }
      break;
  }
  out.lower = ci.lower;
  out.upper = ci.upper;
  return out;
}

StudyLevelResult run_study_level(const ScenarioConfig& cfg, double true_se) {
  validate(cfg);
  if (!(true_se > 0.0)) fail(ErrorCode::InvalidArgument, "true_se must be positive");

  const double z = two_sided_z(cfg.alpha);
  const double truth = true_median(cfg.event_dist);
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t k = cfg.methods.size();

  struct Cell {
    bool undefined = false;
    std::vector<StudyInterval> intervals;
  };
  std::vector<Cell> cells(reps);
  parallel_for(reps, cfg.workers, [&](std::size_t r, unsigned) {
    auto stream = RngStream::derive(cfg.seed, {kTagStudy, r});
    const auto records = generate_study(cfg, stream);
    const auto boot_seed = RngStream::derive(cfg.seed, {kTagStudyBootstrap, r}).next_u64();
    Cell& cell = cells[r];
    for (const auto method : cfg.methods) {
      cell.intervals.push_back(study_interval(records, method, cfg.alpha, cfg.bootstrap_replicates, boot_seed));
      if (!cell.intervals.back().median) {
        cell.undefined = true;
        break;
      }
    }
  });

  StudyLevelResult out;
  out.true_se = true_se;
  out.true_median = truth;
  for (const auto& cell : cells) out.undefined_medians += cell.undefined ? 1 : 0;

  for (std::size_t j = 0; j < k; ++j) {
    MethodBias mb;
    mb.method = cfg.methods[j];
    std::vector<double> ses;
    std::vector<double> rel;
    std::int64_t covered = 0;
    for (const auto& cell : cells) {
      if (cell.undefined) continue;
      const auto& iv = cell.intervals[j];
      if (!iv.bounded()) {
        ++mb.dropped_unbounded;
        continue;
      }
      const double se = (*iv.upper - *iv.lower) / (2.0 * z);
      ses.push_back(se);
      rel.push_back((se - true_se) / true_se * 100.0);
      covered += (*iv.lower <= truth && truth <= *iv.upper) ? 1 : 0;
    }
    const auto s = mean_sd(ses);
    const auto rb = mean_sd(rel);
    mb.used = s.count;
    mb.mean_se = s.mean;
    mb.sd_se = s.sd;
    mb.relative_bias_pct = rb.mean;
    mb.relative_bias_mcse = rb.sd / std::sqrt(static_cast<double>(std::max<std::int64_t>(rb.count, 1)));
    mb.coverage = mb.used == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : static_cast<double>(covered) / static_cast<double>(mb.used);
    out.methods.push_back(mb);
  }
  return out;
}

HeterogeneityScale default_heterogeneity(MetaOutcome outcome) noexcept {
  return outcome == MetaOutcome::Ratio ? HeterogeneityScale::Multiplicative : HeterogeneityScale::Additive;
}

void validate(const MetaScenarioConfig& cfg) {
  check_alpha(cfg.alpha);
  if (!(cfg.tau2 >= 0.0) || !std::isfinite(cfg.tau2)) fail(ErrorCode::InvalidArgument, "tau2 must be >= 0");
  if (cfg.n_studies < 2) fail(ErrorCode::InvalidArgument, "n_studies must be at least 2");
  if (cfg.n_lo < 2 || cfg.n_hi < cfg.n_lo) fail(ErrorCode::InvalidArgument, "need 2 <= n_lo <= n_hi");
  if (!(cfg.base_rate > 0.0)) fail(ErrorCode::InvalidArgument, "base_rate must be positive");
  if (cfg.replications < 1) fail(ErrorCode::InvalidArgument, "replications must be at least 1");
  if (!(cfg.admin_cutoff > 0.0)) fail(ErrorCode::InvalidArgument, "admin_cutoff must be positive");
  if (cfg.censor_options.empty()) fail(ErrorCode::InvalidArgument, "no censoring distributions configured");
  for (const auto& d : cfg.censor_options) validate(d);
  if (cfg.ci_methods.empty()) fail(ErrorCode::InvalidArgument, "no interval methods configured");
  if (cfg.bootstrap_replicates < 2) fail(ErrorCode::InvalidArgument, "bootstrap_replicates must be at least 2");
  if (cfg.benchmark && cfg.benchmark_oracle_reps < 2) {
    fail(ErrorCode::InvalidArgument, "benchmark_oracle_reps must be at least 2");
  }
}

EffectTargets effect_targets(const MetaScenarioConfig& cfg) {
  const double m0 = std::numbers::ln2 / cfg.base_rate;
  auto effect = [&](double m) {
    switch (cfg.outcome) {
      case MetaOutcome::Median:
        return m;
      case MetaOutcome::Difference:
        return m - m0;
      case MetaOutcome::Ratio:
        return std::log(m / m0);
    }
    return m;
  };
  if (cfg.tau2 == 0.0) return {effect(m0), 0.0};

  const double tau = std::sqrt(cfg.tau2);
  const bool additive = cfg.heterogeneity_scale == HeterogeneityScale::Additive;
  auto median_at = [&](double z) { return additive ? m0 + tau * z : m0 * std::exp(tau * z); };

  // Composite Simpson over the standard-normal driver, restricted to positive medians.
  constexpr double kSpan = 12.0;
  constexpr int kIntervals = 40000;
  double lo = -kSpan;
  if (additive) lo = std::max(lo, -m0 / tau + 1e-9);
  const double h = (kSpan - lo) / kIntervals;
  double mass = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double z = lo + h * i;
    const double w = ((i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) *
                     std::exp(-0.5 * z * z);
    const double g = effect(median_at(z));
    mass += w;
    s1 += w * g;
    s2 += w * g * g;
  }
  const double mean = s1 / mass;
  return {mean, std::max(0.0, s2 / mass - mean * mean)};
}

namespace {

struct PipelineDraw {
  double pooled = 0.0;
  bool covers = false;
  double tau2 = 0.0;
  bool tau2_covers = false;
  bool reml_converged = true;
};

struct MetaRep {
  PipelineDraw wald;
  PipelineDraw benchmark;
  std::int64_t study_redraws = 0;
  std::int64_t truncated_redraws = 0;
};

// Benchmark SEs for the reference arm depend only on (n, censoring option),
// so they are computed once per key from a stream derived from that key.
class ReferenceArmCache {
 public:
  ReferenceArmCache(const MetaScenarioConfig& cfg) : cfg_(cfg) {}

  TrueSe get(int n, std::size_t censor_index) {
    const auto key = std::make_pair(n, censor_index);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const auto seed = RngStream::derive(cfg_.seed, {kTagBenchmarkCache, static_cast<std::uint64_t>(n),
                                                    static_cast<std::uint64_t>(censor_index)})
                          .next_u64();
    const auto value = monte_carlo_true_se(Exponential{cfg_.base_rate}, cfg_.censor_options[censor_index],
                                           cfg_.admin_cutoff, n, cfg_.benchmark_oracle_reps, seed);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, value);
    return value;
  }

 private:
  const MetaScenarioConfig& cfg_;
  std::mutex mutex_;
  std::map<std::pair<int, std::size_t>, TrueSe> cache_;
};

PipelineDraw pool_draw(const std::vector<StudyOutcome>& outcomes, const MetaScenarioConfig& cfg,
                       const EffectTargets& targets) {
  PipelineDraw d;
  const bool common = cfg.tau2 == 0.0;
  const auto meta = meta_analyze(outcomes, common ? MetaModel::CommonEffect : MetaModel::RandomEffects, cfg.alpha);
  d.pooled = meta.pooled;
  d.covers = meta.pooled_ci && meta.pooled_ci->lower <= targets.theta && targets.theta <= meta.pooled_ci->upper;
  d.tau2 = meta.tau2;
  d.tau2_covers = meta.tau2_ci && meta.tau2_ci->lower <= targets.tau2 && targets.tau2 <= meta.tau2_ci->upper;
  d.reml_converged = meta.reml_converged;
  return d;
}

MetaRep run_meta_rep(const MetaScenarioConfig& cfg, const EffectTargets& targets, std::size_t rep,
                     ReferenceArmCache& cache) {
  const double m0 = std::numbers::ln2 / cfg.base_rate;
  const double tau = std::sqrt(cfg.tau2);
  const double z = two_sided_z(cfg.alpha);
  const bool two_arm = cfg.outcome != MetaOutcome::Median;

  MetaRep out;
  std::vector<StudyOutcome> wald;
  std::vector<StudyOutcome> bench;
  for (int i = 0; i < cfg.n_studies; ++i) {
    for (std::int64_t attempt = 0;; ++attempt) {
      if (attempt == kMaxStudyAttempts) {
        fail(ErrorCode::UndefinedRateExceeded, "meta simulation: study could not be drawn with a usable interval");
      }
      auto stream = RngStream::derive(cfg.seed, {kTagMeta, rep, static_cast<std::uint64_t>(i),
                                                 static_cast<std::uint64_t>(attempt)});
      const int n = static_cast<int>(stream.uniform_int(cfg.n_lo, cfg.n_hi));
      const double driver = stream.normal();
      const double m_i = cfg.heterogeneity_scale == HeterogeneityScale::Additive ? m0 + tau * driver
                                                                                  : m0 * std::exp(tau * driver);
      if (!(m_i > 0.0)) {
        ++out.truncated_redraws;
        continue;
      }
      const auto censor_index = static_cast<std::size_t>(stream.uniform_index(cfg.censor_options.size()));
      const auto method = cfg.ci_methods[stream.uniform_index(cfg.ci_methods.size())];
      const auto& censor = cfg.censor_options[censor_index];
      const Exponential arm1_dist{std::numbers::ln2 / m_i};

      const auto arm1 = generate_study(arm1_dist, censor, cfg.admin_cutoff, n, stream);
      const auto iv1 = study_interval(arm1, method, cfg.alpha, cfg.bootstrap_replicates, stream.next_u64());
      StudyInterval iv2;
      if (two_arm) {
        const auto arm2 = generate_study(Exponential{cfg.base_rate}, censor, cfg.admin_cutoff, n, stream);
        iv2 = study_interval(arm2, method, cfg.alpha, cfg.bootstrap_replicates, stream.next_u64());
      }
      const bool usable = iv1.bounded() && *iv1.upper > *iv1.lower &&
                          (!two_arm || (iv2.bounded() && *iv2.upper > *iv2.lower));
      if (!usable) {
        ++out.study_redraws;
        continue;
      }

      const ArmEstimate a1{*iv1.median, (*iv1.upper - *iv1.lower) / (2.0 * z)};
      const ArmEstimate a2 = two_arm ? ArmEstimate{*iv2.median, (*iv2.upper - *iv2.lower) / (2.0 * z)}
                                     : ArmEstimate{};
      const std::string id = std::to_string(i + 1);
      switch (cfg.outcome) {
        case MetaOutcome::Median:
          wald.push_back(median_outcome(a1, id));
          break;
        case MetaOutcome::Difference:
          wald.push_back(difference_outcome(a1, a2, id));
          break;
        case MetaOutcome::Ratio:
          wald.push_back(ratio_outcome(a1, a2, id));
          break;
      }

      if (cfg.benchmark) {
        const auto seed1 = RngStream::derive(cfg.seed, {kTagBenchmark, rep, static_cast<std::uint64_t>(i),
                                                        static_cast<std::uint64_t>(attempt)})
                               .next_u64();
        const auto t1 = monte_carlo_true_se(arm1_dist, censor, cfg.admin_cutoff, n, cfg.benchmark_oracle_reps, seed1);
        const TrueSe t2 = two_arm ? cache.get(n, censor_index) : TrueSe{};
        switch (cfg.outcome) {
          case MetaOutcome::Median:
            bench.push_back(median_outcome(ArmEstimate{a1.median, t1.se}, id));
            break;
          case MetaOutcome::Difference:
            bench.push_back(difference_outcome(ArmEstimate{a1.median, t1.se}, ArmEstimate{a2.median, t2.se}, id));
            break;
          case MetaOutcome::Ratio:
            // The delta formula divides by the median, so pass SD(log m) * m.
            bench.push_back(ratio_outcome(ArmEstimate{a1.median, t1.se_log * a1.median},
                                          ArmEstimate{a2.median, t2.se_log * a2.median}, id));
            break;
        }
      }
      break;
    }
  }

  out.wald = pool_draw(wald, cfg, targets);
  if (cfg.benchmark) out.benchmark = pool_draw(bench, cfg, targets);
  return out;
}

PipelineSummary summarize(const std::string& name, const std::vector<MetaRep>& reps,
                          PipelineDraw MetaRep::*member, const EffectTargets& targets, bool random_effects) {
  PipelineSummary s;
  s.pipeline = name;
  std::vector<double> pooled;
  std::vector<double> tau2;
  std::int64_t covered = 0;
  std::int64_t tau2_covered = 0;
  for (const auto& rep : reps) {
    const PipelineDraw& d = rep.*member;
    pooled.push_back(d.pooled);
    tau2.push_back(d.tau2);
    covered += d.covers ? 1 : 0;
    tau2_covered += d.tau2_covers ? 1 : 0;
    s.reml_nonconverged += d.reml_converged ? 0 : 1;
  }
  const auto count = static_cast<double>(reps.size());
  const auto p = mean_sd(pooled);
  s.used = p.count;
  s.theta_bias = p.mean - targets.theta;
  s.theta_se = p.sd;
  s.theta_coverage = static_cast<double>(covered) / count;
  if (random_effects) {
    const auto t = mean_sd(tau2);
    s.tau2_bias = t.mean - targets.tau2;
    s.tau2_se = t.sd;
    s.tau2_coverage = static_cast<double>(tau2_covered) / count;
  }
  return s;
}

}  // namespace

MetaLevelResult run_meta_level(const MetaScenarioConfig& cfg) {
  validate(cfg);
  const auto targets = effect_targets(cfg);
  ReferenceArmCache cache(cfg);
  std::vector<MetaRep> reps(static_cast<std::size_t>(cfg.replications));
  parallel_for(reps.size(), cfg.workers,
               [&](std::size_t r, unsigned) { reps[r] = run_meta_rep(cfg, targets, r, cache); });

  MetaLevelResult out;
  out.targets = targets;
  const bool random_effects = cfg.tau2 > 0.0;
  out.pipelines.push_back(summarize("wald", reps, &MetaRep::wald, targets, random_effects));
  if (cfg.benchmark) {
    out.pipelines.push_back(summarize("benchmark", reps, &MetaRep::benchmark, targets, random_effects));
    std::vector<double> diffs;
    for (const auto& rep : reps) diffs.push_back(rep.wald.pooled - rep.benchmark.pooled);
    out.mean_paired_difference = mean_sd(diffs).mean;
  }
  for (const auto& rep : reps) {
    out.study_redraws += rep.study_redraws;
    out.truncated_redraws += rep.truncated_redraws;
  }
  return out;
}

std::optional<double> analytic_scaled_se(const Prop1Config& cfg) {
  // Without censoring before the median, sqrt(V(m)) = sqrt(S(1-S)) / f(m) = 1/rate.
  const auto* e = std::get_if<Exponential>(&cfg.event_dist);
  const auto* c = std::get_if<PointMass>(&cfg.censor_dist);
  if (e == nullptr || c == nullptr) return std::nullopt;
  const double m = std::numbers::ln2 / e->rate;
  if (!(c->value > m) || !(cfg.admin_cutoff > m)) return std::nullopt;
  return 1.0 / e->rate;
}

std::vector<Prop1Row> prop1_convergence(const Prop1Config& cfg) {
  validate(cfg.event_dist);
  validate(cfg.censor_dist);
  check_alpha(cfg.alpha);
  if (cfg.n_grid.empty()) fail(ErrorCode::InvalidArgument, "n_grid is empty");
  for (std::size_t j = 0; j < cfg.n_grid.size(); ++j) {
    if (cfg.n_grid[j] < 2 || (j > 0 && cfg.n_grid[j] <= cfg.n_grid[j - 1])) {
      fail(ErrorCode::InvalidArgument, "n_grid must be increasing and start at 2 or more");
    }
  }
  if (cfg.replications < 2) fail(ErrorCode::InvalidArgument, "replications must be at least 2");

  const double z = two_sided_z(cfg.alpha);
  const auto analytic = analytic_scaled_se(cfg);
  std::vector<Prop1Row> rows;
  for (const int n : cfg.n_grid) {
    std::vector<std::optional<double>> widths(static_cast<std::size_t>(cfg.replications));
    parallel_for(widths.size(), cfg.workers, [&](std::size_t r, unsigned) {
      auto stream = RngStream::derive(cfg.seed, {kTagProp1, static_cast<std::uint64_t>(n), r});
      const auto records = generate_study(cfg.event_dist, cfg.censor_dist, cfg.admin_cutoff, n, stream);
      const auto ci = bc_interval(km_fit(records), 0.5, cfg.alpha, cfg.transform);
      if (ci.bounded()) widths[r] = std::sqrt(static_cast<double>(n)) * (*ci.upper - *ci.lower) / (2.0 * z);
    });
    Prop1Row row;
    row.n = n;
    std::vector<double> used;
    for (const auto& w : widths) {
      if (w) {
        used.push_back(*w);
      } else {
        ++row.dropped;
      }
    }
    const auto s = mean_sd(used);
    row.used = s.count;
    row.mean_scaled_width = s.mean;
    row.sd_scaled_width = s.sd;
    if (analytic) {
      row.target = *analytic;
    } else {
      const auto seed = RngStream::derive(cfg.seed, {kTagProp1Oracle, static_cast<std::uint64_t>(n)}).next_u64();
      row.target = monte_carlo_true_se(cfg.event_dist, cfg.censor_dist, cfg.admin_cutoff, n, cfg.oracle_reps, seed,
                                       cfg.workers)
                       .se *
                   std::sqrt(static_cast<double>(n));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace msurv
