#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "msurv/meta.hpp"
#include "msurv/simulation.hpp"

namespace msurv {

std::string_view version() noexcept;

// ---------------------------------------------------------------------------
// Study summaries

enum class ArmKind { Experimental, Comparator, SingleArm };

std::string_view to_string(ArmKind arm) noexcept;
ArmKind parse_arm(std::string_view text);

/// One reported arm: `study_id,arm,n,median,ci_lower,ci_upper[,level]`.
struct StudyRow {
  std::string study_id;
  ArmKind arm = ArmKind::SingleArm;
  std::int64_t n = 0;
  double median = 0.0;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  double level = 0.95;
  std::size_t line = 0;    // 1-based source line; 0 when not parsed from text
  bool duplicate = false;  // an earlier row has the same (study_id, arm)

  MedianSummary summary() const;
};

/// Parses and validates study rows; throws ParseError (with the line number)
/// for malformed input and InvariantViolation for rows that break
/// ci_lower <= median <= ci_upper.
std::vector<StudyRow> parse_study_csv_text(std::string_view text);
std::vector<StudyRow> parse_study_csv(const std::filesystem::path& path);

void write_study_csv(std::ostream& out, std::span<const StudyRow> rows);

struct OutcomeSelection {
  MetaOutcome outcome = MetaOutcome::Difference;
  ArmKind arm = ArmKind::Comparator;  // single-arm pooling only
  bool dedupe_comparator = false;     // drop repeated identical comparator rows
};

/// Study outcomes on the analysis scale. Two-arm outcomes pair the k-th
/// experimental row of a study with its k-th comparator row (or with its
/// only comparator row).
std::vector<StudyOutcome> build_outcomes(std::span<const StudyRow> rows, const OutcomeSelection& selection);

/// Event-level CSV with header `time,status` (status 1 = event, 0 = censored).
std::vector<EventRecord> parse_event_csv_text(std::string_view text);
std::vector<EventRecord> parse_event_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Scenario configuration (`key = value` lines, `#` comments)

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

ConfigEntries parse_config_text(std::string_view text);

struct CensoringConfig {
  std::string id = "censoring";
  std::vector<AnalyticDistribution> events = {Exponential{0.025}};
  std::vector<AnalyticDistribution> censors = {Uniform{0.0, 100.0}};
  double admin_cutoff = 100.0;
  std::int64_t subjects = 1000000;
  std::uint64_t seed = 1;
};

/// Study-level runs need the true SE: either given (`true_se`) or computed
/// by the Monte Carlo oracle with `oracle_reps` replicates.
struct StudyLevelJob {
  ScenarioConfig scenario;
  std::optional<double> true_se;
};

struct Prop1Job {
  std::string id = "prop1";
  Prop1Config config;
};

using SimulationJob = std::variant<StudyLevelJob, MetaScenarioConfig, CensoringConfig, Prop1Job>;

/// Builds a job from `kind = study | meta | censoring | prop1` and its keys;
/// unknown keys are rejected.
SimulationJob parse_simulation_config(const ConfigEntries& entries);

void set_seed(SimulationJob& job, std::uint64_t seed);
void set_workers(SimulationJob& job, unsigned workers);

/// Every field that influences the results, in canonical text form.
ConfigEntries resolved_config(const SimulationJob& job);

// ---------------------------------------------------------------------------
// Result documents

enum class OutputFormat { Csv, Json };
OutputFormat parse_output_format(std::string_view text);

using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

/// Metadata plus one rectangular table. CSV puts the metadata in leading
/// `# key=value` lines; JSON in a "metadata" object next to "rows". Doubles
/// carry 10 significant digits in both; NaN becomes an empty field / null.
struct Document {
  ConfigEntries metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string render(const Document& doc, OutputFormat format);

/// Number text with 10 significant digits.
std::string format_number(double value);

/// Per-study rows, pooled row, heterogeneity rows and prediction interval.
/// Log-scale analyses are exponentiated in the estimate/lower/upper columns
/// and keep the log-scale values in the log_* columns.
Document meta_document(const MetaResult& result, std::span<const StudyOutcome> per_study,
                       ConfigEntries metadata);

std::string emit_results(const MetaResult& result, std::span<const StudyOutcome> per_study, OutputFormat format,
                         ConfigEntries metadata = {});

/// Runs the job and tabulates its results.
Document run_simulation(const SimulationJob& job);

}  // namespace msurv
