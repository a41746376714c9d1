#include "msurv/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "msurv/error.hpp"
#include "msurv/quantiles.hpp"

namespace msurv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return parts;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& message) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message);
}

double field_number(const std::string& text, std::size_t line, const char* column) {
  try {
    return parse_number(text);
  } catch (const Error&) {
    parse_fail(line, std::string("column '") + column + "' is not a number: '" + text + "'");
  }
}

std::int64_t parse_integer(std::string_view text, const std::string& what) {
  const double v = parse_number(text);
  if (!std::isfinite(v) || v != std::floor(v) || std::fabs(v) > 9.0e15) {
    fail(ErrorCode::ParseError, what + " must be an integer, got '" + std::string(text) + "'");
  }
  return static_cast<std::int64_t>(v);
}

bool parse_bool(std::string_view text, const std::string& what) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail(ErrorCode::ParseError, what + " must be true or false, got '" + std::string(text) + "'");
}

std::uint64_t parse_seed(std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  std::size_t used = 0;
  try {
    v = std::stoull(t, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || t.front() == '-') fail(ErrorCode::ParseError, "seed must be a nonnegative integer");
  return v;
}

}  // namespace

std::string_view version() noexcept { return MSURV_VERSION; }

std::string_view to_string(ArmKind arm) noexcept {
  switch (arm) {
    case ArmKind::Experimental:
      return "experimental";
    case ArmKind::Comparator:
      return "comparator";
    case ArmKind::SingleArm:
      return "single";
  }
  return "?";
}

ArmKind parse_arm(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "experimental") return ArmKind::Experimental;
  if (t == "comparator") return ArmKind::Comparator;
  if (t == "single" || t == "single_arm") return ArmKind::SingleArm;
  fail(ErrorCode::ParseError, "unknown arm '" + std::string(text) + "'");
}

MedianSummary StudyRow::summary() const { return MedianSummary::make(median, ci_lower, ci_upper, level); }

std::vector<StudyRow> parse_study_csv_text(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) fail(ErrorCode::ParseError, "line 1: missing header");

  const auto header = split(lower(lines[header_line]), ',');
  const std::vector<std::string> expected = {"study_id", "arm", "n", "median", "ci_lower", "ci_upper"};
  const bool with_level = header.size() == 7 && header[6] == "level";
  if (!(header.size() == 6 || with_level) || !std::equal(expected.begin(), expected.end(), header.begin())) {
    parse_fail(header_line + 1, "header must be study_id,arm,n,median,ci_lower,ci_upper[,level]");
  }

  std::vector<StudyRow> rows;
  std::set<std::pair<std::string, ArmKind>> seen;
  for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != header.size()) {
      parse_fail(line, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    }
    StudyRow row;
    row.line = line;
    row.study_id = f[0];
    if (row.study_id.empty()) parse_fail(line, "empty study_id");
    try {
      row.arm = parse_arm(f[1]);
    } catch (const Error&) {
      parse_fail(line, "unknown arm '" + f[1] + "'");
    }
    const double n = field_number(f[2], line, "n");
    if (!(n >= 1.0) || n != std::floor(n) || !std::isfinite(n)) parse_fail(line, "n must be a positive integer");
    row.n = static_cast<std::int64_t>(n);
    row.median = field_number(f[3], line, "median");
    if (!f[4].empty()) row.ci_lower = field_number(f[4], line, "ci_lower");
    if (!f[5].empty()) row.ci_upper = field_number(f[5], line, "ci_upper");
    if (with_level && !f[6].empty()) row.level = field_number(f[6], line, "level");

    try {
      (void)row.summary();
    } catch (const Error& e) {
      fail(ErrorCode::InvariantViolation,
           "line " + std::to_string(line) + " (study " + row.study_id + ", " + std::string(to_string(row.arm)) +
               "): " + e.what());
    }
    row.duplicate = !seen.insert({row.study_id, row.arm}).second;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::EmptyInput, "no study rows");
  return rows;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<StudyRow> parse_study_csv(const std::filesystem::path& path) {
  return parse_study_csv_text(read_text_file(path));
}

void write_study_csv(std::ostream& out, std::span<const StudyRow> rows) {
  out << "study_id,arm,n,median,ci_lower,ci_upper,level\n";
  for (const auto& r : rows) {
    out << r.study_id << ',' << to_string(r.arm) << ',' << r.n << ',' << format_number(r.median) << ','
        << (r.ci_lower ? format_number(*r.ci_lower) : "") << ',' << (r.ci_upper ? format_number(*r.ci_upper) : "")
        << ',' << format_number(r.level) << '\n';
  }
}

std::vector<StudyOutcome> build_outcomes(std::span<const StudyRow> rows, const OutcomeSelection& selection) {
  std::vector<StudyOutcome> out;
  auto same_report = [](const StudyRow& a, const StudyRow& b) {
    return a.study_id == b.study_id && a.n == b.n && a.median == b.median && a.ci_lower == b.ci_lower &&
           a.ci_upper == b.ci_upper && a.level == b.level;
  };

  if (selection.outcome == MetaOutcome::Median) {
    std::vector<const StudyRow*> kept;
    for (const auto& r : rows) {
      if (r.arm != selection.arm) continue;
      if (selection.dedupe_comparator && r.arm == ArmKind::Comparator &&
          std::any_of(kept.begin(), kept.end(), [&](const StudyRow* k) { return same_report(*k, r); })) {
        continue;
      }
      kept.push_back(&r);
    }
    for (const auto* r : kept) out.push_back(median_outcome(r->summary(), r->study_id));
    if (out.empty()) fail(ErrorCode::EmptyMeta, "no rows for arm '" + std::string(to_string(selection.arm)) + "'");
    return out;
  }

  // Group by study in order of first appearance.
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<const StudyRow*>, std::vector<const StudyRow*>>> groups;
  for (const auto& r : rows) {
    if (r.arm == ArmKind::SingleArm) continue;
    if (!groups.count(r.study_id)) order.push_back(r.study_id);
    auto& g = groups[r.study_id];
    (r.arm == ArmKind::Experimental ? g.first : g.second).push_back(&r);
  }
  for (const auto& id : order) {
    const auto& [exp, comp] = groups[id];
    if (exp.empty() || comp.empty() || !(comp.size() == exp.size() || comp.size() == 1)) {
      fail(ErrorCode::InvariantViolation, "study " + id + ": cannot pair " + std::to_string(exp.size()) +
                                              " experimental with " + std::to_string(comp.size()) +
                                              " comparator rows");
    }
    for (std::size_t k = 0; k < exp.size(); ++k) {
      const StudyRow& e = *exp[k];
      const StudyRow& c = *comp[comp.size() == 1 ? 0 : k];
      const std::string label = exp.size() > 1 ? id + "#" + std::to_string(k + 1) : id;
      out.push_back(selection.outcome == MetaOutcome::Difference
                        ? difference_outcome(e.summary(), c.summary(), label)
                        : ratio_outcome(e.summary(), c.summary(), label));
    }
  }
  if (out.empty()) fail(ErrorCode::EmptyMeta, "no experimental/comparator pairs");
  return out;
}

std::vector<EventRecord> parse_event_csv_text(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size() || split(lower(lines[header_line]), ',') != std::vector<std::string>{"time", "status"}) {
    parse_fail(header_line + 1, "header must be time,status");
  }
  std::vector<EventRecord> records;
  for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != 2) parse_fail(line, "expected 2 fields");
    const double t = field_number(f[0], line, "time");
    if (!std::isfinite(t) || t < 0.0) parse_fail(line, "time must be finite and nonnegative");
    if (f[1] != "0" && f[1] != "1") parse_fail(line, "status must be 0 or 1");
    records.push_back({t, f[1] == "1" ? EventStatus::Event : EventStatus::Censored});
  }
  if (records.empty()) fail(ErrorCode::EmptyInput, "no event records");
  return records;
}

std::vector<EventRecord> parse_event_csv(const std::filesystem::path& path) {
  return parse_event_csv_text(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Configuration

ConfigEntries parse_config_text(std::string_view text) {
  ConfigEntries entries;
  std::set<std::string> keys;
  std::size_t line_no = 0;
  for (const auto& raw : lines_of(text)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(line_no, "expected key = value");
    std::string key = lower(trim(std::string_view(line).substr(0, eq)));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) parse_fail(line_no, "empty key");
    if (!keys.insert(key).second) parse_fail(line_no, "duplicate key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

namespace {

class KeyReader {
 public:
  explicit KeyReader(const ConfigEntries& entries) {
    for (const auto& [k, v] : entries) values_.emplace(k, v);
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  void finish() const {
    if (!values_.empty()) fail(ErrorCode::ParseError, "unknown config key '" + values_.begin()->first + "'");
  }

  void number(const std::string& key, double& target) {
    if (auto v = take(key)) target = parse_number(*v);
  }
  template <class Int>
  void integer(const std::string& key, Int& target) {
    if (auto v = take(key)) target = static_cast<Int>(parse_integer(*v, key));
  }
  void seed(std::uint64_t& target) {
    if (auto v = take("seed")) target = parse_seed(*v);
  }
  void text(const std::string& key, std::string& target) {
    if (auto v = take(key)) target = *v;
  }
  void distribution(const std::string& key, AnalyticDistribution& target) {
    if (auto v = take(key)) target = parse_distribution(*v);
  }
  void distributions(const std::string& key, std::vector<AnalyticDistribution>& target) {
    if (auto v = take(key)) {
      target.clear();
      for (const auto& part : split(*v, '|')) target.push_back(parse_distribution(part));
    }
  }
  void methods(const std::string& key, std::vector<StudyCiMethod>& target) {
    if (auto v = take(key)) {
      target.clear();
      for (const auto& part : split(*v, ',')) target.push_back(parse_study_ci_method(part));
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

std::string join_distributions(const std::vector<AnalyticDistribution>& ds) {
  std::string s;
  for (std::size_t i = 0; i < ds.size(); ++i) s += (i ? " | " : "") + describe(ds[i]);
  return s;
}

std::string join_methods(const std::vector<StudyCiMethod>& ms) {
  std::string s;
  for (std::size_t i = 0; i < ms.size(); ++i) s += (i ? "," : "") + std::string(to_string(ms[i]));
  return s;
}

}  // namespace

SimulationJob parse_simulation_config(const ConfigEntries& entries) {
  KeyReader r(entries);
  const auto kind = r.take("kind");
  if (!kind) fail(ErrorCode::ParseError, "config needs a 'kind' key (study, meta, censoring or prop1)");

  if (*kind == "study") {
    StudyLevelJob job;
    auto& c = job.scenario;
    r.text("id", c.id);
    r.distribution("event", c.event_dist);
    r.distribution("censor", c.censor_dist);
    r.number("admin_cutoff", c.admin_cutoff);
    r.integer("n", c.n);
    r.integer("replications", c.replications);
    r.methods("methods", c.methods);
    r.number("alpha", c.alpha);
    r.seed(c.seed);
    r.integer("bootstrap_replicates", c.bootstrap_replicates);
    r.integer("oracle_reps", c.oracle_reps);
    if (auto v = r.take("true_se")) job.true_se = parse_number(*v);
    r.finish();
    validate(c);
    return job;
  }
  if (*kind == "meta") {
    MetaScenarioConfig c;
    r.text("id", c.id);
    if (auto v = r.take("outcome")) c.outcome = parse_meta_outcome(*v);
    c.heterogeneity_scale = default_heterogeneity(c.outcome);
    if (auto v = r.take("heterogeneity_scale")) c.heterogeneity_scale = parse_heterogeneity_scale(*v);
    r.number("tau2", c.tau2);
    r.integer("n_studies", c.n_studies);
    r.integer("n_lo", c.n_lo);
    r.integer("n_hi", c.n_hi);
    r.number("base_rate", c.base_rate);
    r.seed(c.seed);
    r.integer("replications", c.replications);
    r.number("alpha", c.alpha);
    r.number("admin_cutoff", c.admin_cutoff);
    r.distributions("censor_options", c.censor_options);
    r.methods("ci_methods", c.ci_methods);
    r.integer("bootstrap_replicates", c.bootstrap_replicates);
    if (auto v = r.take("benchmark")) c.benchmark = parse_bool(*v, "benchmark");
    r.integer("benchmark_oracle_reps", c.benchmark_oracle_reps);
    r.finish();
    validate(c);
    return c;
  }
  if (*kind == "censoring") {
    CensoringConfig c;
    r.text("id", c.id);
    r.distributions("events", c.events);
    r.distributions("censors", c.censors);
    r.number("admin_cutoff", c.admin_cutoff);
    r.integer("subjects", c.subjects);
    r.seed(c.seed);
    r.finish();
    if (c.events.empty() || c.censors.empty()) fail(ErrorCode::InvalidArgument, "empty distribution list");
    if (c.subjects < 1) fail(ErrorCode::InvalidArgument, "subjects must be positive");
    return c;
  }
  if (*kind == "prop1") {
    Prop1Job job;
    auto& c = job.config;
    r.text("id", job.id);
    r.distribution("event", c.event_dist);
    r.distribution("censor", c.censor_dist);
    r.number("admin_cutoff", c.admin_cutoff);
    if (auto v = r.take("n_grid")) {
      c.n_grid.clear();
      for (const auto& part : split(*v, ',')) c.n_grid.push_back(static_cast<int>(parse_integer(part, "n_grid")));
    }
    r.integer("replications", c.replications);
    r.number("alpha", c.alpha);
    if (auto v = r.take("transform")) c.transform = parse_transform(*v);
    r.seed(c.seed);
    r.integer("oracle_reps", c.oracle_reps);
    r.finish();
    return job;
  }
  fail(ErrorCode::ParseError, "unknown kind '" + *kind + "'");
}

void set_seed(SimulationJob& job, std::uint64_t seed) {
  std::visit(overloaded{
                 [&](StudyLevelJob& j) { j.scenario.seed = seed; },
                 [&](MetaScenarioConfig& c) { c.seed = seed; },
                 [&](CensoringConfig& c) { c.seed = seed; },
                 [&](Prop1Job& j) { j.config.seed = seed; },
             },
             job);
}

void set_workers(SimulationJob& job, unsigned workers) {
  std::visit(overloaded{
                 [&](StudyLevelJob& j) { j.scenario.workers = workers; },
                 [&](MetaScenarioConfig& c) { c.workers = workers; },
                 [&](CensoringConfig&) {},
                 [&](Prop1Job& j) { j.config.workers = workers; },
             },
             job);
}

ConfigEntries resolved_config(const SimulationJob& job) {
  return std::visit(
      overloaded{
          [](const StudyLevelJob& j) {
            const auto& c = j.scenario;
            ConfigEntries e = {{"kind", "study"},
                               {"id", c.id},
                               {"event", describe(c.event_dist)},
                               {"censor", describe(c.censor_dist)},
                               {"admin_cutoff", format_number(c.admin_cutoff)},
                               {"n", std::to_string(c.n)},
                               {"replications", std::to_string(c.replications)},
                               {"methods", join_methods(c.methods)},
                               {"alpha", format_number(c.alpha)},
                               {"seed", std::to_string(c.seed)},
                               {"bootstrap_replicates", std::to_string(c.bootstrap_replicates)},
                               {"oracle_reps", std::to_string(c.oracle_reps)}};
            if (j.true_se) e.emplace_back("true_se", format_number(*j.true_se));
            return e;
          },
          [](const MetaScenarioConfig& c) {
            return ConfigEntries{{"kind", "meta"},
                                 {"id", c.id},
                                 {"outcome", std::string(to_string(c.outcome))},
                                 {"heterogeneity_scale", std::string(to_string(c.heterogeneity_scale))},
                                 {"tau2", format_number(c.tau2)},
                                 {"n_studies", std::to_string(c.n_studies)},
                                 {"n_lo", std::to_string(c.n_lo)},
                                 {"n_hi", std::to_string(c.n_hi)},
                                 {"base_rate", format_number(c.base_rate)},
                                 {"seed", std::to_string(c.seed)},
                                 {"replications", std::to_string(c.replications)},
                                 {"alpha", format_number(c.alpha)},
                                 {"admin_cutoff", format_number(c.admin_cutoff)},
                                 {"censor_options", join_distributions(c.censor_options)},
                                 {"ci_methods", join_methods(c.ci_methods)},
                                 {"bootstrap_replicates", std::to_string(c.bootstrap_replicates)},
                                 {"benchmark", c.benchmark ? "true" : "false"},
                                 {"benchmark_oracle_reps", std::to_string(c.benchmark_oracle_reps)}};
          },
          [](const CensoringConfig& c) {
            return ConfigEntries{{"kind", "censoring"},
                                 {"id", c.id},
                                 {"events", join_distributions(c.events)},
                                 {"censors", join_distributions(c.censors)},
                                 {"admin_cutoff", format_number(c.admin_cutoff)},
                                 {"subjects", std::to_string(c.subjects)},
                                 {"seed", std::to_string(c.seed)}};
          },
          [](const Prop1Job& j) {
            const auto& c = j.config;
            std::string grid;
            for (std::size_t i = 0; i < c.n_grid.size(); ++i) grid += (i ? "," : "") + std::to_string(c.n_grid[i]);
            return ConfigEntries{{"kind", "prop1"},
                                 {"id", j.id},
                                 {"event", describe(c.event_dist)},
                                 {"censor", describe(c.censor_dist)},
                                 {"admin_cutoff", format_number(c.admin_cutoff)},
                                 {"n_grid", grid},
                                 {"replications", std::to_string(c.replications)},
                                 {"alpha", format_number(c.alpha)},
                                 {"transform", std::string(to_string(c.transform))},
                                 {"seed", std::to_string(c.seed)},
                                 {"oracle_reps", std::to_string(c.oracle_reps)}};
          },
      },
      job);
}

// ---------------------------------------------------------------------------
// Documents

OutputFormat parse_output_format(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "csv") return OutputFormat::Csv;
  if (t == "json") return OutputFormat::Json;
  fail(ErrorCode::ParseError, "unknown format '" + std::string(text) + "'");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string cell_text(const Cell& cell) {
  return std::visit(overloaded{
                        [](std::monostate) { return std::string(); },
                        [](const std::string& s) { return s; },
                        [](std::int64_t v) { return std::to_string(v); },
                        [](double v) { return format_number(v); },
                    },
                    cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit(overloaded{
                        [](std::monostate) { return nlohmann::ordered_json(nullptr); },
                        [](const std::string& s) { return nlohmann::ordered_json(s); },
                        [](std::int64_t v) { return nlohmann::ordered_json(v); },
                        [](double v) {
                          if (std::isnan(v)) return nlohmann::ordered_json(nullptr);
                          if (std::isinf(v)) return nlohmann::ordered_json(v > 0 ? "inf" : "-inf");
                          // Round through the 10-digit text so both formats agree.
                          return nlohmann::ordered_json(std::stod(format_number(v)));
                        },
                    },
                    cell);
}

}  // namespace

std::string render(const Document& doc, OutputFormat format) {
  if (format == OutputFormat::Json) {
    nlohmann::ordered_json j;
    auto& meta = j["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : doc.metadata) meta[k] = v;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : doc.rows) {
      nlohmann::ordered_json r = nlohmann::ordered_json::object();
      for (std::size_t c = 0; c < doc.columns.size(); ++c) r[doc.columns[c]] = cell_json(row.at(c));
      rows.push_back(std::move(r));
    }
    return j.dump(2) + "\n";
  }
  std::string out;
  for (const auto& [k, v] : doc.metadata) out += "# " + k + "=" + v + "\n";
  for (std::size_t c = 0; c < doc.columns.size(); ++c) out += (c ? "," : "") + csv_field(doc.columns[c]);
  out += "\n";
  for (const auto& row : doc.rows) {
    for (std::size_t c = 0; c < doc.columns.size(); ++c) out += (c ? "," : "") + csv_field(cell_text(row.at(c)));
    out += "\n";
  }
  return out;
}

Document meta_document(const MetaResult& result, std::span<const StudyOutcome> per_study, ConfigEntries metadata) {
  const bool log_scale = result.scale == Scale::Log;
  const double z = two_sided_z(result.alpha);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Document doc;
  doc.metadata = {{"version", std::string(version())},
                  {"model", result.model == MetaModel::CommonEffect ? "common" : "random"},
                  {"scale", log_scale ? "log" : "natural"},
                  {"alpha", format_number(result.alpha)},
                  {"k_studies", std::to_string(result.k_studies)}};
  if (result.model == MetaModel::RandomEffects) {
    doc.metadata.emplace_back("reml_converged", result.reml_converged ? "true" : "false");
    doc.metadata.emplace_back("reml_iterations", std::to_string(result.reml_iterations));
  }
  if (result.degenerate_df) doc.metadata.emplace_back("flag", "degenerate_df");
  if (result.degenerate_hk) doc.metadata.emplace_back("flag", "degenerate_hk");
  for (auto& entry : metadata) doc.metadata.push_back(std::move(entry));

  doc.columns = {"row_type", "label", "estimate", "se", "lower", "upper", "weight_pct",
                 "log_estimate", "log_lower", "log_upper"};

  auto add = [&](const std::string& type, const std::string& label, double est, double se, double lo, double hi,
                 double weight, bool on_analysis_scale) {
    std::vector<Cell> row = {type, label};
    if (log_scale && on_analysis_scale) {
      row.insert(row.end(), {std::exp(est), se, std::exp(lo), std::exp(hi), weight, est, lo, hi});
    } else {
      row.insert(row.end(), {est, se, lo, hi, weight, nan, nan, nan});
    }
    doc.rows.push_back(std::move(row));
  };

  double sum_w = 0.0;
  for (double w : result.weights) sum_w += w;
  for (std::size_t i = 0; i < per_study.size(); ++i) {
    const auto& o = per_study[i];
    const double w = i < result.weights.size() ? 100.0 * result.weights[i] / sum_w : nan;
    add("study", o.study_id, o.estimate, o.se, o.estimate - z * o.se, o.estimate + z * o.se, w, true);
  }
  const Interval ci = result.pooled_ci.value_or(Interval{nan, nan});
  add("pooled", "pooled", result.pooled, result.pooled_se, ci.lower, ci.upper, 100.0, true);
  if (result.prediction_interval) {
    add("prediction", "prediction interval", nan, nan, result.prediction_interval->lower,
        result.prediction_interval->upper, nan, true);
  }
  const Interval tci = result.tau2_ci.value_or(Interval{nan, nan});
  add("tau2", "tau2", result.tau2, nan, tci.lower, tci.upper, nan, false);
  add("q", "Q", result.q_statistic, nan, nan, nan, nan, false);
  add("i2", "I2 (%)", result.i2_percent, nan, nan, nan, nan, false);
  return doc;
}

std::string emit_results(const MetaResult& result, std::span<const StudyOutcome> per_study, OutputFormat format,
                         ConfigEntries metadata) {
  return render(meta_document(result, per_study, std::move(metadata)), format);
}

Document run_simulation(const SimulationJob& job) {
  Document doc;
  doc.metadata.emplace_back("version", std::string(version()));
  for (auto& e : resolved_config(job)) doc.metadata.push_back(std::move(e));

  std::visit(
      overloaded{
          [&](const StudyLevelJob& j) {
            const auto& c = j.scenario;
            double true_se = 0.0;
            if (j.true_se) {
              true_se = *j.true_se;
            } else {
              const auto oracle = monte_carlo_true_se(c, c.oracle_reps);
              true_se = oracle.se;
              doc.metadata.emplace_back("oracle_undefined", std::to_string(oracle.undefined));
            }
            const auto res = run_study_level(c, true_se);
            doc.columns = {"scenario_id", "method", "n", "true_se", "true_median", "relative_bias_pct",
                           "relative_bias_mcse", "mean_se", "sd_se", "coverage", "used", "dropped_unbounded",
                           "undefined_medians"};
            for (const auto& m : res.methods) {
              doc.rows.push_back({c.id, std::string(to_string(m.method)), std::int64_t{c.n}, res.true_se,
                                  res.true_median, m.relative_bias_pct, m.relative_bias_mcse, m.mean_se, m.sd_se,
                                  m.coverage, m.used, m.dropped_unbounded, res.undefined_medians});
            }
          },
          [&](const MetaScenarioConfig& c) {
            const auto res = run_meta_level(c);
            doc.columns = {"scenario_id", "pipeline", "outcome", "tau2", "theta_target", "tau2_target",
                           "theta_bias", "theta_se", "theta_coverage", "tau2_bias", "tau2_se", "tau2_coverage",
                           "used", "reml_nonconverged", "study_redraws", "truncated_redraws"};
            for (const auto& p : res.pipelines) {
              doc.rows.push_back({c.id, p.pipeline, std::string(to_string(c.outcome)), c.tau2, res.targets.theta,
                                  res.targets.tau2, p.theta_bias, p.theta_se, p.theta_coverage, p.tau2_bias,
                                  p.tau2_se, p.tau2_coverage, p.used, p.reml_nonconverged, res.study_redraws,
                                  res.truncated_redraws});
            }
            doc.metadata.emplace_back("mean_paired_difference", format_number(res.mean_paired_difference));
          },
          [&](const CensoringConfig& c) {
            doc.columns = {"scenario_id", "event", "censor", "subjects", "censoring_pct"};
            for (std::size_t i = 0; i < c.events.size(); ++i) {
              for (std::size_t k = 0; k < c.censors.size(); ++k) {
                const auto seed = RngStream::derive(c.seed, {i, k}).next_u64();
                const double rate = censoring_rate(c.events[i], c.censors[k], c.admin_cutoff, c.subjects, seed);
                doc.rows.push_back(
                    {c.id, describe(c.events[i]), describe(c.censors[k]), c.subjects, 100.0 * rate});
              }
            }
          },
          [&](const Prop1Job& j) {
            doc.columns = {"scenario_id", "n", "mean_scaled_width", "sd_scaled_width", "target",
                           "relative_deviation", "used", "dropped"};
            for (const auto& row : prop1_convergence(j.config)) {
              doc.rows.push_back({j.id, std::int64_t{row.n}, row.mean_scaled_width, row.sd_scaled_width,
                                  row.target, std::fabs(row.mean_scaled_width - row.target) / row.target, row.used,
                                  row.dropped});
            }
          },
      },
      job);
  return doc;
}

}  // namespace msurv
