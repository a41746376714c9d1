#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "msurv/error.hpp"
#include "msurv/io.hpp"
#include "msurv/median_ci.hpp"
#include "msurv/meta.hpp"

namespace msurv {

namespace {

struct OutputOptions {
  std::string out;
  std::string format;

  OutputFormat resolve() const {
    if (!format.empty()) return parse_output_format(format);
    return std::filesystem::path(out).extension() == ".json" ? OutputFormat::Json : OutputFormat::Csv;
  }
};

void add_output_options(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--out", o.out, "Output file (default: standard output)");
  cmd->add_option("--format", o.format, "csv or json (default: from the --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
}

void write_output(const std::string& text, const OutputOptions& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) fail(ErrorCode::IoError, "cannot write '" + o.out + "'");
  file << text;
  if (!file) fail(ErrorCode::IoError, "write to '" + o.out + "' failed");
}

struct PoolOptions {
  std::string input;
  std::string outcome = "difference";
  std::string model = "random";
  double alpha = 0.05;
  std::string arm = "comparator";
  bool dedupe_comparator = false;
  std::optional<std::uint64_t> seed;
  OutputOptions output;
};

void run_pool(const PoolOptions& o, std::ostream& out) {
  const auto rows = parse_study_csv(o.input);
  OutcomeSelection sel;
  sel.outcome = parse_meta_outcome(o.outcome);
  sel.arm = parse_arm(o.arm);
  sel.dedupe_comparator = o.dedupe_comparator;
  const auto outcomes = build_outcomes(rows, sel);
  const auto model = o.model == "common" ? MetaModel::CommonEffect : MetaModel::RandomEffects;
  const auto result = meta_analyze(outcomes, model, o.alpha);

  std::int64_t duplicates = 0;
  for (const auto& r : rows) duplicates += r.duplicate ? 1 : 0;
  ConfigEntries meta = {{"command", "pool"},
                        {"input", o.input},
                        {"outcome", o.outcome},
                        {"arm", sel.outcome == MetaOutcome::Median ? o.arm : std::string("n/a")},
                        {"dedupe_comparator", o.dedupe_comparator ? "true" : "false"},
                        {"duplicate_rows", std::to_string(duplicates)},
                        {"seed", o.seed ? std::to_string(*o.seed) : std::string("none")}};
  write_output(emit_results(result, outcomes, o.output.resolve(), std::move(meta)), o.output, out);
}

struct KmOptions {
  std::string input;
  double alpha = 0.05;
  double p = 0.5;
  int bootstrap = 1000;
  std::uint64_t seed = 1;
  OutputOptions output;
};

void run_km(const KmOptions& o, std::ostream& out) {
  const auto records = parse_event_csv(o.input);
  const auto curve = km_fit(records);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Document doc;
  doc.metadata = {{"version", std::string(version())}, {"command", "km"},          {"input", o.input},
                  {"alpha", format_number(o.alpha)},  {"p", format_number(o.p)}, {"bootstrap", std::to_string(o.bootstrap)},
                  {"seed", std::to_string(o.seed)},   {"sample_size", std::to_string(curve.sample_size())}};
  doc.columns = {"row_type", "label", "time", "at_risk", "events", "survival", "std_err", "lower", "upper"};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double t = curve.event_times()[i];
    const auto var = greenwood_variance_at(curve, t);
    doc.rows.push_back({std::string("curve"), std::string(), t, curve.at_risk()[i], curve.deaths()[i],
                        curve.survival()[i], var ? std::sqrt(*var) : nan, nan, nan});
  }
  const auto q = km_quantile(curve, o.p);
  doc.rows.push_back({std::string("quantile"), std::string("estimate"), q.value_or(nan), std::monostate{},
                      std::monostate{}, nan, nan, nan, nan});

  auto add_ci = [&](const std::string& label, const MedianCI& ci) {
    const double inf = std::numeric_limits<double>::infinity();
    doc.rows.push_back({std::string("ci"), label, nan, std::monostate{}, std::monostate{}, nan, nan,
                        ci.lower.value_or(-inf), ci.upper.value_or(inf)});
  };
  if (curve.has_events()) {
    for (auto t : {TransformKind::Identity, TransformKind::Log, TransformKind::LogMinusLog}) {
      add_ci("bc_" + std::string(to_string(t)), bc_interval(curve, o.p, o.alpha, t));
    }
    try {
      add_ci("bootstrap", bootstrap_percentile_ci(records, o.p, o.alpha, o.bootstrap, o.seed));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UpperUnstable) throw;
      doc.metadata.emplace_back("bootstrap_status", "upper_unstable");
    }
  }
  write_output(render(doc, o.output.resolve()), o.output, out);
}

struct SimOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  OutputOptions output;
};

void run_sim(const SimOptions& o, bool prop1_only, std::ostream& out) {
  auto entries = parse_config_text(read_text_file(o.config));
  const bool has_kind = std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.first == "kind"; });
  if (prop1_only && !has_kind) entries.insert(entries.begin(), {"kind", "prop1"});
  auto job = parse_simulation_config(entries);
  if (prop1_only && !std::holds_alternative<Prop1Job>(job)) {
    fail(ErrorCode::InvalidArgument, "prop1 expects a config with kind = prop1");
  }
  if (o.seed) set_seed(job, *o.seed);
  set_workers(job, o.workers);
  write_output(render(run_simulation(job), o.output.resolve()), o.output, out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Meta-analysis of median survival times from reported confidence intervals", "msurv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  PoolOptions pool;
  auto* pool_cmd = app.add_subcommand("pool", "Pool study summaries (CSV) with inverse-variance weights");
  pool_cmd->add_option("--input", pool.input, "Study CSV: study_id,arm,n,median,ci_lower,ci_upper[,level]")
      ->required();
  pool_cmd->add_option("--outcome", pool.outcome, "median, difference or ratio")
      ->check(CLI::IsMember({"median", "difference", "ratio"}));
  pool_cmd->add_option("--model", pool.model, "common or random")->check(CLI::IsMember({"common", "random"}));
  pool_cmd->add_option("--alpha", pool.alpha, "1 - confidence level")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  pool_cmd->add_option("--arm", pool.arm, "Arm pooled by --outcome median")
      ->check(CLI::IsMember({"experimental", "comparator", "single"}));
  pool_cmd->add_flag("--dedupe-comparator", pool.dedupe_comparator,
                     "Use repeated identical comparator rows once (median outcome)");
  pool_cmd->add_option("--seed", pool.seed, "Recorded in the output; pooling itself is deterministic");
  add_output_options(pool_cmd, pool.output);

  KmOptions km;
  auto* km_cmd = app.add_subcommand("km", "Kaplan-Meier fit with median confidence intervals from event data");
  km_cmd->add_option("--input", km.input, "Event CSV: time,status (1 = event, 0 = censored)")->required();
  km_cmd->add_option("--alpha", km.alpha, "1 - confidence level")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  km_cmd->add_option("--p", km.p, "Quantile (0.5 = median)")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  km_cmd->add_option("--bootstrap", km.bootstrap, "Bootstrap replicates")->check(CLI::Range(2, 10000000));
  km_cmd->add_option("--seed", km.seed, "Bootstrap seed");
  add_output_options(km_cmd, km.output);

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation scenario from a key = value config");
  sim_cmd->add_option("--config", sim.config, "Scenario config file")->required();
  sim_cmd->add_option("--seed", sim.seed, "Overrides the config seed");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  add_output_options(sim_cmd, sim.output);

  SimOptions prop;
  auto* prop_cmd = app.add_subcommand("prop1", "Convergence of the scaled interval width to sqrt(V(m))");
  prop_cmd->add_option("--config", prop.config, "Config with kind = prop1 (the kind may be omitted)")->required();
  prop_cmd->add_option("--seed", prop.seed, "Overrides the config seed");
  prop_cmd->add_option("--workers", prop.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  add_output_options(prop_cmd, prop.output);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*pool_cmd) run_pool(pool, out);
    if (*km_cmd) run_km(km, out);
    if (*sim_cmd) run_sim(sim, false, out);
    if (*prop_cmd) run_sim(prop, true, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace msurv
