#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "msurv/error.hpp"
#include "msurv/io.hpp"

namespace {

using namespace msurv;

const std::string kData = MSURV_DATA_DIR "/nsclc_os.csv";

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "msurv");
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("msurv_test_" + name);
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

// Parses CSV body rows (after metadata and header) into fields.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    rows.push_back(fields);
  }
  return rows;
}

TEST(StudyCsv, FirstRowAndDefaults) {
  const auto rows = parse_study_csv_text(
      "study_id,arm,n,median,ci_lower,ci_upper\nNCT00946712,experimental,656,10.90,9.50,12.00\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].study_id, "NCT00946712");
  EXPECT_EQ(rows[0].arm, ArmKind::Experimental);
  EXPECT_EQ(rows[0].n, 656);
  EXPECT_EQ(rows[0].median, 10.90);
  EXPECT_EQ(*rows[0].ci_lower, 9.50);
  EXPECT_EQ(*rows[0].ci_upper, 12.00);
  EXPECT_EQ(rows[0].level, 0.95);
  EXPECT_EQ(rows[0].line, 2u);
}

TEST(StudyCsv, MissingUpperRoutesOneSided) {
  const auto rows = parse_study_csv_text("study_id,arm,n,median,ci_lower,ci_upper\nA,single,100,27.6,17.4,\n");
  EXPECT_FALSE(rows[0].ci_upper.has_value());
  EXPECT_NEAR(median_outcome(rows[0].summary()).se, 5.204177, 1e-6);
}

TEST(StudyCsv, Errors) {
  EXPECT_EQ(code_of([] { parse_study_csv_text("study_id,arm,n,median,ci_lower,ci_upper\nA,comparator,10,5,6,7\n"); }),
            ErrorCode::InvariantViolation);
  try {
    parse_study_csv_text("study_id,arm,n,median,ci_lower,ci_upper\nA,comparator,10,5,4,7\nB,comparator,x,5,4,7\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_study_csv_text("id,arm,n\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_study_csv_text("study_id,arm,n,median,ci_lower,ci_upper\nA,placebo,10,5,4,7\n"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_study_csv("/nonexistent/file.csv"); }), ErrorCode::IoError);
}

TEST(StudyCsv, ApplicationDataAndDuplicates) {
  const auto rows = parse_study_csv(kData);
  EXPECT_EQ(rows.size(), 60u);
  int duplicates = 0;
  for (const auto& r : rows) duplicates += r.duplicate ? 1 : 0;
  EXPECT_GT(duplicates, 0);
  OutcomeSelection sel;
  sel.outcome = MetaOutcome::Median;
  EXPECT_EQ(build_outcomes(rows, sel).size(), 30u);
  sel.dedupe_comparator = true;
  EXPECT_EQ(build_outcomes(rows, sel).size(), 29u);
  sel.outcome = MetaOutcome::Difference;
  EXPECT_EQ(build_outcomes(rows, sel).size(), 30u);
}

TEST(StudyCsv, RoundTrip) {
  const auto rows = parse_study_csv(kData);
  std::ostringstream out;
  write_study_csv(out, rows);
  const auto again = parse_study_csv_text(out.str());
  ASSERT_EQ(again.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(again[i].study_id, rows[i].study_id);
    EXPECT_EQ(again[i].arm, rows[i].arm);
    EXPECT_EQ(again[i].n, rows[i].n);
    EXPECT_EQ(again[i].median, rows[i].median);
    EXPECT_EQ(again[i].ci_lower, rows[i].ci_lower);
    EXPECT_EQ(again[i].ci_upper, rows[i].ci_upper);
    EXPECT_EQ(again[i].level, rows[i].level);
    EXPECT_EQ(again[i].duplicate, rows[i].duplicate);
  }
}

TEST(Pairing, MultipleExperimentalRows) {
  const auto rows = parse_study_csv_text(
      "study_id,arm,n,median,ci_lower,ci_upper\n"
      "S,experimental,100,12,10,14\nS,experimental,100,13,11,15\nS,comparator,100,10,9,11\n");
  OutcomeSelection sel;
  const auto out = build_outcomes(rows, sel);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].study_id, "S#1");
  EXPECT_EQ(out[1].estimate, 3.0);
  const auto unpaired = parse_study_csv_text("study_id,arm,n,median,ci_lower,ci_upper\nS,experimental,100,12,10,14\n");
  EXPECT_EQ(code_of([&] { build_outcomes(unpaired, sel); }), ErrorCode::InvariantViolation);
}

TEST(EventCsv, Parse) {
  const auto r = parse_event_csv_text("time,status\n1.5,1\n2,0\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1].status, EventStatus::Censored);
  EXPECT_EQ(code_of([] { parse_event_csv_text("time,status\n1,2\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_event_csv_text("time,status\n-1,1\n"); }), ErrorCode::ParseError);
}

TEST(Config, ParseAndResolve) {
  const auto entries = parse_config_text("# comment\nkind = study\nn = 50 # inline\nevent = weibull(2,35)\n");
  const auto job = parse_simulation_config(entries);
  const auto& study = std::get<StudyLevelJob>(job);
  EXPECT_EQ(study.scenario.n, 50);
  EXPECT_DOUBLE_EQ(std::get<Weibull>(study.scenario.event_dist).scale, 35.0);
  const auto resolved = resolved_config(job);
  bool saw_seed = false;
  for (const auto& [k, v] : resolved) {
    saw_seed |= k == "seed";
    EXPECT_NE(k, "workers");
  }
  EXPECT_TRUE(saw_seed);
  // The resolved form parses back to the same job.
  EXPECT_EQ(resolved_config(parse_simulation_config(resolved)), resolved);

  EXPECT_EQ(code_of([] { parse_config_text("a = 1\na = 2\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_simulation_config(parse_config_text("kind = study\nbogus = 1\n")); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_simulation_config(parse_config_text("n = 5\n")); }), ErrorCode::ParseError);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& entry : std::filesystem::directory_iterator(MSURV_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    const auto job = parse_simulation_config(parse_config_text(read_text_file(entry.path())));
    EXPECT_EQ(resolved_config(parse_simulation_config(resolved_config(job))), resolved_config(job))
        << entry.path();
  }
}

TEST(Config, MetaDefaultsFollowOutcome) {
  const auto job = parse_simulation_config(parse_config_text("kind = meta\noutcome = ratio\ntau2 = 0.01\n"));
  EXPECT_EQ(std::get<MetaScenarioConfig>(job).heterogeneity_scale, HeterogeneityScale::Multiplicative);
}

TEST(Emit, SingleStudyPassthrough) {
  const std::vector<StudyOutcome> one = {{10, 2, Scale::Natural, "only", false}};
  const auto result = meta_analyze(one, MetaModel::CommonEffect, 0.05);
  const auto doc = meta_document(result, one, {});
  ASSERT_GE(doc.rows.size(), 2u);
  EXPECT_EQ(std::get<std::string>(doc.rows[0][0]), "study");
  EXPECT_EQ(std::get<std::string>(doc.rows[1][0]), "pooled");
  EXPECT_EQ(std::get<double>(doc.rows[1][2]), 10.0);
  EXPECT_EQ(std::get<double>(doc.rows[1][3]), 2.0);
}

TEST(Emit, CsvJsonParity) {
  const auto rows = parse_study_csv(kData);
  OutcomeSelection sel;
  sel.outcome = MetaOutcome::Ratio;
  const auto outcomes = build_outcomes(rows, sel);
  const auto result = meta_analyze(outcomes, MetaModel::RandomEffects, 0.05);
  const auto csv = csv_rows(emit_results(result, outcomes, OutputFormat::Csv));
  const auto json = nlohmann::json::parse(emit_results(result, outcomes, OutputFormat::Json));
  const auto doc = meta_document(result, outcomes, {});
  ASSERT_EQ(csv.size(), json["rows"].size());
  for (std::size_t i = 0; i < csv.size(); ++i) {
    for (std::size_t c = 0; c < doc.columns.size(); ++c) {
      const auto& j = json["rows"][i][doc.columns[c]];
      if (j.is_number()) {
        EXPECT_EQ(std::stod(csv[i][c]), j.get<double>());
      } else if (j.is_null()) {
        EXPECT_TRUE(csv[i][c].empty());
      } else {
        EXPECT_EQ(csv[i][c], j.get<std::string>());
      }
    }
  }
  EXPECT_EQ(json["metadata"]["version"], std::string(version()));
}

TEST(Emit, FormatNumber) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1234567890123), "0.123456789");
  EXPECT_EQ(std::stod(format_number(12.81093456789)), 12.81093457);
}

TEST(Cli, UsageErrors) {
  const auto missing = cli({"pool"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("--input"), std::string::npos);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"pool", "--input", "/nonexistent.csv"}).code, 2);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST(Cli, PoolRatio) {
  const auto r = cli({"pool", "--input", kData, "--outcome", "ratio", "--model", "random", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  bool found = false;
  for (const auto& row : j["rows"]) {
    if (row["row_type"] != "pooled") continue;
    found = true;
    EXPECT_NEAR(row["estimate"].get<double>(), 1.11, 0.01);
    EXPECT_NEAR(row["lower"].get<double>(), 1.04, 0.01);
    EXPECT_NEAR(row["upper"].get<double>(), 1.20, 0.01);
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(j["metadata"]["outcome"], "ratio");
}

TEST(Cli, Km) {
  const auto path = temp_file("events.csv", "time,status\n1,1\n2,0\n3,1\n4,1\n5,1\n6,0\n7,1\n8,1\n9,1\n10,0\n");
  const auto r = cli({"km", "--input", path.string(), "--bootstrap", "200", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("bc_loglog"), std::string::npos);
  EXPECT_NE(r.out.find("quantile"), std::string::npos);
  EXPECT_EQ(r.out, cli({"km", "--input", path.string(), "--bootstrap", "200", "--seed", "3"}).out);
}

TEST(Cli, SimulateIsByteIdenticalAcrossWorkers) {
  const auto cfg = temp_file("tiny.cfg",
                             "kind = study\nn = 120\nreplications = 16\nbootstrap_replicates = 100\n"
                             "oracle_reps = 1000\nseed = 9\n");
  const auto out1 = std::filesystem::temp_directory_path() / "msurv_test_sim1.csv";
  const auto out2 = std::filesystem::temp_directory_path() / "msurv_test_sim2.csv";
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", out1.string()}).code, 0);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--workers", "3", "--out", out2.string()}).code, 0);
  EXPECT_EQ(read_text_file(out1), read_text_file(out2));
  EXPECT_NE(read_text_file(out1).find("# seed=9"), std::string::npos);
  const auto reseeded = cli({"simulate", "--config", cfg.string(), "--seed", "10"});
  EXPECT_NE(reseeded.out.find("# seed=10"), std::string::npos);
}

TEST(Cli, Prop1InsertsKind) {
  const auto cfg = temp_file("prop1.cfg", "n_grid = 100, 200\nreplications = 20\n");
  const auto r = cli({"prop1", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("relative_deviation"), std::string::npos);
  const auto wrong = temp_file("wrong.cfg", "kind = study\n");
  EXPECT_EQ(cli({"prop1", "--config", wrong.string()}).code, 2);
}

}  // namespace
