#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cmfomp/experiment.hpp"

using namespace cmfomp;
using nlohmann::json;

namespace {

json base_config() {
  return json::parse(R"({
    "schema_version": 1,
    "seed": 5,
    "kernel": {"family": "laplace", "lambda": 1.0, "p": 1.0, "dimension": 1},
    "support": {"random": {"k": [1, 4], "box": [-5, 5], "min_gap": 0.01}},
    "coefficients": {"random": {"magnitude": [0.1, 10]}},
    "trials": 12
  })");
}

std::string trial_output(const ExperimentConfig& cfg, CliOptions opt) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_trial(cfg, opt, out, err), kExitOk);
  return out.str();
}

int run_cli(const std::string& args, std::string* stdout_text = nullptr) {
  const auto out = std::filesystem::temp_directory_path() / "cmfomp_cli_out.txt";
  const std::string cmd = std::string(CMFOMP_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (stdout_text) {
    std::ifstream in(out);
    std::ostringstream ss;
    ss << in.rdbuf();
    *stdout_text = ss.str();
  }
  return WEXITSTATUS(status);
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Config, ParsesValidDocument) {
  const ExperimentConfig cfg = parse_config(base_config());
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.trials, 12u);
  EXPECT_EQ(cfg.support.mode, SupportConfig::Mode::Random);
  EXPECT_EQ(cfg.support.k_min, 1u);
  EXPECT_EQ(cfg.support.k_max, 4u);
  EXPECT_EQ(cfg.coefficients.mode, CoefficientConfig::Mode::Random);
}

TEST(Config, RejectsInvalidDocuments) {
  auto expect_bad = [](json j) { EXPECT_THROW(parse_config(j), ConfigError) << j.dump(); };
  json j = base_config();
  j["extra"] = 1;
  expect_bad(j);
  j = base_config();
  j.erase("schema_version");
  expect_bad(j);
  j = base_config();
  j["schema_version"] = 2;
  expect_bad(j);
  j = base_config();
  j["kernel"]["p"] = 1.5;
  expect_bad(j);
  j = base_config();
  j["kernel"]["lambda"] = -1;
  expect_bad(j);
  j = base_config();
  j["kernel"]["family"] = "cauchy";
  expect_bad(j);
  j = base_config();
  j["kernel"]["family"] = "gaussian";
  j["kernel"]["dimension"] = 2;
  expect_bad(j);
  j = base_config();
  j["support"]["random"]["k"] = json::array({3, 1});
  expect_bad(j);
  j = base_config();
  j["support"]["random"]["min_gap"] = 5.0;
  expect_bad(j);
  j = base_config();
  j["trials"] = 0;
  expect_bad(j);
  j = base_config();
  j["support"] = json::parse(R"({"points": [[0.0], [0.0]]})");
  EXPECT_THROW(parse_config(j), ParameterError);
  j = base_config();
  j["support"] = json::parse(R"({"points": [[0.0], [1.0]]})");
  j["coefficients"] = json::parse(R"({"values": [1.0]})");
  expect_bad(j);
  j["coefficients"] = json::parse(R"({"values": [1.0, 0.0]})");
  expect_bad(j);
  j = base_config();
  j["optimizer"] = json::parse(R"({"grid_points_per_axis": 1})");
  expect_bad(j);
  j = base_config();
  j["kernel"]["family"] = "inverse_linear";
  j["support"] = json::parse(R"({"separated": {"k": 3}})");
  expect_bad(j);
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
  EXPECT_THROW(load_config(write_temp("cmfomp_bad.json", "{not json")), ConfigError);
}

TEST(Trial, DeterministicAcrossRunsAndJobs) {
  const ExperimentConfig cfg = parse_config(base_config());
  for (const char* fmt : {"csv", "json"}) {
    CliOptions opt;
    opt.format = fmt;
    const std::string a = trial_output(cfg, opt);
    const std::string b = trial_output(cfg, opt);
    opt.jobs = 3;
    const std::string c = trial_output(cfg, opt);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
  }
}

TEST(Trial, SeedOverrideChangesOutput) {
  const ExperimentConfig cfg = parse_config(base_config());
  CliOptions opt;
  opt.format = "csv";
  const std::string a = trial_output(cfg, opt);
  opt.seed = 6;
  EXPECT_NE(a, trial_output(cfg, opt));
}

TEST(Trial, CsvLayout) {
  const ExperimentConfig cfg = parse_config(base_config());
  CliOptions opt;
  opt.format = "csv";
  std::istringstream in(trial_output(cfg, opt));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial_index,seed,k,D,verdict,iterations,residual,erc_max,ms");
  std::size_t rows = 0, summary = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      ++summary;
      continue;
    }
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(rows));
    EXPECT_NE(line.find("ExactKStep"), std::string::npos);
    ++rows;
  }
  EXPECT_EQ(rows, 12u);
  EXPECT_EQ(summary, 1u);
}

TEST(Trial, RejectsBadFormat) {
  const ExperimentConfig cfg = parse_config(base_config());
  CliOptions opt;
  opt.format = "xml";
  std::ostringstream out, err;
  EXPECT_THROW(cmd_trial(cfg, opt, out, err), ConfigError);
}

TEST(Run, JsonTraceDocument) {
  json j = base_config();
  j["support"] = json::parse(R"({"points": [[0.0], [1.0], [2.0]]})");
  j["coefficients"] = json::parse(R"({"values": [1.0, -2.0, 1.5]})");
  const ExperimentConfig cfg = parse_config(j);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(cfg, CliOptions{}, out, err), kExitOk);
  const json doc = json::parse(out.str());
  EXPECT_EQ(doc["verdict"]["kind"], "ExactKStep");
  EXPECT_EQ(doc["trace"]["iterations"].size(), 3u);
  EXPECT_EQ(doc["trace"]["terminated"], "residual-zero");
  EXPECT_TRUE(doc["reconstruction"]["all_ok"].get<bool>());
}

TEST(Run, RequiresExplicitSignal) {
  const ExperimentConfig cfg = parse_config(base_config());
  std::ostringstream out, err;
  EXPECT_THROW(cmd_run(cfg, CliOptions{}, out, err), ConfigError);
}

TEST(Run, DegenerateSupportExitCode) {
  json j = base_config();
  j["kernel"] = json::parse(R"({"family": "gaussian"})");
  j["support"] = json::parse(R"({"points": [[0.0], [1e-6]]})");
  j["coefficients"] = json::parse(R"({"values": [1.0, -1.0]})");
  const ExperimentConfig cfg = parse_config(j);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(cfg, CliOptions{}, out, err), kExitDegenerate);
}

TEST(Certify, ReportsAllCertificates) {
  json j = base_config();
  j["kernel"]["dimension"] = 2;
  j["support"] = json::parse(R"({"points": [[0.0, 0.0], [2.0, 2.0]]})");
  j.erase("coefficients");
  const ExperimentConfig cfg = parse_config(j);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_certify(cfg, CliOptions{}, out, err), kExitOk);
  const json doc = json::parse(out.str());
  EXPECT_NEAR(doc["restricted_erc"]["value"].get<double>(), 2.0 * std::exp(-2.0) / (1.0 + std::exp(-4.0)), 1e-14);
  EXPECT_EQ(doc["restricted_erc"]["status"], "pass");
  EXPECT_EQ(doc["separation"]["status"], "pass");
  EXPECT_EQ(doc["axis_falsifier"]["status"], "not-falsified");
}

TEST(BuiltinExamples, AllPass) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_paper_examples(CliOptions{}, out, err), kExitOk);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.find("FAIL"), std::string::npos);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 2.0 * std::exp(-1.0 / 16.0), 1e-300, -123456.789}) {
    EXPECT_EQ(std::stod(fmt17(x)), x);
  }
}

TEST(Seeds, TrialSeedsDifferAndRepeat) {
  EXPECT_EQ(trial_seed(1, 2), trial_seed(1, 2));
  EXPECT_NE(trial_seed(1, 2), trial_seed(1, 3));
  EXPECT_NE(trial_seed(1, 2), trial_seed(2, 2));
}

TEST(Cli, ExitCodes) {
  const std::string dir = CMFOMP_CONFIG_DIR;
  std::string text;
  EXPECT_EQ(run_cli("paper-examples", &text), 0);
  EXPECT_NE(text.find("PASS"), std::string::npos);
  EXPECT_EQ(run_cli("run --config " + dir + "/run_laplace_1d.json"), 0);
  EXPECT_EQ(run_cli("certify --config " + dir + "/certify_grid_2d.json --format csv"), 0);
  EXPECT_EQ(run_cli("run --config /nonexistent.json"), 2);
  EXPECT_EQ(run_cli("trial --config " + dir + "/trial_laplace_1d.json --format yaml"), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("run --config " + write_temp("cmfomp_unknown.json", R"({"schema_version":1,"bad":1})")), 2);
  const std::string degenerate = write_temp(
      "cmfomp_degenerate.json",
      R"({"schema_version":1,"kernel":{"family":"gaussian"},"support":{"points":[[0.0],[1e-6]]},"coefficients":{"values":[1.0,-1.0]}})");
  EXPECT_EQ(run_cli("run --config " + degenerate), 3);
}

TEST(Cli, TrialOutputByteIdentical) {
  const std::string cfg = std::string(CMFOMP_CONFIG_DIR) + "/trial_laplace_1d.json";
  std::string a, b;
  ASSERT_EQ(run_cli("trial --config " + cfg + " --seed 9 --jobs 2 --format csv", &a), 0);
  ASSERT_EQ(run_cli("trial --config " + cfg + " --seed 9 --jobs 1 --format csv", &b), 0);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(Cli, WritesOutFile) {
  const auto path = std::filesystem::temp_directory_path() / "cmfomp_examples.json";
  std::filesystem::remove(path);
  ASSERT_EQ(run_cli("paper-examples --out " + path.string()), 0);
  std::ifstream in(path);
  const json doc = json::parse(in);
  EXPECT_TRUE(doc["all_pass"].get<bool>());
  EXPECT_EQ(doc["examples"].size(), 3u);
}
