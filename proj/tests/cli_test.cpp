#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "factguard/pipeline.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the CLI from `cwd` through the shell.
Result cli(const std::string& args, const fs::path& cwd, const std::string& env = "") {
  const std::string cmd =
      "cd '" + cwd.string() + "' && " + env + " '" + std::string(FACTGUARD_CLI_PATH) + "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("factguard_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string fixture(const std::string& rel) { return (oracle::fixtures_dir() / rel).string(); }

}  // namespace

TEST(Cli, SynthesizeTwiceIsByteIdentical) {
  const auto dir = fresh_dir("determinism");
  const std::string corpus = fixture("corpus20");
  for (const char* out : {"a", "b"}) {
    const auto r = cli("--mock --seed 7 --out " + std::string(out) + " synthesize --corpus '" + corpus + "'", dir);
    ASSERT_EQ(r.code, 0) << r.output;
    ASSERT_EQ(cli("--out " + std::string(out) + " stats " + std::string(out) + "/examples.jsonl", dir).code, 0);
  }
  for (const char* f : {"examples.jsonl", "attrition.jsonl", "stats.txt", "stats.json"})
    EXPECT_EQ(oracle::read_file(dir / "a" / f), oracle::read_file(dir / "b" / f)) << f;
  const auto report = factguard::AttritionReport::from_jsonl(oracle::read_file(dir / "a" / "attrition.jsonl"));
  EXPECT_NO_THROW(report.validate());
  EXPECT_TRUE(fs::exists(dir / "a" / "resolved_config.json"));
}

TEST(Cli, ReplayFromResolvedConfigReproducesOutputs) {
  const auto dir = fresh_dir("replay");
  ASSERT_EQ(cli("--mock --seed 11 --out first synthesize --corpus '" + fixture("corpus20") + "'", dir).code, 0);
  const auto r = cli("--config first/resolved_config.json --mock --out second synthesize", dir);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(oracle::read_file(dir / "first" / "examples.jsonl"), oracle::read_file(dir / "second" / "examples.jsonl"));
}

TEST(Cli, WritesOnlyInsideOutputDirectory) {
  const auto dir = fresh_dir("sandbox");
  ASSERT_EQ(cli("--mock --out out synthesize --corpus '" + fixture("corpus20") + "'", dir).code, 0);
  std::vector<std::string> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path().filename().string());
  EXPECT_EQ(entries, std::vector<std::string>{"out"});
}

TEST(Cli, MissingAuthExitsOneNamingTheRole) {
  const auto dir = fresh_dir("auth");
  std::ofstream(dir / "live.json") << R"({"backends": {"default": {"endpoint": "http://127.0.0.1:9/v1/chat/completions",
      "model": "m", "auth_env": "FG_TEST_TOKEN_UNSET"}}})";
  const auto r = cli("--config live.json synthesize --corpus '" + fixture("corpus20") + "'", dir,
                     "env -u FG_TEST_TOKEN_UNSET");
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_NE(r.output.find("quality"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("FG_TEST_TOKEN_UNSET"), std::string::npos) << r.output;
}

TEST(Cli, StatsFixtureEmptyAndMalformed) {
  const auto dir = fresh_dir("stats");
  const auto ok = cli("--out out stats '" + fixture("stats12.jsonl") + "'", dir);
  ASSERT_EQ(ok.code, 0) << ok.output;
  const auto j = nlohmann::json::parse(oracle::read_file(dir / "out" / "stats.json"));
  const auto& all = j.at("total");
  EXPECT_EQ(all.at("examples"), 12);
  EXPECT_EQ(all.at("articles"), 9);

  std::ofstream(dir / "empty.jsonl").close();
  const auto empty = cli("--out out2 stats empty.jsonl", dir);
  EXPECT_EQ(empty.code, 0) << empty.output;

  std::ofstream(dir / "bad.jsonl") << oracle::read_file(fixture("stats12.jsonl")).substr(0, 900) << "\n{broken\n";
  const auto bad = cli("--out out3 stats bad.jsonl", dir);
  EXPECT_EQ(bad.code, 3) << bad.output;
  EXPECT_NE(bad.output.find("line "), std::string::npos) << bad.output;
}

TEST(Cli, EvaluateScriptedJudgeReportsSixtyPercent) {
  const auto dir = fresh_dir("evaluate");
  const auto r = cli("--mock --mock-script '" + fixture("mock_scripts/eval10_judge.json") +
                         "' --out out evaluate '" + fixture("eval10.jsonl") + "' --predictions '" +
                         fixture("eval10_predictions.jsonl") + "'",
                     dir);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto text = oracle::read_file(dir / "out" / "eval_report.txt");
  EXPECT_NE(text.find("60.00"), std::string::npos) << text;
  EXPECT_NE(text.find("Task 1"), std::string::npos);
  EXPECT_NE(text.find("Task 2"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "judgments.jsonl"));
}

TEST(Cli, EvaluateTaskTwoOnlyGatesSections) {
  const auto dir = fresh_dir("task2");
  const auto r = cli("--mock --mock-script '" + fixture("mock_scripts/eval10_judge.json") +
                         "' --out out evaluate '" + fixture("eval10.jsonl") + "' --predictions '" +
                         fixture("eval10_predictions.jsonl") + "' --task 2",
                     dir);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto text = oracle::read_file(dir / "out" / "eval_report.txt");
  EXPECT_EQ(text.find("Task 1"), std::string::npos) << text;
  for (const char* cls : {"incorrect", "direct_refusal", "reasoned"}) EXPECT_NE(text.find(cls), std::string::npos);
}

TEST(Cli, EvaluateMissingPredictionsListsBoth) {
  const auto dir = fresh_dir("missing");
  std::ifstream in(fixture("eval10_predictions.jsonl"));
  std::ofstream out(dir / "preds.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"a2\"") != std::string::npos || line.find("\"m1\"") != std::string::npos) continue;
    out << line << "\n";
  }
  out.close();
  const auto r = cli("--mock --mock-script '" + fixture("mock_scripts/eval10_judge.json") + "' --out o evaluate '" +
                         fixture("eval10.jsonl") + "' --predictions preds.jsonl",
                     dir);
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("a2"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("m1"), std::string::npos) << r.output;
}

TEST(Cli, PredictThenReport) {
  const auto dir = fresh_dir("predict");
  ASSERT_EQ(cli("--mock --out out predict '" + fixture("eval10.jsonl") + "'", dir).code, 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "predictions.jsonl"));
  ASSERT_EQ(cli("--mock --mock-script '" + fixture("mock_scripts/eval10_judge.json") + "' --out out evaluate '" +
                    fixture("eval10.jsonl") + "' --predictions out/predictions.jsonl",
                dir)
                .code,
            0);
  const auto r = cli("--out out report --judgments out/judgments.jsonl --examples '" + fixture("eval10.jsonl") + "'",
                     dir);
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("Task 1"), std::string::npos);
}

TEST(Cli, SampleReviewWritesSheet) {
  const auto dir = fresh_dir("sample");
  const auto r = cli("--seed 1 --out out sample-review -k 5 '" + fixture("stats12.jsonl") + "'", dir);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto sheet = oracle::read_file(dir / "out" / "review_sheet.tsv");
  EXPECT_EQ(std::count(sheet.begin(), sheet.end(), '\n'), 6);
  EXPECT_EQ(cli("--out out sample-review -k 50 '" + fixture("stats12.jsonl") + "'", dir).code, 1);
}

TEST(Cli, UsageErrorsExitOne) {
  const auto dir = fresh_dir("usage");
  EXPECT_EQ(cli("--bogus stats x", dir).code, 1);
  EXPECT_EQ(cli("--workers 0 stats x", dir).code, 1);
  EXPECT_EQ(cli("--help", dir).code, 0);
}

TEST(Cli, IngestWritesRecords) {
  const auto dir = fresh_dir("ingest");
  const auto r = cli("--out out ingest --corpus '" + fixture("corpus20") + "'", dir);
  ASSERT_EQ(r.code, 0) << r.output;
  const auto text = oracle::read_file(dir / "out" / "corpus.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 20);
}
