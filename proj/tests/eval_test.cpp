#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "factguard/dataset.hpp"
#include "factguard/errors.hpp"
#include "factguard/eval.hpp"
#include "factguard/mock_backend.hpp"
#include "support/oracles.hpp"

using namespace factguard;

namespace {

BenchmarkExample ex(std::string id, Label label, Language lang = Language::en,
                    LengthBucket bucket = LengthBucket::B0_16K) {
  BenchmarkExample e;
  e.id = std::move(id);
  e.label = label;
  e.language = lang;
  e.length_bucket = bucket;
  e.question = "Which Apple 2018 phone is fully reviewed in the article?";
  e.gold_answer = label == Label::answerable ? "iPhone XS" : "The question cannot be answered.";
  e.context = "Apple launched the iPhone XS in 2018.";
  e.provenance.doc_id = "apple";
  return e;
}

std::vector<BenchmarkExample> eval10() { return read_examples(oracle::fixtures_dir() / "eval10.jsonl"); }

std::vector<Prediction> eval10_predictions() {
  return parse_predictions(oracle::read_file(oracle::fixtures_dir() / "eval10_predictions.jsonl"));
}

Agents eval10_judge() {
  return Agents::uniform(
      mock_backend(MockScript::load(oracle::fixtures_dir() / "mock_scripts" / "eval10_judge.json"), 0));
}

Agents judge_replying(const std::string& task1, const std::string& task2) {
  return Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"judge_task1/*", task1}, {"judge_task2/*", task2}}}}), 0));
}

}  // namespace

TEST(EvalJudgment, CouplingEnforcedAtConstruction) {
  EXPECT_NO_THROW(EvalJudgment("a", 1, Task2Class::reasoned));
  EXPECT_NO_THROW(EvalJudgment("a", 0, Task2Class::incorrect));
  EXPECT_THROW(EvalJudgment("a", 0, Task2Class::direct_refusal), ValidationError);
  EXPECT_THROW(EvalJudgment("a", 1, Task2Class::incorrect), ValidationError);
  EXPECT_THROW(EvalJudgment("a", 2, std::nullopt), ValidationError);
}

TEST(Parsers, Task1AndTask2) {
  EXPECT_EQ(parse_task1_score("SCORE: 1"), 1);
  EXPECT_EQ(parse_task1_score("score: 0 because"), 0);
  EXPECT_EQ(parse_task1_score("looks right"), std::nullopt);
  EXPECT_EQ(parse_task2_reply("CLASS: direct refusal"), Task2Class::direct_refusal);
  EXPECT_EQ(parse_task2_reply("CLASS: reasoned"), Task2Class::reasoned);
  EXPECT_EQ(parse_task2_reply("CLASS: incorrect"), Task2Class::incorrect);
  EXPECT_EQ(parse_task2_reply("unsure"), std::nullopt);
}

TEST(Judge, TableOneShapedVerdicts) {
  const auto answerable = ex("a", Label::answerable);
  const auto misleading = ex("m", Label::misleading);
  EXPECT_EQ(judge(answerable, {"a", "c", "iPhone XS"}, judge_replying("SCORE: 1", "CLASS: reasoned"), {})
                .task1_score(),
            1);
  const auto plausible = judge(misleading, {"m", "c", "iPhone XS"}, judge_replying("SCORE: 0", "CLASS: incorrect"), {});
  EXPECT_EQ(plausible.task1_score(), 0);
  EXPECT_EQ(plausible.task2_class(), Task2Class::incorrect);
  const auto reasoned =
      judge(misleading, {"m", "c", "The article only reviews the 2018 iPhone XS, so no 2017 phone is reviewed"},
            judge_replying("SCORE: 1", "CLASS: reasoned"), {});
  EXPECT_EQ(reasoned.task1_score(), 1);
  EXPECT_EQ(reasoned.task2_class(), Task2Class::reasoned);
  const auto refusal =
      judge(misleading, {"m", "c", "The answer is unknown."}, judge_replying("SCORE: 1", "CLASS: direct_refusal"), {});
  EXPECT_EQ(refusal.task2_class(), Task2Class::direct_refusal);
}

TEST(Judge, AnswerableGetsNoTask2) {
  const auto j = judge(ex("a", Label::answerable), {"a", "c", "x"}, judge_replying("SCORE: 1", "CLASS: reasoned"), {});
  EXPECT_FALSE(j.task2_class());
}

TEST(Judge, ParseErrorAndDisagreementAreFlagged) {
  const auto garbled = judge(ex("m", Label::misleading), {"m", "c", "x"}, judge_replying("hmm", "CLASS: reasoned"), {});
  EXPECT_EQ(garbled.flag(), JudgmentFlag::judge_parse_error);
  EXPECT_FALSE(garbled.task1_score());
  const auto split = judge(ex("m", Label::misleading), {"m", "c", "x"}, judge_replying("SCORE: 1", "CLASS: incorrect"), {});
  EXPECT_EQ(split.flag(), JudgmentFlag::judge_disagreement);
  const auto down = judge(ex("m", Label::misleading), {"m", "c", "x"}, judge_replying("$fail:server", "$fail:server"), {});
  EXPECT_EQ(down.flag(), JudgmentFlag::judge_error);
}

TEST(RunCandidate, EchoContainsQuestionAndOrderIsById) {
  std::vector<BenchmarkExample> xs;
  for (const char* id : {"e5", "e1", "e3", "e2", "e4"}) xs.push_back(ex(id, Label::answerable));
  auto echo = Agents::uniform(mock_backend(MockScript::from_json({{"replies", {{"*/*", "$echo"}}}}), 0));
  EvalOptions opts;
  opts.workers = 3;
  const auto preds = run_candidate(xs, echo, opts);
  ASSERT_EQ(preds.size(), 5u);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    EXPECT_EQ(preds[i].example_id, "e" + std::to_string(i + 1));
    EXPECT_NE(preds[i].answer.find(xs[0].question), std::string::npos);
  }
}

TEST(RunCandidate, FailureOnOneOfFiveIsFlagged) {
  std::vector<BenchmarkExample> xs;
  for (int i = 1; i <= 5; ++i) xs.push_back(ex("e" + std::to_string(i), Label::answerable));
  nlohmann::json script{{"replies", {{"*/*", "an answer"}}},
                        {"rules", {{{"role", "candidate"}, {"when", {{"example_id", "e3"}}}, {"reply", "$fail:transport"}}}}};
  const auto preds = run_candidate(xs, Agents::uniform(mock_backend(MockScript::from_json(script), 0)), {});
  EXPECT_EQ(std::count_if(preds.begin(), preds.end(), [](const Prediction& p) { return p.transport_failed; }), 1);
  EXPECT_TRUE(preds[2].transport_failed);
}

TEST(RunCandidate, ContextOverflowMakesNoCall) {
  auto x = ex("big", Label::answerable);
  EvalOptions opts;
  opts.max_context_tokens = 3;
  auto strict = Agents::uniform(mock_backend(MockScript::from_json({{"strict", true}}), 0));
  const auto preds = run_candidate({x}, strict, opts);
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_TRUE(preds[0].context_overflow);
}

TEST(Aggregate, TenExampleFixtureSixtyPercent) {
  const auto xs = eval10();
  const auto judgments = judge_all(xs, eval10_predictions(), eval10_judge(), {});
  const auto report = aggregate(judgments, xs);
  EXPECT_EQ(report.overall, (Cell{6, 10}));
  EXPECT_NEAR(*report.overall.accuracy(), 0.6, 1e-12);
  const auto pct = *report.task2.percentages();
  EXPECT_NEAR(pct[0] + pct[1] + pct[2], 100.0, 0.01);
  EXPECT_EQ(report.task2.counts, (std::array<std::size_t, 3>{3, 1, 2}));
  for (const auto& j : judgments) {
    if (j.task2_class()) EXPECT_EQ(*j.task2_class() != Task2Class::incorrect, j.task1_score() == 1) << j.example_id();
  }
  EXPECT_NE(render_eval_text(report).find("60.00"), std::string::npos);
}

TEST(Aggregate, OverallIsWeightedMeanOfCells) {
  const auto xs = eval10();
  const auto report = aggregate(judge_all(xs, eval10_predictions(), eval10_judge(), {}), xs);
  for (const auto* cells : {&report.by_language_label}) {
    double weighted = 0;
    std::size_t total = 0;
    for (const auto& [k, c] : *cells) {
      if (!c.accuracy()) continue;
      weighted += *c.accuracy() * static_cast<double>(c.total);
      total += c.total;
    }
    EXPECT_NEAR(weighted / static_cast<double>(total), *report.overall.accuracy(), 1e-9);
  }
  std::size_t bucket_total = 0;
  for (const auto& [k, c] : report.by_label_bucket) bucket_total += c.total;
  EXPECT_EQ(bucket_total, report.overall.total);
  EXPECT_FALSE(report.by_label_bucket.at({Label::misleading, LengthBucket::B64_128K}).accuracy());
}

TEST(Aggregate, PermutationInvariant) {
  const auto xs = eval10();
  auto judgments = judge_all(xs, eval10_predictions(), eval10_judge(), {});
  const auto base = aggregate(judgments, xs);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(judgments.begin(), judgments.end(), rng);
    const auto r = aggregate(judgments, xs);
    EXPECT_EQ(r.overall, base.overall);
    EXPECT_EQ(r.by_language_label, base.by_language_label);
    EXPECT_EQ(r.task2.counts, base.task2.counts);
  }
}

TEST(Aggregate, AllCorrectIsHundredEverywhere) {
  const auto xs = eval10();
  std::vector<EvalJudgment> js;
  for (const auto& x : xs)
    js.emplace_back(x.id, 1, is_unanswerable(x.label) ? std::optional(Task2Class::reasoned) : std::nullopt);
  const auto r = aggregate(js, xs);
  EXPECT_EQ(*r.overall.accuracy(), 1.0);
  for (const auto& [k, c] : r.by_language_label)
    if (c.accuracy()) EXPECT_EQ(*c.accuracy(), 1.0);
}

TEST(Aggregate, TaskTwoTriple) {
  Task2Breakdown b;
  b.counts = {47, 29, 28};
  const auto p = *b.percentages();
  EXPECT_NEAR(p[0], 45.19, 0.005);
  EXPECT_NEAR(p[1], 27.88, 0.005);
  EXPECT_NEAR(p[2], 26.92, 0.005);
  EXPECT_NEAR(p[0] + p[1] + p[2], 100.0, 0.01);
}

TEST(Aggregate, UnknownIdRejected) {
  EXPECT_THROW(aggregate({EvalJudgment("nope", 1, std::nullopt)}, eval10()), ValidationError);
  EXPECT_THROW(aggregate({EvalJudgment("a1", 1, std::nullopt), EvalJudgment("a1", 1, std::nullopt)}, eval10()),
               ValidationError);
}

TEST(Aggregate, FlaggedExcludedByDefaultOrCountedWrong) {
  const auto xs = eval10();
  std::vector<EvalJudgment> js;
  for (const auto& x : xs) {
    if (x.id == "a1") {
      js.emplace_back(x.id, std::nullopt, std::nullopt, JudgmentFlag::judge_parse_error);
    } else {
      js.emplace_back(x.id, 1, is_unanswerable(x.label) ? std::optional(Task2Class::reasoned) : std::nullopt);
    }
  }
  const auto excluded = aggregate(js, xs);
  EXPECT_EQ(excluded.overall, (Cell{9, 9}));
  EXPECT_EQ(excluded.excluded.at(JudgmentFlag::judge_parse_error), 1u);
  EvalOptions strict;
  strict.exclude_flagged = false;
  EXPECT_EQ(aggregate(js, xs, strict).overall, (Cell{9, 10}));
}

TEST(JudgeAll, MissingPredictionsListedExhaustively) {
  auto preds = eval10_predictions();
  preds.erase(std::remove_if(preds.begin(), preds.end(),
                             [](const Prediction& p) { return p.example_id == "a2" || p.example_id == "l3"; }),
              preds.end());
  try {
    judge_all(eval10(), preds, eval10_judge(), {});
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a2"), std::string::npos);
    EXPECT_NE(msg.find("l3"), std::string::npos);
  }
}

TEST(JudgeAll, TaskTwoOnlySkipsAnswerable) {
  EvalOptions opts;
  opts.task1 = false;
  const auto js = judge_all(eval10(), eval10_predictions(), eval10_judge(), opts);
  EXPECT_EQ(js.size(), 6u);
  for (const auto& j : js) EXPECT_FALSE(j.task1_score());
}

TEST(Persistence, PredictionsAndJudgmentsRoundTrip) {
  const auto preds = eval10_predictions();
  EXPECT_EQ(parse_predictions(predictions_to_jsonl(preds)), preds);
  const auto js = judge_all(eval10(), preds, eval10_judge(), {});
  EXPECT_EQ(parse_judgments(judgments_to_jsonl(js)), js);
}
