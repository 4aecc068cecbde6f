#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "factguard/errors.hpp"
#include "factguard/mock_backend.hpp"
#include "factguard/pipeline.hpp"
#include "support/oracles.hpp"

using namespace factguard;

namespace {

Agents scripted_agents(const std::string& script_file, std::uint64_t seed = 7) {
  return Agents::uniform(
      mock_backend(MockScript::load(oracle::fixtures_dir() / "mock_scripts" / script_file), seed));
}

AttritionReport chain(std::initializer_list<std::pair<std::size_t, std::size_t>> stages) {
  AttritionReport r;
  std::size_t i = 0;
  for (const auto& [in, kept] : stages) {
    auto& s = r.stages[i++];
    s.input = in;
    s.kept = kept;
    if (in > kept) s.dropped[DropReason::qa_judge_fail] = in - kept;
  }
  return r;
}

const std::string kMurray =
    "There had been a lack of confidence in Murray since Romani, and the two failed Gaza battles increased his "
    "unpopularity among both the infantry and the mounted troops. After the war Allenby acknowledged Murray's "
    "achievements in a June 1919 despatch in which he summed up his campaigns. Murray retired soon after.";

}  // namespace

TEST(AssignLabels, FollowsMixExactlyOverFullCycles) {
  const auto labels = assign_labels(300, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 7);
  std::map<Label, int> counts;
  for (auto l : labels) ++counts[l];
  for (auto l : all_labels()) EXPECT_EQ(counts[l], 100);
}

TEST(AssignLabels, WeightedMixAndZeroWeights) {
  const auto labels = assign_labels(100, {0.5, 0.5, 0.0}, 3);
  std::map<Label, int> counts;
  for (auto l : labels) ++counts[l];
  EXPECT_EQ(counts[Label::answerable], 50);
  EXPECT_EQ(counts[Label::lack_of_evidence], 50);
  EXPECT_EQ(counts[Label::misleading], 0);
}

TEST(AssignLabels, DeterministicPerSeed) {
  EXPECT_EQ(assign_labels(50, {0.2, 0.3, 0.5}, 11), assign_labels(50, {0.2, 0.3, 0.5}, 11));
}

TEST(LackOfEvidence, RemovesTheEvidenceSentence) {
  const auto out = make_lack_of_evidence(
      kMurray, "After the war Allenby acknowledged Murray's achievements in a June 1919 despatch");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->context,
            "There had been a lack of confidence in Murray since Romani, and the two failed Gaza battles increased "
            "his unpopularity among both the infantry and the mounted troops. Murray retired soon after.");
  EXPECT_EQ(out->first_offset, kMurray.find("After"));
}

TEST(LackOfEvidence, RemovesEveryOccurrence) {
  const std::string doc = "Alpha came first. The key is 42. Beta came next.\n\nGamma. The key is  42. Delta.";
  const auto out = make_lack_of_evidence(doc, "The key is 42.");
  ASSERT_TRUE(out);
  EXPECT_FALSE(oracle::contains_normalized(out->context, "The key is 42."));
  EXPECT_EQ(out->context, "Alpha came first. Beta came next.\n\nGamma. Delta.");
}

TEST(LackOfEvidence, MissingEvidenceIsDropped) {
  const auto out = make_lack_of_evidence(kMurray, "Napoleon crossed the Alps.");
  ASSERT_FALSE(out);
  EXPECT_EQ(out.drop().reason, DropReason::evidence_absent_at_deletion);
  EXPECT_EQ(make_lack_of_evidence(kMurray, "  ").drop().reason, DropReason::evidence_absent_at_deletion);
}

TEST(LackOfEvidence, CjkEvidence) {
  const std::string doc = "第一句话。证据在这里，数字是42。最后一句。";
  const auto out = make_lack_of_evidence(doc, "数字是42");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->context, "第一句话。最后一句。");
}

TEST(LackOfEvidence, RandomPairsAgreeWithBruteForceScan) {
  std::mt19937_64 rng(42);
  const std::vector<std::string> sentences{"The ship left port.", "Tax was 5 percent.", "王先生来了。",
                                           "数字是42。", "Nobody spoke.", "The ship  left\nport."};
  for (int i = 0; i < 200; ++i) {
    std::string doc;
    for (int k = 0; k < 12; ++k) doc += sentences[rng() % sentences.size()] + (rng() % 4 ? " " : "\n\n");
    const std::string evidence = sentences[rng() % sentences.size()];
    const auto out = make_lack_of_evidence(doc, evidence);
    if (!oracle::contains_normalized(doc, evidence)) {
      EXPECT_FALSE(out);
      continue;
    }
    ASSERT_TRUE(out);
    EXPECT_FALSE(oracle::contains_normalized(out->context, evidence)) << doc << " | " << evidence;
    EXPECT_LT(out->context.size(), doc.size());
  }
}

TEST(Misleading, EntitySubstitutionChangesTheYear) {
  Fragment f{"apple", 0, {}, "Apple launched the iPhone XS in 2018."};
  QATuple t{{"apple", 0}, "Which Apple 2018 phone is fully reviewed in the article?", "iPhone XS", f.text};
  auto agents = Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"rewrite/*", "Which Apple 2017 phone is fully reviewed in the article?"}}}}),
      0));
  const auto q = make_misleading(t, f, agents, RewriteStrategy::entity_substitution);
  ASSERT_TRUE(q);
  EXPECT_NE(q->find("2017"), std::string::npos);
  auto noop = Agents::uniform(mock_backend(MockScript::from_json({{"replies", {{"rewrite/*", t.question}}}}), 0));
  EXPECT_EQ(make_misleading(t, f, noop, RewriteStrategy::entity_substitution).drop().reason,
            DropReason::rewrite_noop);
}

TEST(Misleading, ImpossibleConditionContradictsFragment) {
  Fragment f{"d", 0, {}, "The treaty was signed in 1815 at Vienna."};
  QATuple t{{"d", 0}, "Where was the treaty signed?", "Vienna", f.text};
  const std::string rewritten = "Where was the treaty signed in 1750, before Vienna existed as a venue?";
  auto agents = Agents::uniform(mock_backend(MockScript::from_json({{"replies", {{"rewrite/*", rewritten}}}}), 0));
  const auto q = make_misleading(t, f, agents, RewriteStrategy::impossible_condition);
  ASSERT_TRUE(q);
  EXPECT_EQ(*q, rewritten);
  EXPECT_EQ(f.text.find("1750"), std::string::npos);
}

TEST(Review, DuplicatedFactConflictsWithLackOfEvidence) {
  Document doc = make_document("d", Language::en, Domain::law,
                               "The court sat in 1919 to hear the appeal.\n\nMuch later, records show the court sat "
                               "in 1919 to hear the appeal.");
  const auto fragments = pack_paragraphs(doc, {5, 13});
  ASSERT_EQ(fragments.size(), 2u);
  const auto index = LexicalIndex::build(fragments);
  BenchmarkExample c;
  c.id = "d#0";
  c.label = Label::lack_of_evidence;
  c.question = "In what year did the court sit to hear the appeal?";
  c.gold_answer = "The question cannot be answered.";
  c.provenance.doc_id = "d";
  auto agents = Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"review_conflict/*", "ANSWER: 1919"}, {"review_common_sense/*", "NO"}}}}),
      0));
  const auto drop = review(c, fragments, index, agents, {});
  ASSERT_TRUE(drop);
  EXPECT_EQ(drop->reason, DropReason::conflicting_answer);
}

TEST(Review, CommonSenseAndKeep) {
  const std::vector<Fragment> fragments{{"d", 0, {}, "Paris hosted the summit."}};
  const auto index = LexicalIndex::build(fragments);
  BenchmarkExample c;
  c.label = Label::misleading;
  c.question = "What is the capital of France in the article?";
  c.provenance.doc_id = "d";
  auto yes = Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"review_conflict/*", "UNANSWERABLE"}, {"review_common_sense/*", "YES"}}}}),
      0));
  EXPECT_EQ(review(c, fragments, index, yes, {})->reason, DropReason::common_sense);
  auto no = Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"review_conflict/*", "UNANSWERABLE"}, {"review_common_sense/*", "NO"}}}}),
      0));
  EXPECT_FALSE(review(c, fragments, index, no, {}));
}

TEST(Review, AnswerableDisagreementAndBackendFailure) {
  const std::vector<Fragment> fragments{{"d", 0, {}, "The fee was 40 dollars."}};
  const auto index = LexicalIndex::build(fragments);
  BenchmarkExample c;
  c.label = Label::answerable;
  c.question = "What was the fee?";
  c.gold_answer = "40 dollars";
  c.provenance.doc_id = "d";
  auto agree = Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"review_conflict/*", "ANSWER: 40 dollars."}, {"review_common_sense/*", "NO"}}}}),
      0));
  EXPECT_FALSE(review(c, fragments, index, agree, {}));
  auto disagree = Agents::uniform(mock_backend(
      MockScript::from_json({{"replies", {{"review_conflict/*", "ANSWER: 90 dollars"}, {"review_common_sense/*", "NO"}}}}),
      0));
  EXPECT_EQ(review(c, fragments, index, disagree, {})->reason, DropReason::answer_conflict);
  auto down = Agents::uniform(mock_backend(MockScript::from_json({{"replies", {{"*/*", "$fail:transport"}}}}), 0));
  EXPECT_EQ(review(c, fragments, index, down, {})->reason, DropReason::review_error);
}

TEST(Funnel, SectionStyleArithmetic) {
  const auto f = funnel(chain({{100, 100}, {100, 94}, {94, 94}, {94, 74}}));
  EXPECT_DOUBLE_EQ(f.stages[0].retention, 1.0);
  EXPECT_NEAR(f.stages[1].retention, 0.94, 1e-12);
  EXPECT_DOUBLE_EQ(f.stages[2].retention, 1.0);
  EXPECT_NEAR(f.stages[3].retention, 74.0 / 94.0, 1e-12);
  EXPECT_NEAR(f.stages[3].retention, 0.787, 5e-4);
  EXPECT_NEAR(f.overall, 0.74, 1e-12);
}

TEST(Funnel, NoDropsAllOnes) {
  const auto f = funnel(chain({{20, 20}, {20, 20}, {20, 20}, {20, 20}}));
  for (const auto& s : f.stages) EXPECT_EQ(s.retention, 1.0);
}

TEST(Funnel, ZeroInputIsFlagged) {
  const auto f = funnel(chain({{3, 0}, {0, 0}, {0, 0}, {0, 0}}));
  EXPECT_EQ(f.stages[0].retention, 0.0);
  EXPECT_TRUE(f.stages[1].zero_input);
  EXPECT_EQ(f.stages[1].retention, 1.0);
}

TEST(Funnel, ViolatingConservationThrows) {
  auto r = chain({{100, 100}, {100, 94}, {94, 94}, {94, 74}});
  r.stages[1].kept = 95;
  EXPECT_THROW(funnel(r), ValidationError);
  auto broken_chain = chain({{100, 100}, {99, 94}, {94, 94}, {94, 74}});
  EXPECT_THROW(broken_chain.validate(), ValidationError);
}

TEST(Funnel, ReviewErrorsLeaveTheDenominator) {
  auto r = chain({{10, 10}, {10, 10}, {10, 10}, {10, 10}});
  r.stages[3].kept = 6;
  r.stages[3].dropped = {{DropReason::review_error, 2}, {DropReason::common_sense, 2}};
  const auto f = funnel(r);
  EXPECT_EQ(f.stages[3].excluded, 2u);
  EXPECT_NEAR(f.stages[3].retention, 6.0 / 8.0, 1e-12);
  EXPECT_NEAR(f.overall, 6.0 / 8.0, 1e-12);
}

TEST(Attrition, JsonlRoundTrip) {
  auto r = chain({{100, 100}, {100, 94}, {94, 94}, {94, 74}});
  r.stages[3].dropped = {{DropReason::common_sense, 12}, {DropReason::conflicting_answer, 8}};
  EXPECT_EQ(AttritionReport::from_jsonl(r.to_jsonl()), r);
}

TEST(Attrition, UnknownReasonNamesLine) {
  const std::string bad =
      "{\"stage\":\"preparation\",\"input\":1,\"kept\":1,\"dropped\":{}}\n"
      "{\"stage\":\"qa_generation\",\"input\":1,\"kept\":0,\"dropped\":{\"gremlins\":1}}\n";
  try {
    AttritionReport::from_jsonl(bad);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(SynthesisConfig, ListsEveryProblem) {
  SynthesisConfig c;
  c.alpha = 0;
  c.quality_threshold = 9;
  c.label_mix = {0, 0, 0};
  c.review_top_n = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* key : {"alpha", "quality_threshold", "label_mix", "review_top_n"})
      EXPECT_NE(msg.find(key), std::string::npos) << key << " missing from: " << msg;
  }
}

TEST(Run, EmptyCorpusIsFatal) {
  EXPECT_THROW(run({}, {}, Agents::uniform(mock_backend())), ConfigError);
}

TEST(Run, BundledFixtureAllAgentsSucceed) {
  const auto docs = load_documents(oracle::fixtures_dir() / "corpus20", CorpusFormat::plain_text_directory);
  SynthesisConfig config;
  config.seed = 7;
  const auto result = run(docs, config, scripted_agents("simulate_all.json"));
  EXPECT_EQ(result.examples.size(), 20u);
  for (const auto& s : result.report.stages) EXPECT_EQ(s.total_dropped(), 0u);
  std::map<Label, int> counts;
  for (const auto& e : result.examples) ++counts[e.label];
  EXPECT_EQ(counts.size(), 3u);
  EXPECT_NO_THROW(result.report.validate());
}

TEST(Run, JudgeScriptedToFailSixOfHundred) {
  SynthesisConfig config;
  config.seed = 7;
  const auto result = run(oracle::funnel_corpus(100), config, scripted_agents("funnel.json"));
  const auto& qa = result.report.at(Stage::qa_generation);
  EXPECT_EQ(qa.input, 100u);
  EXPECT_EQ(qa.kept, 94u);
  EXPECT_EQ(qa.dropped.at(DropReason::qa_judge_fail), 6u);
}

TEST(Run, WorkerCountDoesNotChangeOutput) {
  const auto docs = load_documents(oracle::fixtures_dir() / "corpus20", CorpusFormat::plain_text_directory);
  SynthesisConfig one;
  one.seed = 3;
  SynthesisConfig four = one;
  four.workers = 4;
  const auto agents = Agents::uniform(mock_backend({}, 3));
  const auto a = run(docs, one, agents);
  const auto b = run(docs, four, agents);
  EXPECT_EQ(a.examples, b.examples);
  EXPECT_EQ(a.report, b.report);
}

TEST(Run, CancelledBeforeStartProducesNothing) {
  const auto docs = oracle::funnel_corpus(5);
  std::atomic<bool> cancel{true};
  const auto result = run(docs, {}, Agents::uniform(mock_backend()), &cancel);
  EXPECT_TRUE(result.interrupted);
  EXPECT_TRUE(result.examples.empty());
  EXPECT_NO_THROW(result.report.validate());
}

TEST(Run, UnscriptedStrictMockDropsAsBackendErrors) {
  const auto docs = oracle::funnel_corpus(3);
  const auto result = run(docs, {}, Agents::uniform(mock_backend(MockScript::from_json({{"strict", true}}))));
  EXPECT_TRUE(result.examples.empty());
  EXPECT_EQ(result.report.at(Stage::preparation).dropped.at(DropReason::backend_error), 3u);
}
