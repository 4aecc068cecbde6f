#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "factguard/dataset.hpp"
#include "factguard/errors.hpp"
#include "support/oracles.hpp"

using namespace factguard;
namespace fs = std::filesystem;

namespace {

BenchmarkExample simple(std::string id, std::string doc, Label label = Label::answerable) {
  BenchmarkExample e;
  e.id = std::move(id);
  e.context = "Context for " + e.id;
  e.question = "Q?";
  e.gold_answer = "A";
  e.label = label;
  e.provenance.doc_id = std::move(doc);
  e.provenance.evidence = "Context";
  return e;
}

fs::path scratch_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "factguard_dataset";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Persistence, WriteThenReadThree) {
  std::mt19937_64 rng(1);
  std::vector<BenchmarkExample> xs;
  for (std::size_t i = 0; i < 3; ++i) xs.push_back(oracle::random_example(rng, i));
  const auto path = scratch_file("three.jsonl");
  EXPECT_EQ(write_examples(xs, path), 3u);
  EXPECT_EQ(read_examples(path), xs);
}

TEST(Persistence, RandomRoundTrip) {
  std::mt19937_64 rng(99);
  for (std::size_t i = 0; i < 300; ++i) {
    const auto ex = oracle::random_example(rng, i);
    const auto line = serialize_examples({ex});
    EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 1);
    EXPECT_EQ(parse_examples(line), std::vector{ex});
  }
}

TEST(Persistence, TruncatedFinalLineNamesTheLine) {
  std::mt19937_64 rng(2);
  std::string data = serialize_examples({oracle::random_example(rng, 0), oracle::random_example(rng, 1)});
  data += serialize_examples({oracle::random_example(rng, 2)}).substr(0, 40);
  try {
    parse_examples(data);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Persistence, TenThousandCountPreserved) {
  std::vector<BenchmarkExample> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(simple("e" + std::to_string(i), "d" + std::to_string(i % 97)));
  const auto path = scratch_file("ten_k.jsonl");
  write_examples(xs, path);
  EXPECT_EQ(read_examples(path).size(), 10000u);
}

TEST(Persistence, FieldOrderIsStable) {
  const auto j = to_json(simple("x", "d")).dump();
  EXPECT_LT(j.find("\"id\""), j.find("\"context\""));
  EXPECT_LT(j.find("\"context\""), j.find("\"provenance\""));
}

TEST(Splits, TenDocumentsEightOneOne) {
  std::vector<BenchmarkExample> xs;
  for (int d = 0; d < 10; ++d) xs.push_back(simple("e" + std::to_string(d), "doc" + std::to_string(d)));
  const auto split = assign_splits(xs, {0.8, 0.1, 0.1}, 7);
  std::map<Split, int> docs;
  for (const auto& [doc, s] : split.by_document) ++docs[s];
  EXPECT_EQ(docs[Split::train], 8);
  EXPECT_EQ(docs[Split::development], 1);
  EXPECT_EQ(docs[Split::test], 1);
}

TEST(Splits, AllTrainAndDocumentsNeverStraddle) {
  std::vector<BenchmarkExample> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(simple("e" + std::to_string(i), "doc" + std::to_string(i % 13)));
  const auto all_train = assign_splits(xs, {1, 0, 0}, 1);
  for (const auto& [id, s] : all_train.by_example) EXPECT_EQ(s, Split::train);
  const auto split = assign_splits(xs, kDefaultSplitRatios, 5);
  for (const auto& x : xs) EXPECT_EQ(split.of(x), split.by_document.at(x.provenance.doc_id));
  EXPECT_EQ(split.by_example.size(), xs.size());
}

TEST(Splits, Errors) {
  std::vector<BenchmarkExample> xs{simple("a", "d1"), simple("b", "d2")};
  EXPECT_THROW(assign_splits(xs, {0.5, 0.25, 0.25}, 1), ConfigError);
  EXPECT_THROW(assign_splits(xs, {0.5, 0.2, 0.2}, 1), ConfigError);
}

TEST(Stats, TwelveExampleFixtureMatchesHandCounts) {
  const auto xs = read_examples(oracle::fixtures_dir() / "stats12.jsonl");
  const auto r = compute_stats(xs);
  EXPECT_EQ(r.total, (CountPair{12, 9}));
  EXPECT_EQ(r.by_language.at(Language::en), (CountPair{7, 5}));
  EXPECT_EQ(r.by_language.at(Language::zh), (CountPair{5, 4}));
  EXPECT_EQ(r.by_label.at(Label::answerable), 5u);
  EXPECT_EQ(r.by_label.at(Label::lack_of_evidence), 4u);
  EXPECT_EQ(r.by_label.at(Label::misleading), 3u);
  EXPECT_EQ(r.by_bucket.at(LengthBucket::B0_16K), 6u);
  EXPECT_EQ(r.by_bucket.at(LengthBucket::B16_32K), 3u);
  EXPECT_EQ(r.by_bucket.at(LengthBucket::B32_64K), 2u);
  EXPECT_EQ(r.by_bucket.at(LengthBucket::B64_128K), 1u);
  EXPECT_EQ(r.by_domain.at(Domain::law), 7u);
  EXPECT_EQ(r.by_domain.at(Domain::books), 5u);
  EXPECT_NO_THROW(r.validate());
}

TEST(Stats, EmptyIsAllZero) {
  const auto r = compute_stats({});
  EXPECT_EQ(r.total, (CountPair{0, 0}));
  for (const auto& [k, v] : r.by_label) EXPECT_EQ(v, 0u);
  const auto text = render_stats_text({{"all", r}});
  EXPECT_NE(text.find("all"), std::string::npos);
}

TEST(Stats, ValidateCatchesInconsistentBreakdowns) {
  auto r = compute_stats({simple("a", "d")});
  r.by_label[Label::misleading] = 3;
  EXPECT_THROW(r.validate(), ValidationError);
}

TEST(Review, SamplesDistinctRowsDeterministically) {
  std::vector<BenchmarkExample> xs;
  for (int i = 0; i < 4200; ++i) xs.push_back(simple("e" + std::to_string(i), "d" + std::to_string(i % 300)));
  const auto rows = sample_for_manual_review(xs, 144, 1);
  ASSERT_EQ(rows.size(), 144u);
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.id);
  EXPECT_EQ(ids.size(), 144u);
  const auto again = sample_for_manual_review(xs, 144, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].id, again[i].id);
  const auto sheet = render_review_sheet(rows);
  EXPECT_EQ(std::count(sheet.begin(), sheet.end(), '\n'), 145);
  EXPECT_TRUE(sample_for_manual_review(xs, 0, 1).empty());
  EXPECT_THROW(sample_for_manual_review(xs, 5000, 1), ConfigError);
}

TEST(Review, SheetEscapesCells) {
  ReviewRow row{"id\t1", Label::misleading, Language::zh, "line\none", "q\\?", "答案"};
  const auto sheet = render_review_sheet({row});
  const auto second = sheet.substr(sheet.find('\n') + 1);
  EXPECT_EQ(second, "id\\t1\tmisleading\tzh\tline\\none\tq\\\\?\t答案\t\t\n");
}

TEST(Review, ExcerptStaysOnCodepointBoundaries) {
  std::string ctx;
  for (int i = 0; i < 1000; ++i) ctx += "字";
  const auto ex = excerpt_around(ctx, 1500, 100);
  EXPECT_EQ(ex.substr(0, 3), "...");
  EXPECT_EQ(ex.substr(ex.size() - 3), "...");
  const auto body = ex.substr(3, ex.size() - 6);
  EXPECT_EQ(body.size() % 3, 0u);
  EXPECT_EQ(excerpt_around("short", 2, 100), "short");
}
