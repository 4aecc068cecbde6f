#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "factguard/corpus.hpp"
#include "factguard/errors.hpp"
#include "support/oracles.hpp"

using namespace factguard;
namespace fs = std::filesystem;

namespace {

std::string words(std::size_t n, const std::string& stem) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("factguard_corpus_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& content) { std::ofstream(p, std::ios::binary) << content; }

}  // namespace

TEST(LengthBucket, Examples) {
  EXPECT_EQ(length_bucket(8000), LengthBucket::B0_16K);
  EXPECT_EQ(length_bucket(16384), LengthBucket::B0_16K);
  EXPECT_EQ(length_bucket(16385), LengthBucket::B16_32K);
  EXPECT_EQ(length_bucket(100000), LengthBucket::B64_128K);
  EXPECT_EQ(length_bucket(131072), LengthBucket::B64_128K);
}

TEST(LengthBucket, RejectsOutOfRange) {
  EXPECT_THROW(length_bucket(0), std::out_of_range);
  EXPECT_THROW(length_bucket(131073), std::out_of_range);
}

TEST(LengthBucket, NamesRoundTrip) {
  for (auto b : all_length_buckets()) EXPECT_EQ(parse_length_bucket(to_string(b)), b);
  EXPECT_EQ(to_string(LengthBucket::B0_16K), "0-16K");
}

TEST(Segment, SingleParagraphIsOneFragment) {
  const auto doc = make_document("d", Language::en, Domain::law, words(40, "w"));
  const auto frags = segment(doc, 1);
  ASSERT_EQ(frags.size(), 1u);
  EXPECT_EQ(frags[0].text, doc.text);
  EXPECT_EQ(frags[0].span.begin, 0u);
  EXPECT_EQ(frags[0].span.end, doc.text.size());
}

TEST(Segment, TenEqualParagraphsGiveTwoDisjointFragments) {
  std::string text;
  for (int i = 0; i < 10; ++i) text += (i ? "\n\n" : "") + words(300, "p" + std::to_string(i) + "w");
  const auto doc = make_document("d", Language::en, Domain::books, text);
  const auto frags = segment(doc, 2);
  ASSERT_EQ(frags.size(), 2u);
  EXPECT_LT(frags[0].index, frags[1].index);
  EXPECT_LE(frags[0].span.end, frags[1].span.begin);
  for (const auto& f : frags) {
    EXPECT_EQ(doc.text.substr(f.span.begin, f.span.size()), f.text);
    EXPECT_GE(count_tokens(f.text), 512u);
    EXPECT_LE(count_tokens(f.text), 2048u);
  }
}

TEST(Segment, ReturnsAllAdmissibleWhenFewerThanRequested) {
  std::string text;
  for (int i = 0; i < 3; ++i) text += (i ? "\n\n" : "") + words(1500, "q" + std::to_string(i) + "w");
  const auto doc = make_document("d", Language::en, Domain::books, text);
  EXPECT_EQ(segment(doc, 5).size(), 3u);
}

TEST(Segment, StrictModeRejectsShortDocumentForManyFragments) {
  const auto doc = make_document("d", Language::en, Domain::books, words(100, "w"));
  SegmentConfig strict;
  strict.strict = true;
  EXPECT_THROW(segment(doc, 3, strict), InputError);
  EXPECT_EQ(segment(doc, 3).size(), 1u);
}

TEST(Segment, CjkParagraphsPackByCharacterCount) {
  std::string paragraph;
  for (int k = 0; k < 700; ++k) paragraph += "字";
  std::string text;
  for (int i = 0; i < 4; ++i) text += (i ? "\n\n" : "") + paragraph;
  const auto doc = make_document("z", Language::zh, Domain::law, text);
  EXPECT_EQ(doc.token_count, 2800u);
  const auto frags = pack_paragraphs(doc, {});
  ASSERT_EQ(frags.size(), 2u);
  EXPECT_EQ(count_tokens(frags[0].text), 1400u);
}

TEST(Segment, SelectionPrefersLexicallyDiverseFragments) {
  const std::string repetitive = [] {
    std::string s;
    for (int i = 0; i < 600; ++i) s += "same ";
    return s;
  }();
  const std::string text = repetitive + "\n\n" + words(1800, "a") + "\n\n" + repetitive;
  const auto doc = make_document("d", Language::en, Domain::books, text);
  const auto frags = segment(doc, 1);
  ASSERT_EQ(frags.size(), 1u);
  EXPECT_EQ(frags[0].index, 1u);
}

TEST(MakeDocument, TruncatesAtParagraphUnderCap) {
  std::string text = words(100000, "a") + "\n\n" + words(40000, "b");
  bool truncated = false;
  const auto doc = make_document("big", Language::en, Domain::other, text, &truncated);
  EXPECT_TRUE(truncated);
  EXPECT_EQ(doc.token_count, 100000u);
}

TEST(MakeDocument, RejectsEmptyText) {
  EXPECT_THROW(make_document("e", Language::en, Domain::other, "  \n "), InputError);
}

TEST(LoadDocuments, DirectoryWithSidecars) {
  const auto dir = scratch("dir");
  write(dir / "b.txt", "Second doc.");
  write(dir / "a.txt", "第一篇文档。");
  write(dir / "a.meta.json", R"({"language":"zh","domain":"law"})");
  write(dir / "c.txt", "Third doc.");
  write(dir / "c.meta.json", R"({"domain":"books"})");
  const auto docs = load_documents(dir, CorpusFormat::plain_text_directory);
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0].id, "a");
  EXPECT_EQ(docs[0].language, Language::zh);
  EXPECT_EQ(docs[0].domain, Domain::law);
  EXPECT_EQ(docs[1].id, "b");
  EXPECT_EQ(docs[1].domain, Domain::other);
  EXPECT_EQ(docs[2].domain, Domain::books);
  const auto again = load_documents(dir, CorpusFormat::plain_text_directory);
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(docs[i].id, again[i].id);
}

TEST(LoadDocuments, RecordMissingTextNamesTheLine) {
  const auto dir = scratch("jsonl");
  write(dir / "c.jsonl", "{\"id\":\"x\",\"language\":\"en\",\"domain\":\"law\",\"text\":\"ok\"}\n{\"id\":\"y\"}\n");
  try {
    load_documents(dir / "c.jsonl", CorpusFormat::line_delimited_records);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  LoadOptions skip;
  skip.skip_malformed = true;
  EXPECT_EQ(load_documents(dir / "c.jsonl", CorpusFormat::line_delimited_records, skip).size(), 1u);
}

TEST(LoadDocuments, BundledFixtureCoversEveryBucket) {
  const auto docs = load_documents(oracle::fixtures_dir() / "corpus20", CorpusFormat::plain_text_directory);
  ASSERT_EQ(docs.size(), 20u);
  std::set<LengthBucket> buckets;
  std::set<Language> langs;
  for (const auto& d : docs) {
    buckets.insert(length_bucket(d.token_count));
    langs.insert(d.language);
  }
  EXPECT_EQ(buckets.size(), 4u);
  EXPECT_EQ(langs.size(), 2u);
}
