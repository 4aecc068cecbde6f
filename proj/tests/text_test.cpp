#include <gtest/gtest.h>

#include <random>

#include "factguard/text.hpp"
#include "support/oracles.hpp"

namespace t = factguard::text;

TEST(CountTokens, EmptyIsZero) { EXPECT_EQ(t::count_tokens(""), 0u); }

TEST(CountTokens, AsciiWords) { EXPECT_EQ(t::count_tokens("hello world"), 2u); }

TEST(CountTokens, EachCjkCharacterIsAToken) { EXPECT_EQ(t::count_tokens("苹果树"), 3u); }

TEST(CountTokens, MixedScriptMatchesOracle) {
  const std::vector<std::string> samples{"iPhone XS 于2018年发布。", "  a\tb\n\nc  ", "第3条：租户须", "Mr. 王先生",
                                         "ｆｕｌｌ　width", "한국어 텍스트"};
  for (const auto& s : samples) EXPECT_EQ(t::count_tokens(s), oracle::tokens(s).size()) << s;
}

TEST(Terms, MatchOracleOnRandomText) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> pieces{"Word", "word,", "(Paren)", "中", "文", "，", "。", "x-y", " ", "\n", "\"q\"",
                                        "2018", "...", "“引”"};
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int k = 0; k < 30; ++k) s += pieces[rng() % pieces.size()];
    EXPECT_EQ(t::terms(s), oracle::bm25_terms(s)) << s;
  }
}

TEST(NormalizeWhitespace, CollapsesAndTrims) {
  EXPECT_EQ(t::normalize_whitespace("  a \t\n b  "), "a b");
  EXPECT_EQ(t::normalize_whitespace(""), "");
}

TEST(FindNormalized, MatchesAcrossLineBreaks) {
  const std::string hay = "The ship\n  sailed at dawn. The ship sailed at dawn.";
  const auto spans = t::find_normalized(hay, "ship sailed");
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(hay.substr(spans[0].begin, spans[0].size()), "ship\n  sailed");
  EXPECT_EQ(hay.substr(spans[1].begin, spans[1].size()), "ship sailed");
}

TEST(FindNormalized, AgreesWithOracle) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces{"ab", " ", "\n", "\t", "中", "ab ", "b a"};
  for (int i = 0; i < 300; ++i) {
    std::string hay;
    std::string needle;
    for (int k = 0; k < 20; ++k) hay += pieces[rng() % pieces.size()];
    for (int k = 0; k < 3; ++k) needle += pieces[rng() % pieces.size()];
    if (t::normalize_whitespace(needle).empty()) continue;
    EXPECT_EQ(t::contains_normalized(hay, needle), oracle::contains_normalized(hay, needle)) << hay << "|" << needle;
  }
}

TEST(SentenceSpans, SplitsOnTerminatorsAndLines) {
  const std::string s = "First one. Second? Third!\n第四句。第五句";
  std::vector<std::string> got;
  for (const auto& sp : t::sentence_spans(s)) got.push_back(s.substr(sp.begin, sp.size()));
  EXPECT_EQ(got, (std::vector<std::string>{"First one.", "Second?", "Third!", "第四句。", "第五句"}));
}

TEST(SentenceSpans, TitlesDoNotEndSentences) {
  const std::string s = "Mr. Smith met Dr. Jones. They left.";
  std::vector<std::string> got;
  for (const auto& sp : t::sentence_spans(s)) got.push_back(s.substr(sp.begin, sp.size()));
  EXPECT_EQ(got, (std::vector<std::string>{"Mr. Smith met Dr. Jones.", "They left."}));
}

TEST(SentenceSpans, DecimalPointIsNotATerminator) {
  const std::string s = "Rate was 3.5 percent. Done.";
  EXPECT_EQ(t::sentence_spans(s).size(), 2u);
}

TEST(Utf8Floor, NeverSplitsACodepoint) {
  const std::string s = "a中b";
  EXPECT_EQ(t::utf8_floor(s, 0), 0u);
  EXPECT_EQ(t::utf8_floor(s, 2), 1u);
  EXPECT_EQ(t::utf8_floor(s, 3), 1u);
  EXPECT_EQ(t::utf8_floor(s, 4), 4u);
}

TEST(NormalizedText, MapsBackToSource) {
  const std::string src = "a  b\n\nc";
  const auto n = t::NormalizedText::from(src);
  EXPECT_EQ(n.text, "a b c");
  const auto span = n.to_source(2, 5);
  EXPECT_EQ(src.substr(span.begin, span.size()), "b\n\nc");
}
