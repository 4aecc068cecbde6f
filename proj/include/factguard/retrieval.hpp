#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factguard/agents.hpp"
#include "factguard/corpus.hpp"

namespace factguard {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredFragment {
  FragmentRef ref;
  double score = 0.0;
};

/// Immutable BM25 index over the fragments of one article. Terms come from
/// the same token segmentation as token counting, lowercased with
/// surrounding punctuation removed.
class LexicalIndex {
 public:
  static LexicalIndex build(const std::vector<Fragment>& fragments, Bm25Params params = {});

  /// Up to n fragments sharing at least one term with the query, by
  /// descending BM25 score with ties to the lower fragment index. Repeated
  /// query terms count once.
  std::vector<ScoredFragment> top_n(std::string_view query, std::size_t n) const;

  std::size_t size() const { return entries_.size(); }
  double average_length() const { return average_length_; }
  std::size_t document_frequency(const std::string& term) const;
  std::size_t length(std::size_t entry) const { return entries_[entry].length; }
  const FragmentRef& ref(std::size_t entry) const { return entries_[entry].ref; }
  const Bm25Params& params() const { return params_; }

  /// BM25 idf, ln(1 + (N - df + 0.5) / (df + 0.5)).
  double idf(const std::string& term) const;

 private:
  struct Entry {
    FragmentRef ref;
    std::unordered_map<std::string, std::size_t> term_frequency;
    std::size_t length = 0;
  };

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> document_frequency_;
  double average_length_ = 0.0;
  Bm25Params params_;
};

}  // namespace factguard
