#include "factguard/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "factguard/text.hpp"

namespace factguard {

LexicalIndex LexicalIndex::build(const std::vector<Fragment>& fragments, Bm25Params params) {
  if (fragments.empty()) throw std::invalid_argument("build_index: empty fragment list");
  LexicalIndex index;
  index.params_ = params;
  index.entries_.reserve(fragments.size());
  std::size_t total = 0;
  for (const auto& f : fragments) {
    Entry e;
    e.ref = {f.doc_id, f.index};
    for (auto& t : text::terms(f.text)) {
      ++e.term_frequency[t];
      ++e.length;
    }
    for (const auto& [term, _] : e.term_frequency) ++index.document_frequency_[term];
    total += e.length;
    index.entries_.push_back(std::move(e));
  }
  index.average_length_ = static_cast<double>(total) / static_cast<double>(fragments.size());
  return index;
}

std::size_t LexicalIndex::document_frequency(const std::string& term) const {
  const auto it = document_frequency_.find(term);
  return it == document_frequency_.end() ? 0 : it->second;
}

double LexicalIndex::idf(const std::string& term) const {
  const auto n = static_cast<double>(entries_.size());
  const auto df = static_cast<double>(document_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<ScoredFragment> LexicalIndex::top_n(std::string_view query, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("top_n: n must be >= 1");
  auto query_terms = text::terms(query);
  std::sort(query_terms.begin(), query_terms.end());
  query_terms.erase(std::unique(query_terms.begin(), query_terms.end()), query_terms.end());
  std::vector<std::pair<std::string, double>> weighted;
  for (auto& t : query_terms) {
    if (document_frequency(t) > 0) {
      const double w = idf(t);
      weighted.emplace_back(std::move(t), w);
    }
  }
  if (weighted.empty()) return {};

  std::vector<ScoredFragment> scored;
  scored.reserve(entries_.size());
  const double avg = average_length_ > 0.0 ? average_length_ : 1.0;
  for (const auto& e : entries_) {
    const double norm = params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(e.length) / avg);
    double score = 0.0;
    bool matched = false;
    for (const auto& [term, w] : weighted) {
      const auto it = e.term_frequency.find(term);
      if (it == e.term_frequency.end()) continue;
      const auto tf = static_cast<double>(it->second);
      score += w * tf * (params_.k1 + 1.0) / (tf + norm);
      matched = true;
    }
    if (matched) scored.push_back({e.ref, score});
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredFragment& a, const ScoredFragment& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.ref.index != b.ref.index) return a.ref.index < b.ref.index;
    return a.ref.doc_id < b.ref.doc_id;
  });
  if (scored.size() > n) scored.resize(n);
  return scored;
}

}  // namespace factguard
