#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factguard/agents.hpp"
#include "factguard/corpus.hpp"
#include "factguard/outcome.hpp"
#include "factguard/retrieval.hpp"

namespace factguard {

enum class Label { answerable, lack_of_evidence, misleading };
inline constexpr std::size_t kLabelCount = 3;

std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);
const std::vector<Label>& all_labels();
inline bool is_unanswerable(Label l) { return l != Label::answerable; }

struct Provenance {
  std::string doc_id;
  std::size_t fragment_index = 0;
  std::optional<RewriteStrategy> strategy;
  /// Evidence as located in the source fragment.
  std::string evidence;
  /// Question before rewriting (misleading examples only).
  std::optional<std::string> original_question;
  /// Byte offset in the context of the evidence, or of the first deletion
  /// for lack-of-evidence examples.
  std::optional<std::size_t> evidence_offset;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct BenchmarkExample {
  std::string id;
  std::string context;
  std::string question;
  std::string gold_answer;
  Label label = Label::answerable;
  Language language = Language::en;
  Domain domain = Domain::other;
  LengthBucket length_bucket = LengthBucket::B0_16K;
  Provenance provenance;

  friend bool operator==(const BenchmarkExample&, const BenchmarkExample&) = default;
};

enum class Stage { preparation, qa_generation, negative_generation, review };
inline constexpr std::size_t kStageCount = 4;
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct StageCounts {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::map<DropReason, std::size_t> dropped;

  std::size_t total_dropped() const;
  friend bool operator==(const StageCounts&, const StageCounts&) = default;
};

/// Per-stage attrition counts of one synthesis run.
struct AttritionReport {
  std::array<StageCounts, kStageCount> stages{};

  StageCounts& at(Stage s) { return stages[static_cast<std::size_t>(s)]; }
  const StageCounts& at(Stage s) const { return stages[static_cast<std::size_t>(s)]; }

  /// Throws ValidationError unless input = kept + dropped for every stage and
  /// each stage's input equals the previous stage's kept.
  void validate() const;

  /// One record per stage: {"stage", "input", "kept", "dropped": {reason: n}}.
  std::string to_jsonl() const;
  static AttritionReport from_jsonl(std::string_view data);

  friend bool operator==(const AttritionReport&, const AttritionReport&) = default;
};

struct StageRetention {
  Stage stage = Stage::preparation;
  double retention = 1.0;
  /// Set when the stage had no (quality-relevant) input; retention is 1.0.
  bool zero_input = false;
  /// review_error drops left out of the review denominator.
  std::size_t excluded = 0;
};

struct Funnel {
  std::array<StageRetention, kStageCount> stages{};
  double overall = 1.0;
};

/// Per-stage kept/input ratios after validating the report. review_error
/// drops are transport failures, so they are removed from the review stage
/// denominator and from the overall denominator.
Funnel funnel(const AttritionReport& report);

struct SynthesisConfig {
  /// Fragments (and QA pairs) requested per document.
  std::size_t alpha = 1;
  /// Fragments scoring at or below this are dropped.
  int quality_threshold = 3;
  /// Target proportions for answerable, lack_of_evidence, misleading.
  std::array<double, kLabelCount> label_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::size_t review_top_n = 5;
  std::uint64_t seed = 0;
  SegmentConfig segment{};
  Bm25Params bm25{};
  std::vector<RewriteStrategy> strategies{RewriteStrategy::entity_substitution,
                                          RewriteStrategy::impossible_condition,
                                          RewriteStrategy::other_false_assumption};
  std::size_t workers = 1;

  /// Throws ConfigError listing every problem found.
  void validate() const;
};

struct SynthesisResult {
  std::vector<BenchmarkExample> examples;
  AttritionReport report;
  /// Documents whose segmentation failed (logged, not part of the funnel).
  std::size_t documents_skipped = 0;
  bool interrupted = false;
};

/// The agent console. Stops taking new work when *cancel becomes true.
SynthesisResult run(const std::vector<Document>& corpus, const SynthesisConfig& config,
                    const Agents& agents, const std::atomic<bool>* cancel = nullptr);

/// Deterministic smooth round-robin over label_mix; the seed rotates the
/// tie-break order.
std::vector<Label> assign_labels(std::size_t count, const std::array<double, kLabelCount>& mix,
                                 std::uint64_t seed);

struct EvidenceDeletion {
  std::string context;
  std::size_t first_offset = 0;
};

/// Removes every whitespace-normalized occurrence of `evidence`, widened to
/// the enclosing sentences, until none remains.
Outcome<EvidenceDeletion> make_lack_of_evidence(std::string_view document_text, std::string_view evidence);

Outcome<std::string> make_misleading(const QATuple& tuple, const Fragment& fragment, const Agents& agents,
                                     RewriteStrategy strategy);

struct ReviewConfig {
  std::size_t top_n = 5;
};

/// Retrieval-backed conflict check plus a context-free common-sense check.
/// Returns nullopt to keep the candidate.
std::optional<Drop> review(const BenchmarkExample& candidate, const std::vector<Fragment>& fragments,
                           const LexicalIndex& index, const Agents& agents, const ReviewConfig& config);

/// Example id for a fragment-level tuple.
std::string example_id(const FragmentRef& ref);

}  // namespace factguard
