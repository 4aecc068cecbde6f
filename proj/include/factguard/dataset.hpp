#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "factguard/corpus.hpp"
#include "factguard/pipeline.hpp"

namespace factguard {

// Line-delimited example records. Field order is fixed; strings are JSON
// escaped so every record stays on one line.
nlohmann::ordered_json to_json(const BenchmarkExample& ex);
/// Throws InputError (without a line number) on a structurally invalid record.
BenchmarkExample example_from_json(const nlohmann::json& j);

std::string serialize_examples(const std::vector<BenchmarkExample>& examples);
/// Blank lines are skipped; anything else must be a full record.
std::vector<BenchmarkExample> parse_examples(std::string_view data);

std::size_t write_examples(const std::vector<BenchmarkExample>& examples, const std::filesystem::path& path);
std::vector<BenchmarkExample> read_examples(const std::filesystem::path& path);

enum class Split { train, development, test };
inline constexpr std::size_t kSplitCount = 3;
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);
const std::vector<Split>& all_splits();

using SplitRatios = std::array<double, kSplitCount>;
inline constexpr SplitRatios kDefaultSplitRatios{0.76, 0.07, 0.17};

struct DatasetSplit {
  std::map<std::string, Split> by_example;
  std::map<std::string, Split> by_document;

  Split of(const BenchmarkExample& ex) const { return by_example.at(ex.id); }
  std::vector<BenchmarkExample> select(const std::vector<BenchmarkExample>& examples, Split s) const;
};

/// Groups examples by source document, shuffles the groups with the seed,
/// then gives each group to the split furthest below its target example
/// count (ties to the earlier split). Splits with ratio 0 receive nothing.
DatasetSplit assign_splits(const std::vector<BenchmarkExample>& examples, const SplitRatios& ratios,
                           std::uint64_t seed);

struct CountPair {
  std::size_t examples = 0;
  std::size_t articles = 0;
  friend bool operator==(const CountPair&, const CountPair&) = default;
};

struct StatsReport {
  CountPair total;
  std::map<Language, CountPair> by_language;
  std::map<Domain, std::size_t> by_domain;
  std::map<Label, std::size_t> by_label;
  std::map<LengthBucket, std::size_t> by_bucket;

  /// Throws ValidationError if a breakdown does not sum to the total or
  /// articles exceed examples.
  void validate() const;
};

StatsReport compute_stats(const std::vector<BenchmarkExample>& examples);

/// Named report rows, e.g. {"train", ...}, rendered as an aligned table of
/// examples and articles per language followed by the distributions.
std::string render_stats_text(const std::vector<std::pair<std::string, StatsReport>>& reports);
nlohmann::ordered_json stats_to_json(const std::vector<std::pair<std::string, StatsReport>>& reports);

struct ReviewRow {
  std::string id;
  Label label = Label::answerable;
  Language language = Language::en;
  std::string excerpt;
  std::string question;
  std::string gold_answer;
};

/// Seeded uniform sample without replacement, in draw order.
std::vector<ReviewRow> sample_for_manual_review(const std::vector<BenchmarkExample>& examples, std::size_t k,
                                                std::uint64_t seed, std::size_t excerpt_bytes = 1200);

/// Tab-separated sheet with a header row and blank question_ok/answer_ok
/// columns. Tabs, newlines and backslashes in cells are escaped.
std::string render_review_sheet(const std::vector<ReviewRow>& rows);

/// Context window of about `bytes` bytes centred on `offset`, on UTF-8
/// boundaries, with "..." marking cut ends.
std::string excerpt_around(std::string_view context, std::size_t offset, std::size_t bytes);

}  // namespace factguard
