#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factguard/text.hpp"

namespace factguard {

enum class Language { en, zh };
enum class Domain { law, books, other };

enum class TopicCategory { time, numeric, location, person, organization, event, object };
inline constexpr std::size_t kTopicCategoryCount = 7;

/// Token-count intervals (lo, hi] used for length breakdowns.
enum class LengthBucket { B0_16K, B16_32K, B32_64K, B64_128K };

inline constexpr std::size_t kMaxDocumentTokens = 131072;

std::string_view to_string(Language v);
std::string_view to_string(Domain v);
std::string_view to_string(TopicCategory v);
std::string_view to_string(LengthBucket v);

std::optional<Language> parse_language(std::string_view s);
std::optional<Domain> parse_domain(std::string_view s);
/// Accepts the canonical names plus common synonyms ("numerical", "date", ...).
std::optional<TopicCategory> parse_topic(std::string_view s);
std::optional<LengthBucket> parse_length_bucket(std::string_view s);

const std::vector<TopicCategory>& all_topics();
const std::vector<LengthBucket>& all_length_buckets();

struct Document {
  std::string id;
  Language language = Language::en;
  Domain domain = Domain::other;
  std::string text;
  std::size_t token_count = 0;
};

/// Builds a document, enforcing non-empty text and the token cap. Text above
/// kMaxDocumentTokens is cut at the last paragraph boundary under the cap.
/// Sets *truncated when that happened.
Document make_document(std::string id, Language language, Domain domain, std::string text,
                       bool* truncated = nullptr);

struct Fragment {
  std::string doc_id;
  std::size_t index = 0;
  text::ByteSpan span;
  std::string text;
  std::optional<int> quality_score;
  std::set<TopicCategory> topics;
};

struct SegmentConfig {
  std::size_t min_frag = 512;
  std::size_t max_frag = 2048;
  /// Fail instead of returning a single short fragment when n > 1 is
  /// requested from a document shorter than min_frag.
  bool strict = false;
};

std::size_t count_tokens(std::string_view text);

/// Greedy paragraph packing into [min_frag, max_frag]-token fragments, then
/// selection of the n most lexically diverse ones (returned in index order).
std::vector<Fragment> segment(const Document& doc, std::size_t n, const SegmentConfig& config = {});

/// All packed chunks of a document in order, before admissibility filtering.
std::vector<Fragment> pack_paragraphs(const Document& doc, const SegmentConfig& config);

/// Distinct-term ratio used to rank fragments for selection.
double lexical_diversity(std::string_view text);

LengthBucket length_bucket(std::size_t token_count);

enum class CorpusFormat { plain_text_directory, line_delimited_records };

struct LoadOptions {
  Language default_language = Language::en;
  Domain default_domain = Domain::other;
  /// Skip malformed records (with a warning) instead of failing.
  bool skip_malformed = false;
};

/// Directory mode reads *.txt (sorted by name, id = file stem) with optional
/// "<stem>.meta.json" sidecars holding {"language", "domain"}. Record mode
/// reads one JSON object per line with {id, language, domain, text}.
std::vector<Document> load_documents(const std::filesystem::path& path, CorpusFormat format,
                                     const LoadOptions& options = {});

}  // namespace factguard
