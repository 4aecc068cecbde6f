#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace factguard::text {

/// Half-open byte interval [begin, end) into a UTF-8 string.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

/// Decodes the codepoint starting at `pos`. Invalid sequences decode as the
/// single byte value with length 1.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* length);

bool is_ascii_space(char c);

/// CJK ideographs, kana, hangul, CJK punctuation and fullwidth forms.
bool is_cjk(char32_t cp);

/// Token segmentation shared by token counting and lexical retrieval:
/// maximal runs of non-whitespace, non-CJK characters form one token and
/// every CJK codepoint is its own token.
std::vector<ByteSpan> token_spans(std::string_view s);

std::size_t count_tokens(std::string_view s);

/// Lowercased term for a token with surrounding punctuation stripped; empty
/// when the token is punctuation only.
std::string normalize_term(std::string_view token);

/// Index terms for `s` (empty normalized terms removed).
std::vector<std::string> terms(std::string_view s);

/// Collapses every run of ASCII whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

/// Whitespace-collapsed view of a text with a map back to source offsets.
/// Unlike normalize_whitespace, leading/trailing runs are kept (as one space)
/// so every normalized byte maps to a source byte.
struct NormalizedText {
  std::string text;
  std::vector<std::size_t> source_offset;  // size text.size() + 1

  static NormalizedText from(std::string_view source);

  /// Source span covered by normalized bytes [begin, end).
  ByteSpan to_source(std::size_t begin, std::size_t end) const;
};

/// Every source span whose whitespace-normalized form equals the normalized
/// needle. Matches are non-overlapping, scanned left to right.
std::vector<ByteSpan> find_normalized(std::string_view haystack, std::string_view needle);

bool contains_normalized(std::string_view haystack, std::string_view needle);

/// Sentence spans: split after . ! ? (followed by whitespace or end), after
/// the CJK terminators, and at line breaks. Spans exclude surrounding
/// whitespace.
std::vector<ByteSpan> sentence_spans(std::string_view s);

/// True for . ! ? and their CJK fullwidth forms.
bool is_sentence_terminator(char32_t cp);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Largest offset <= pos that does not split a UTF-8 sequence.
std::size_t utf8_floor(std::string_view s, std::size_t pos);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

}  // namespace factguard::text
