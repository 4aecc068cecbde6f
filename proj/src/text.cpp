#include "factguard/text.hpp"

#include <cctype>
#include <cstdio>

namespace factguard::text {

char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* length) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    *length = 1;
    return b0;
  }
  int need = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    *length = 1;
    return b0;
  }
  for (int i = 1; i <= need; ++i) {
    const int c = cont(static_cast<std::size_t>(i));
    if (c < 0) {
      *length = 1;
      return b0;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  *length = static_cast<std::size_t>(need) + 1;
  return cp;
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0x20000 && cp <= 0x2FA1F) ||  // extensions B+ and compatibility supplement
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x3001 && cp <= 0x30FF) ||    // CJK punctuation, hiragana, katakana
         (cp >= 0xAC00 && cp <= 0xD7AF) ||    // hangul syllables
         (cp >= 0xFF01 && cp <= 0xFF60);      // fullwidth forms
}

namespace {

bool is_cjk_punct(char32_t cp) {
  return (cp >= 0x3001 && cp <= 0x303F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF60);
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
         (u >= 0x7B && u <= 0x7E);
}

}  // namespace

std::vector<ByteSpan> token_spans(std::string_view s) {
  std::vector<ByteSpan> out;
  std::size_t run_start = std::string_view::npos;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(s, pos, &len);
    const bool space = len == 1 && is_ascii_space(s[pos]);
    const bool cjk = is_cjk(cp);
    if (space || cjk) {
      if (run_start != std::string_view::npos) {
        out.push_back({run_start, pos});
        run_start = std::string_view::npos;
      }
      if (cjk) out.push_back({pos, pos + len});
    } else if (run_start == std::string_view::npos) {
      run_start = pos;
    }
    pos += len;
  }
  if (run_start != std::string_view::npos) out.push_back({run_start, s.size()});
  return out;
}

std::size_t count_tokens(std::string_view s) { return token_spans(s).size(); }

std::string normalize_term(std::string_view token) {
  std::size_t begin = 0;
  std::size_t end = token.size();
  // CJK tokens are single codepoints; drop them when they are punctuation.
  std::size_t len = 0;
  if (!token.empty()) {
    const char32_t cp = decode_utf8(token, 0, &len);
    if (len == token.size() && is_cjk_punct(cp)) return {};
  }
  while (begin < end && is_ascii_punct(token[begin])) ++begin;
  while (end > begin && is_ascii_punct(token[end - 1])) --end;
  return to_lower_ascii(token.substr(begin, end - begin));
}

std::vector<std::string> terms(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& span : token_spans(s)) {
    auto t = normalize_term(s.substr(span.begin, span.size()));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

NormalizedText NormalizedText::from(std::string_view source) {
  NormalizedText n;
  n.text.reserve(source.size());
  n.source_offset.reserve(source.size() + 1);
  std::size_t i = 0;
  while (i < source.size()) {
    if (is_ascii_space(source[i])) {
      n.text.push_back(' ');
      n.source_offset.push_back(i);
      while (i < source.size() && is_ascii_space(source[i])) ++i;
    } else {
      n.text.push_back(source[i]);
      n.source_offset.push_back(i);
      ++i;
    }
  }
  n.source_offset.push_back(source.size());
  return n;
}

ByteSpan NormalizedText::to_source(std::size_t begin, std::size_t end) const {
  return {source_offset[begin], source_offset[end]};
}

std::vector<ByteSpan> find_normalized(std::string_view haystack, std::string_view needle) {
  const std::string pattern = normalize_whitespace(needle);
  std::vector<ByteSpan> out;
  if (pattern.empty()) return out;
  const auto norm = NormalizedText::from(haystack);
  std::size_t from = 0;
  while (true) {
    const auto hit = norm.text.find(pattern, from);
    if (hit == std::string::npos) break;
    out.push_back(norm.to_source(hit, hit + pattern.size()));
    from = hit + pattern.size();
  }
  return out;
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
  const std::string pattern = normalize_whitespace(needle);
  if (pattern.empty()) return false;
  return NormalizedText::from(haystack).text.find(pattern) != std::string::npos;
}

bool is_sentence_terminator(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F;
}

namespace {

bool is_closing_quote(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == 0x201D || cp == 0x2019 || cp == 0x300D ||
         cp == 0x300F || cp == 0xFF09;
}

}  // namespace

namespace {

// Honorifics whose period does not end a sentence.
bool ends_with_title(std::string_view upto_period) {
  static constexpr std::string_view kTitles[] = {"Mr.", "Mrs.", "Ms.", "Dr.", "St.", "Prof.", "Capt.", "Gen."};
  for (std::string_view t : kTitles) {
    if (upto_period.size() < t.size() || upto_period.substr(upto_period.size() - t.size()) != t) continue;
    const std::size_t before = upto_period.size() - t.size();
    if (before == 0 || !std::isalpha(static_cast<unsigned char>(upto_period[before - 1]))) return true;
  }
  return false;
}

}  // namespace

std::vector<ByteSpan> sentence_spans(std::string_view s) {
  std::vector<ByteSpan> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && is_ascii_space(s[b])) ++b;
    while (e > b && is_ascii_space(s[e - 1])) --e;
    if (b < e) out.push_back({b, e});
  };
  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (s[pos] == '\n') {
      emit(start, pos);
      start = ++pos;
      continue;
    }
    std::size_t len = 1;
    const char32_t cp = decode_utf8(s, pos, &len);
    pos += len;
    if (!is_sentence_terminator(cp)) continue;
    std::size_t end = pos;
    while (end < s.size()) {
      std::size_t qlen = 1;
      const char32_t q = decode_utf8(s, end, &qlen);
      if (!is_closing_quote(q)) break;
      end += qlen;
    }
    if (cp < 0x80 && end < s.size() && !is_ascii_space(s[end])) continue;
    if (cp == '.' && ends_with_title(s.substr(start, pos - start))) continue;
    emit(start, end);
    start = pos = end;
  }
  emit(start, s.size());
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::size_t utf8_floor(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return s.size();
  while (pos > 0 && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) --pos;
  return pos;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace factguard::text
