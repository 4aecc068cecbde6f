#include "factguard/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "factguard/errors.hpp"

namespace factguard {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Language v) { return v == Language::en ? "en" : "zh"; }

std::string_view to_string(Domain v) {
  switch (v) {
    case Domain::law: return "law";
    case Domain::books: return "books";
    case Domain::other: return "other";
  }
  return "other";
}

std::string_view to_string(TopicCategory v) {
  switch (v) {
    case TopicCategory::time: return "time";
    case TopicCategory::numeric: return "numeric";
    case TopicCategory::location: return "location";
    case TopicCategory::person: return "person";
    case TopicCategory::organization: return "organization";
    case TopicCategory::event: return "event";
    case TopicCategory::object: return "object";
  }
  return "object";
}

std::string_view to_string(LengthBucket v) {
  switch (v) {
    case LengthBucket::B0_16K: return "0-16K";
    case LengthBucket::B16_32K: return "16-32K";
    case LengthBucket::B32_64K: return "32-64K";
    case LengthBucket::B64_128K: return "64-128K";
  }
  return "0-16K";
}

std::optional<Language> parse_language(std::string_view s) {
  const auto v = text::to_lower_ascii(text::trim(s));
  if (v == "en") return Language::en;
  if (v == "zh") return Language::zh;
  return std::nullopt;
}

std::optional<Domain> parse_domain(std::string_view s) {
  const auto v = text::to_lower_ascii(text::trim(s));
  if (v == "law") return Domain::law;
  if (v == "books" || v == "book") return Domain::books;
  if (v == "other") return Domain::other;
  return std::nullopt;
}

std::optional<TopicCategory> parse_topic(std::string_view s) {
  const auto v = text::to_lower_ascii(text::trim(s));
  if (v == "time" || v == "date" || v == "dates") return TopicCategory::time;
  if (v == "numeric" || v == "numerical" || v == "number" || v == "numbers" ||
      v == "numerical values" || v == "numerical value")
    return TopicCategory::numeric;
  if (v == "location" || v == "locations" || v == "place") return TopicCategory::location;
  if (v == "person" || v == "persons" || v == "people") return TopicCategory::person;
  if (v == "organization" || v == "organizations" || v == "organisation" ||
      v == "organisations")
    return TopicCategory::organization;
  if (v == "event" || v == "events") return TopicCategory::event;
  if (v == "object" || v == "objects") return TopicCategory::object;
  return std::nullopt;
}

std::optional<LengthBucket> parse_length_bucket(std::string_view s) {
  for (auto b : all_length_buckets()) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

const std::vector<TopicCategory>& all_topics() {
  static const std::vector<TopicCategory> v{
      TopicCategory::time,         TopicCategory::numeric, TopicCategory::location,
      TopicCategory::person,       TopicCategory::organization, TopicCategory::event,
      TopicCategory::object};
  return v;
}

const std::vector<LengthBucket>& all_length_buckets() {
  static const std::vector<LengthBucket> v{LengthBucket::B0_16K, LengthBucket::B16_32K,
                                           LengthBucket::B32_64K, LengthBucket::B64_128K};
  return v;
}

std::size_t count_tokens(std::string_view text) { return text::count_tokens(text); }

namespace {

// Paragraphs are maximal runs of non-blank lines.
std::vector<text::ByteSpan> paragraph_spans(std::string_view s) {
  std::vector<text::ByteSpan> out;
  std::size_t pos = 0;
  std::size_t para_begin = std::string_view::npos;
  std::size_t para_end = 0;
  while (pos <= s.size()) {
    const auto nl = s.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? s.size() : nl;
    const auto line = s.substr(pos, line_end - pos);
    const bool blank = std::all_of(line.begin(), line.end(), text::is_ascii_space);
    if (blank) {
      if (para_begin != std::string_view::npos) {
        out.push_back({para_begin, para_end});
        para_begin = std::string_view::npos;
      }
    } else {
      std::size_t b = pos;
      while (text::is_ascii_space(s[b])) ++b;
      std::size_t e = line_end;
      while (e > b && text::is_ascii_space(s[e - 1])) --e;
      if (para_begin == std::string_view::npos) para_begin = b;
      para_end = e;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (para_begin != std::string_view::npos) out.push_back({para_begin, para_end});
  return out;
}

struct Unit {
  text::ByteSpan span;
  std::size_t tokens = 0;
};

// Splits an oversized span into pieces of at most max_tokens, preferring
// sentence ends and falling back to token boundaries.
void split_oversized(std::string_view s, text::ByteSpan span, std::size_t max_tokens,
                     std::vector<Unit>& out) {
  const auto body = s.substr(span.begin, span.size());
  std::vector<Unit> sentences;
  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t len = 1;
    const char32_t cp = text::decode_utf8(body, pos, &len);
    pos += len;
    if (!text::is_sentence_terminator(cp)) continue;
    const bool cjk_stop = cp > 0x7F;
    if (!cjk_stop && pos < body.size() && !text::is_ascii_space(body[pos])) continue;
    sentences.push_back({{span.begin + start, span.begin + pos}, 0});
    while (pos < body.size() && text::is_ascii_space(body[pos])) ++pos;
    start = pos;
  }
  if (start < body.size()) sentences.push_back({{span.begin + start, span.begin + body.size()}, 0});

  Unit current{};
  bool open = false;
  auto flush = [&] {
    if (open) out.push_back(current);
    open = false;
  };
  for (auto& sentence : sentences) {
    const auto stext = s.substr(sentence.span.begin, sentence.span.size());
    sentence.tokens = text::count_tokens(stext);
    if (sentence.tokens > max_tokens) {
      flush();
      const auto toks = text::token_spans(stext);
      for (std::size_t i = 0; i < toks.size(); i += max_tokens) {
        const std::size_t last = std::min(toks.size(), i + max_tokens) - 1;
        out.push_back({{sentence.span.begin + toks[i].begin, sentence.span.begin + toks[last].end},
                       last - i + 1});
      }
      continue;
    }
    if (open && current.tokens + sentence.tokens <= max_tokens) {
      current.span.end = sentence.span.end;
      current.tokens += sentence.tokens;
    } else {
      flush();
      current = sentence;
      open = true;
    }
  }
  flush();
}

}  // namespace

Document make_document(std::string id, Language language, Domain domain, std::string text,
                       bool* truncated) {
  if (truncated != nullptr) *truncated = false;
  if (text::trim(text).empty()) throw InputError("document '" + id + "' has empty text");
  std::size_t tokens = text::count_tokens(text);
  if (tokens > kMaxDocumentTokens) {
    std::size_t cut = 0;
    std::size_t running = 0;
    for (const auto& p : paragraph_spans(text)) {
      const std::size_t t = text::count_tokens(std::string_view(text).substr(p.begin, p.size()));
      if (running + t > kMaxDocumentTokens) break;
      running += t;
      cut = p.end;
    }
    if (cut == 0) {
      const auto toks = text::token_spans(text);
      cut = toks[kMaxDocumentTokens - 1].end;
    }
    spdlog::warn("document '{}' has {} tokens; truncated to the last paragraph boundary under {}",
                 id, tokens, kMaxDocumentTokens);
    text.resize(cut);
    tokens = text::count_tokens(text);
    if (truncated != nullptr) *truncated = true;
  }
  return Document{std::move(id), language, domain, std::move(text), tokens};
}

std::vector<Fragment> pack_paragraphs(const Document& doc, const SegmentConfig& config) {
  if (config.min_frag == 0 || config.max_frag < config.min_frag)
    throw ConfigError("segment bounds require 0 < min_frag <= max_frag");
  const std::string_view s = doc.text;
  std::vector<Unit> units;
  for (const auto& p : paragraph_spans(s)) {
    const std::size_t t = text::count_tokens(s.substr(p.begin, p.size()));
    if (t > config.max_frag) {
      split_oversized(s, p, config.max_frag, units);
    } else {
      units.push_back({p, t});
    }
  }

  std::vector<Fragment> chunks;
  Unit current{};
  bool open = false;
  auto flush = [&] {
    if (!open) return;
    Fragment f;
    f.doc_id = doc.id;
    f.index = chunks.size();
    f.span = current.span;
    f.text = std::string(s.substr(current.span.begin, current.span.size()));
    chunks.push_back(std::move(f));
    open = false;
  };
  for (const auto& u : units) {
    if (open && current.tokens + u.tokens <= config.max_frag) {
      current.span.end = u.span.end;
      current.tokens += u.tokens;
    } else {
      flush();
      current = u;
      open = true;
    }
  }
  flush();
  return chunks;
}

double lexical_diversity(std::string_view s) {
  const auto ts = text::terms(s);
  if (ts.empty()) return 0.0;
  const std::unordered_set<std::string> distinct(ts.begin(), ts.end());
  return static_cast<double>(distinct.size()) / static_cast<double>(ts.size());
}

std::vector<Fragment> segment(const Document& doc, std::size_t n, const SegmentConfig& config) {
  if (n == 0) throw std::invalid_argument("segment: n must be >= 1");
  if (text::trim(doc.text).empty()) throw InputError("segment: document '" + doc.id + "' is empty");
  if (config.strict && n > 1 && text::count_tokens(doc.text) < config.min_frag)
    throw InputError("segment: document '" + doc.id + "' is shorter than min_frag (" +
                     std::to_string(config.min_frag) + " tokens)");

  auto chunks = pack_paragraphs(doc, config);
  std::vector<Fragment> admissible;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const bool last = i + 1 == chunks.size();
    if (last || text::count_tokens(chunks[i].text) >= config.min_frag)
      admissible.push_back(std::move(chunks[i]));
  }
  if (admissible.size() <= n) return admissible;

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(admissible.size());
  for (std::size_t i = 0; i < admissible.size(); ++i)
    ranked.emplace_back(lexical_diversity(admissible[i].text), i);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  ranked.resize(n);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<Fragment> out;
  out.reserve(n);
  for (const auto& r : ranked) out.push_back(std::move(admissible[r.second]));
  return out;
}

LengthBucket length_bucket(std::size_t token_count) {
  if (token_count == 0 || token_count > kMaxDocumentTokens)
    throw std::out_of_range("length_bucket: token count " + std::to_string(token_count) +
                            " outside (0, 131072]");
  if (token_count <= 16384) return LengthBucket::B0_16K;
  if (token_count <= 32768) return LengthBucket::B16_32K;
  if (token_count <= 65536) return LengthBucket::B32_64K;
  return LengthBucket::B64_128K;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Enum>
Enum field_or(const json& rec, const char* key, Enum fallback,
              std::optional<Enum> (*parse)(std::string_view), std::size_t line) {
  if (!rec.contains(key) || rec[key].is_null()) return fallback;
  if (!rec[key].is_string()) throw InputError(std::string("field '") + key + "' must be a string", line);
  auto v = parse(rec[key].get<std::string>());
  if (!v) throw InputError(std::string("unknown ") + key + " '" + rec[key].get<std::string>() + "'", line);
  return *v;
}

std::vector<Document> load_directory(const fs::path& dir, const LoadOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError("not a readable directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    Language lang = options.default_language;
    Domain domain = options.default_domain;
    const auto sidecar = file.parent_path() / (id + ".meta.json");
    if (fs::exists(sidecar)) {
      json meta;
      try {
        meta = json::parse(read_file(sidecar));
      } catch (const json::exception& e) {
        throw InputError("malformed sidecar " + sidecar.string() + ": " + e.what());
      }
      lang = field_or(meta, "language", lang, parse_language, 0);
      domain = field_or(meta, "domain", domain, parse_domain, 0);
    }
    try {
      docs.push_back(make_document(id, lang, domain, read_file(file)));
    } catch (const InputError& e) {
      if (!options.skip_malformed) throw;
      spdlog::warn("skipping {}: {}", file.string(), e.what());
    }
  }
  return docs;
}

std::vector<Document> load_records(const fs::path& file, const LoadOptions& options) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot read " + file.string());
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception& e) {
        throw InputError(std::string("malformed record: ") + e.what(), lineno);
      }
      if (!rec.is_object()) throw InputError("record is not an object", lineno);
      if (!rec.contains("text") || !rec["text"].is_string())
        throw InputError("record is missing the \"text\" field", lineno);
      std::string id = file.stem().string() + ":" + std::to_string(lineno);
      if (rec.contains("id")) {
        if (rec["id"].is_string()) {
          id = rec["id"].get<std::string>();
        } else if (rec["id"].is_number_integer()) {
          id = std::to_string(rec["id"].get<long long>());
        } else {
          throw InputError("field 'id' must be a string or integer", lineno);
        }
      }
      const auto lang = field_or(rec, "language", options.default_language, parse_language, lineno);
      const auto domain = field_or(rec, "domain", options.default_domain, parse_domain, lineno);
      if (seen.count(id) != 0) throw InputError("duplicate document id '" + id + "'", lineno);
      Document doc;
      try {
        doc = make_document(id, lang, domain, rec["text"].get<std::string>());
      } catch (const InputError& e) {
        throw InputError(e.what(), lineno);
      }
      seen.insert(id);
      docs.push_back(std::move(doc));
    } catch (const InputError& e) {
      if (!options.skip_malformed) throw;
      spdlog::warn("{}: {}", file.string(), e.what());
    }
  }
  return docs;
}

}  // namespace

std::vector<Document> load_documents(const fs::path& path, CorpusFormat format,
                                     const LoadOptions& options) {
  return format == CorpusFormat::plain_text_directory ? load_directory(path, options)
                                                       : load_records(path, options);
}

}  // namespace factguard
