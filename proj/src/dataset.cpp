#include "factguard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "factguard/errors.hpp"
#include "factguard/io.hpp"
#include "factguard/text.hpp"

namespace factguard {

using ojson = nlohmann::ordered_json;

nlohmann::ordered_json to_json(const BenchmarkExample& ex) {
  ojson p;
  p["doc_id"] = ex.provenance.doc_id;
  p["fragment_index"] = ex.provenance.fragment_index;
  p["strategy"] = ex.provenance.strategy ? ojson(to_string(*ex.provenance.strategy)) : ojson(nullptr);
  p["evidence"] = ex.provenance.evidence;
  p["original_question"] =
      ex.provenance.original_question ? ojson(*ex.provenance.original_question) : ojson(nullptr);
  p["evidence_offset"] = ex.provenance.evidence_offset ? ojson(*ex.provenance.evidence_offset) : ojson(nullptr);

  ojson j;
  j["id"] = ex.id;
  j["context"] = ex.context;
  j["question"] = ex.question;
  j["answer"] = ex.gold_answer;
  j["label"] = to_string(ex.label);
  j["language"] = to_string(ex.language);
  j["domain"] = to_string(ex.domain);
  j["length_bucket"] = to_string(ex.length_bucket);
  j["provenance"] = std::move(p);
  return j;
}

namespace {

template <class T, class Parse>
T enum_field(const nlohmann::json& j, const char* key, Parse parse) {
  const auto s = j.at(key).get<std::string>();
  auto v = parse(s);
  if (!v) throw InputError(std::string("unknown ") + key + " '" + s + "'");
  return *v;
}

}  // namespace

BenchmarkExample example_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("record is not an object");
  BenchmarkExample ex;
  ex.id = j.at("id").get<std::string>();
  ex.context = j.at("context").get<std::string>();
  ex.question = j.at("question").get<std::string>();
  ex.gold_answer = j.at("answer").get<std::string>();
  ex.label = enum_field<Label>(j, "label", parse_label);
  ex.language = enum_field<Language>(j, "language", parse_language);
  ex.domain = enum_field<Domain>(j, "domain", parse_domain);
  ex.length_bucket = enum_field<LengthBucket>(j, "length_bucket", parse_length_bucket);
  const auto& p = j.at("provenance");
  ex.provenance.doc_id = p.at("doc_id").get<std::string>();
  ex.provenance.fragment_index = p.at("fragment_index").get<std::size_t>();
  if (p.contains("strategy") && !p["strategy"].is_null())
    ex.provenance.strategy = enum_field<RewriteStrategy>(p, "strategy", parse_rewrite_strategy);
  ex.provenance.evidence = p.at("evidence").get<std::string>();
  if (p.contains("original_question") && !p["original_question"].is_null())
    ex.provenance.original_question = p["original_question"].get<std::string>();
  if (p.contains("evidence_offset") && !p["evidence_offset"].is_null())
    ex.provenance.evidence_offset = p["evidence_offset"].get<std::size_t>();
  return ex;
}

std::string serialize_examples(const std::vector<BenchmarkExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += to_json(ex).dump();
    out += '\n';
  }
  return out;
}

std::vector<BenchmarkExample> parse_examples(std::string_view data) {
  std::vector<BenchmarkExample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const auto line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(example_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed example record: ") + e.what(), line_no);
    } catch (const InputError& e) {
      throw InputError(e.what(), line_no);
    }
  }
  return out;
}

std::size_t write_examples(const std::vector<BenchmarkExample>& examples, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_examples(examples));
  return examples.size();
}

std::vector<BenchmarkExample> read_examples(const std::filesystem::path& path) {
  try {
    return parse_examples(io::read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::development: return "development";
    case Split::test: return "test";
  }
  return "train";
}

const std::vector<Split>& all_splits() {
  static const std::vector<Split> v{Split::train, Split::development, Split::test};
  return v;
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "dev") return Split::development;
  for (auto v : all_splits()) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::vector<BenchmarkExample> DatasetSplit::select(const std::vector<BenchmarkExample>& examples, Split s) const {
  std::vector<BenchmarkExample> out;
  for (const auto& ex : examples) {
    if (of(ex) == s) out.push_back(ex);
  }
  return out;
}

DatasetSplit assign_splits(const std::vector<BenchmarkExample>& examples, const SplitRatios& ratios,
                           std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
    sum += r;
  }
  if (!(std::fabs(sum - 1.0) <= 1e-9)) throw ConfigError("split ratios must sum to 1 (got " + std::to_string(sum) + ")");

  std::map<std::string, std::size_t> group_size;
  for (const auto& ex : examples) ++group_size[ex.provenance.doc_id];
  const bool all_positive = std::all_of(ratios.begin(), ratios.end(), [](double r) { return r > 0.0; });
  if (all_positive && group_size.size() < kSplitCount) {
    throw ConfigError("splitting " + std::to_string(group_size.size()) +
                      " document(s) three ways needs at least 3 documents");
  }

  std::vector<std::string> docs;
  docs.reserve(group_size.size());
  for (const auto& [doc, _] : group_size) docs.push_back(doc);
  std::mt19937_64 rng(seed);
  for (std::size_t i = docs.size(); i > 1; --i) std::swap(docs[i - 1], docs[rng() % i]);

  const auto total = static_cast<double>(examples.size());
  std::array<double, kSplitCount> filled{};
  DatasetSplit split;
  for (const auto& doc : docs) {
    std::optional<std::size_t> best;
    double best_deficit = 0.0;
    for (std::size_t s = 0; s < kSplitCount; ++s) {
      if (ratios[s] <= 0.0) continue;
      const double deficit = ratios[s] * total - filled[s];
      if (!best || deficit > best_deficit) {
        best = s;
        best_deficit = deficit;
      }
    }
    const auto chosen = static_cast<Split>(*best);
    split.by_document[doc] = chosen;
    filled[*best] += static_cast<double>(group_size[doc]);
  }
  for (const auto& ex : examples) split.by_example[ex.id] = split.by_document.at(ex.provenance.doc_id);
  return split;
}

void StatsReport::validate() const {
  std::vector<std::string> problems;
  auto check = [&](const char* what, std::size_t sum) {
    if (sum != total.examples)
      problems.push_back(std::string(what) + " breakdown sums to " + std::to_string(sum) + ", total is " +
                         std::to_string(total.examples));
  };
  std::size_t lang = 0;
  std::size_t lang_articles = 0;
  for (const auto& [l, c] : by_language) {
    lang += c.examples;
    lang_articles += c.articles;
    if (c.articles > c.examples) problems.push_back(std::string(to_string(l)) + ": articles exceed examples");
  }
  check("language", lang);
  if (lang_articles != total.articles) problems.emplace_back("language article counts do not sum to the total");
  std::size_t n = 0;
  for (const auto& [_, c] : by_domain) n += c;
  check("domain", n);
  n = 0;
  for (const auto& [_, c] : by_label) n += c;
  check("label", n);
  n = 0;
  for (const auto& [_, c] : by_bucket) n += c;
  check("length bucket", n);
  if (total.articles > total.examples) problems.emplace_back("articles exceed examples");
  if (problems.empty()) return;
  std::string msg = "inconsistent stats report:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ValidationError(msg);
}

StatsReport compute_stats(const std::vector<BenchmarkExample>& examples) {
  StatsReport r;
  std::set<std::string> articles;
  std::map<Language, std::set<std::string>> articles_by_language;
  for (auto l : {Language::en, Language::zh}) r.by_language[l] = {};
  for (auto d : {Domain::law, Domain::books, Domain::other}) r.by_domain[d] = 0;
  for (auto l : all_labels()) r.by_label[l] = 0;
  for (auto b : all_length_buckets()) r.by_bucket[b] = 0;
  for (const auto& ex : examples) {
    ++r.total.examples;
    articles.insert(ex.provenance.doc_id);
    ++r.by_language[ex.language].examples;
    articles_by_language[ex.language].insert(ex.provenance.doc_id);
    ++r.by_domain[ex.domain];
    ++r.by_label[ex.label];
    ++r.by_bucket[ex.length_bucket];
  }
  r.total.articles = articles.size();
  for (auto& [l, c] : r.by_language) c.articles = articles_by_language[l].size();
  return r;
}

namespace {

std::string percent(std::size_t n, std::size_t total) {
  if (total == 0) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << 100.0 * static_cast<double>(n) / static_cast<double>(total) << "%";
  return ss.str();
}

}  // namespace

std::string render_stats_text(const std::vector<std::pair<std::string, StatsReport>>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "Split" << std::right << std::setw(14) << "Examples(en)" << std::setw(14)
      << "Examples(zh)" << std::setw(10) << "Examples" << std::setw(14) << "Articles(en)" << std::setw(14)
      << "Articles(zh)" << std::setw(10) << "Articles" << "\n";
  for (const auto& [name, r] : reports) {
    const auto& en = r.by_language.count(Language::en) ? r.by_language.at(Language::en) : CountPair{};
    const auto& zh = r.by_language.count(Language::zh) ? r.by_language.at(Language::zh) : CountPair{};
    out << std::left << std::setw(14) << name << std::right << std::setw(14) << en.examples << std::setw(14)
        << zh.examples << std::setw(10) << r.total.examples << std::setw(14) << en.articles << std::setw(14)
        << zh.articles << std::setw(10) << r.total.articles << "\n";
  }
  for (const auto& [name, r] : reports) {
    out << "\n[" << name << "]\n";
    out << "  domain:\n";
    for (const auto& [d, c] : r.by_domain)
      out << "    " << std::left << std::setw(20) << to_string(d) << std::right << std::setw(8) << c << std::setw(10)
          << percent(c, r.total.examples) << "\n";
    out << "  label:\n";
    for (const auto& [l, c] : r.by_label)
      out << "    " << std::left << std::setw(20) << to_string(l) << std::right << std::setw(8) << c << std::setw(10)
          << percent(c, r.total.examples) << "\n";
    out << "  length:\n";
    for (const auto& [b, c] : r.by_bucket)
      out << "    " << std::left << std::setw(20) << to_string(b) << std::right << std::setw(8) << c << std::setw(10)
          << percent(c, r.total.examples) << "\n";
  }
  return out.str();
}

nlohmann::ordered_json stats_to_json(const std::vector<std::pair<std::string, StatsReport>>& reports) {
  ojson out = ojson::object();
  for (const auto& [name, r] : reports) {
    ojson j;
    j["examples"] = r.total.examples;
    j["articles"] = r.total.articles;
    j["languages"] = ojson::object();
    for (const auto& [l, c] : r.by_language)
      j["languages"][std::string(to_string(l))] = {{"examples", c.examples}, {"articles", c.articles}};
    j["domains"] = ojson::object();
    for (const auto& [d, c] : r.by_domain) j["domains"][std::string(to_string(d))] = c;
    j["labels"] = ojson::object();
    for (const auto& [l, c] : r.by_label) j["labels"][std::string(to_string(l))] = c;
    j["length_buckets"] = ojson::object();
    for (const auto& [b, c] : r.by_bucket) j["length_buckets"][std::string(to_string(b))] = c;
    out[name] = std::move(j);
  }
  return out;
}

std::string excerpt_around(std::string_view context, std::size_t offset, std::size_t bytes) {
  if (context.size() <= bytes) return std::string(context);
  offset = std::min(offset, context.size());
  std::size_t begin = offset > bytes / 2 ? offset - bytes / 2 : 0;
  std::size_t end = std::min(context.size(), begin + bytes);
  if (end == context.size()) begin = context.size() - bytes;
  begin = text::utf8_floor(context, begin);
  end = text::utf8_floor(context, end);
  std::string out;
  if (begin > 0) out += "...";
  out += context.substr(begin, end - begin);
  if (end < context.size()) out += "...";
  return out;
}

std::vector<ReviewRow> sample_for_manual_review(const std::vector<BenchmarkExample>& examples, std::size_t k,
                                                std::uint64_t seed, std::size_t excerpt_bytes) {
  if (k > examples.size()) {
    throw ConfigError("cannot sample " + std::to_string(k) + " examples from " + std::to_string(examples.size()));
  }
  std::vector<std::size_t> idx(examples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<ReviewRow> rows;
  rows.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
    std::swap(idx[i], idx[j]);
    const auto& ex = examples[idx[i]];
    rows.push_back({ex.id, ex.label, ex.language,
                    excerpt_around(ex.context, ex.provenance.evidence_offset.value_or(0), excerpt_bytes), ex.question,
                    ex.gold_answer});
  }
  return rows;
}

namespace {

std::string tsv_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_review_sheet(const std::vector<ReviewRow>& rows) {
  std::string out = "id\tlabel\tlanguage\tcontext_excerpt\tquestion\tgold_answer\tquestion_ok\tanswer_ok\n";
  for (const auto& r : rows) {
    out += tsv_cell(r.id) + '\t' + std::string(to_string(r.label)) + '\t' + std::string(to_string(r.language)) +
           '\t' + tsv_cell(r.excerpt) + '\t' + tsv_cell(r.question) + '\t' + tsv_cell(r.gold_answer) + "\t\t\n";
  }
  return out;
}

}  // namespace factguard
