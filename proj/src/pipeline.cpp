#include "factguard/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "factguard/errors.hpp"
#include "factguard/text.hpp"
#include "factguard/workers.hpp"

namespace factguard {

std::string_view to_string(Label l) {
  switch (l) {
    case Label::answerable: return "answerable";
    case Label::lack_of_evidence: return "lack_of_evidence";
    case Label::misleading: return "misleading";
  }
  return "answerable";
}

const std::vector<Label>& all_labels() {
  static const std::vector<Label> v{Label::answerable, Label::lack_of_evidence, Label::misleading};
  return v;
}

std::optional<Label> parse_label(std::string_view s) {
  for (auto l : all_labels()) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::preparation: return "preparation";
    case Stage::qa_generation: return "qa_generation";
    case Stage::negative_generation: return "negative_generation";
    case Stage::review: return "review";
  }
  return "preparation";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (std::size_t i = 0; i < kStageCount; ++i) {
    const auto stage = static_cast<Stage>(i);
    if (to_string(stage) == s) return stage;
  }
  return std::nullopt;
}

std::size_t StageCounts::total_dropped() const {
  std::size_t n = 0;
  for (const auto& [_, c] : dropped) n += c;
  return n;
}

void AttritionReport::validate() const {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < kStageCount; ++i) {
    const auto& s = stages[i];
    const auto name = std::string(to_string(static_cast<Stage>(i)));
    if (s.input != s.kept + s.total_dropped()) {
      problems.push_back(name + ": input " + std::to_string(s.input) + " != kept " + std::to_string(s.kept) +
                         " + dropped " + std::to_string(s.total_dropped()));
    }
    if (i > 0 && s.input != stages[i - 1].kept) {
      problems.push_back(name + ": input " + std::to_string(s.input) + " != previous stage kept " +
                         std::to_string(stages[i - 1].kept));
    }
  }
  if (problems.empty()) return;
  std::string msg = "attrition report violates conservation:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ValidationError(msg);
}

std::string AttritionReport::to_jsonl() const {
  std::string out;
  for (std::size_t i = 0; i < kStageCount; ++i) {
    const auto& s = stages[i];
    nlohmann::ordered_json rec;
    rec["stage"] = to_string(static_cast<Stage>(i));
    rec["input"] = s.input;
    rec["kept"] = s.kept;
    rec["dropped"] = nlohmann::ordered_json::object();
    for (const auto& [reason, count] : s.dropped) {
      if (count > 0) rec["dropped"][std::string(to_string(reason))] = count;
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

AttritionReport AttritionReport::from_jsonl(std::string_view data) {
  AttritionReport report;
  std::array<bool, kStageCount> seen{};
  std::size_t line_no = 0;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed attrition record: ") + e.what(), line_no);
    }
    try {
      const auto stage = parse_stage(rec.at("stage").get<std::string>());
      if (!stage) throw InputError("unknown stage", line_no);
      const auto idx = static_cast<std::size_t>(*stage);
      if (seen[idx]) throw InputError("duplicate stage " + std::string(to_string(*stage)), line_no);
      seen[idx] = true;
      auto& s = report.stages[idx];
      s.input = rec.at("input").get<std::size_t>();
      s.kept = rec.at("kept").get<std::size_t>();
      const auto dropped = rec.value("dropped", nlohmann::json::object());
      for (const auto& [key, value] : dropped.items()) {
        const auto reason = parse_drop_reason(key);
        if (!reason) throw InputError("unknown drop reason '" + key + "'", line_no);
        s.dropped[*reason] = value.get<std::size_t>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed attrition record: ") + e.what(), line_no);
    }
  }
  for (std::size_t i = 0; i < kStageCount; ++i) {
    if (!seen[i]) throw InputError("attrition report lacks stage " + std::string(to_string(static_cast<Stage>(i))), 0);
  }
  return report;
}

Funnel funnel(const AttritionReport& report) {
  report.validate();
  Funnel f;
  std::size_t review_errors = 0;
  for (std::size_t i = 0; i < kStageCount; ++i) {
    const auto& s = report.stages[i];
    auto& r = f.stages[i];
    r.stage = static_cast<Stage>(i);
    std::size_t denominator = s.input;
    if (r.stage == Stage::review) {
      const auto it = s.dropped.find(DropReason::review_error);
      r.excluded = it == s.dropped.end() ? 0 : it->second;
      review_errors = r.excluded;
      denominator -= r.excluded;
    }
    if (denominator == 0) {
      r.retention = 1.0;
      r.zero_input = true;
    } else {
      r.retention = static_cast<double>(s.kept) / static_cast<double>(denominator);
    }
  }
  const auto initial = report.at(Stage::preparation).input - review_errors;
  f.overall = initial == 0 ? 1.0
                           : static_cast<double>(report.at(Stage::review).kept) / static_cast<double>(initial);
  return f;
}

void SynthesisConfig::validate() const {
  std::vector<std::string> problems;
  if (alpha < 1) problems.emplace_back("synthesis.alpha must be >= 1");
  if (quality_threshold < 1 || quality_threshold > 5)
    problems.push_back("synthesis.quality_threshold must be in [1, 5], got " + std::to_string(quality_threshold));
  double sum = 0.0;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (!(label_mix[i] >= 0.0) || !std::isfinite(label_mix[i]))
      problems.push_back("synthesis.label_mix." + std::string(to_string(static_cast<Label>(i))) +
                         " must be a finite non-negative number");
    sum += label_mix[i];
  }
  if (!(std::fabs(sum - 1.0) <= 1e-9))
    problems.push_back("synthesis.label_mix must sum to 1 (got " + std::to_string(sum) + ")");
  if (review_top_n < 1) problems.emplace_back("synthesis.review_top_n must be >= 1");
  if (segment.min_frag < 1 || segment.max_frag < segment.min_frag)
    problems.emplace_back("segment bounds require 0 < min_frag <= max_frag");
  if (!(bm25.k1 >= 0.0)) problems.emplace_back("retrieval.k1 must be >= 0");
  if (!(bm25.b >= 0.0 && bm25.b <= 1.0)) problems.emplace_back("retrieval.b must be in [0, 1]");
  if (strategies.empty()) problems.emplace_back("synthesis.strategies must not be empty");
  if (workers < 1) problems.emplace_back("workers must be >= 1");
  if (problems.empty()) return;
  std::string msg = "invalid synthesis config:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ConfigError(msg);
}

std::vector<Label> assign_labels(std::size_t count, const std::array<double, kLabelCount>& mix,
                                 std::uint64_t seed) {
  // Seeded Fisher-Yates over the raw engine output so the order does not
  // depend on the standard library's distribution implementations.
  std::array<std::size_t, kLabelCount> priority{0, 1, 2};
  std::mt19937_64 rng(seed);
  for (std::size_t i = kLabelCount - 1; i > 0; --i) std::swap(priority[i], priority[rng() % (i + 1)]);
  std::array<std::size_t, kLabelCount> rank{};
  for (std::size_t i = 0; i < kLabelCount; ++i) rank[priority[i]] = i;

  const double total = std::accumulate(mix.begin(), mix.end(), 0.0);
  std::array<double, kLabelCount> current{};
  std::vector<Label> out;
  out.reserve(count);
  for (std::size_t step = 0; step < count; ++step) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      if (mix[i] <= 0.0) continue;
      current[i] += mix[i];
      if (!best || current[i] > current[*best] || (current[i] == current[*best] && rank[i] < rank[*best]))
        best = i;
    }
    if (!best) throw std::invalid_argument("assign_labels: label_mix has no positive weight");
    current[*best] -= total;
    out.push_back(static_cast<Label>(*best));
  }
  return out;
}

namespace {

// Sentence-widened span covering [b, e).
text::ByteSpan widen_to_sentences(const std::vector<text::ByteSpan>& sentences, std::size_t b, std::size_t e) {
  text::ByteSpan out{b, e};
  for (const auto& s : sentences) {
    if (s.end <= b || s.begin >= e) continue;
    out.begin = std::min(out.begin, s.begin);
    out.end = std::max(out.end, s.end);
  }
  return out;
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

}  // namespace

Outcome<EvidenceDeletion> make_lack_of_evidence(std::string_view document_text, std::string_view evidence) {
  if (text::normalize_whitespace(evidence).empty())
    return Drop{DropReason::evidence_absent_at_deletion, "evidence is empty"};
  std::string context(document_text);
  std::optional<std::size_t> first;
  for (;;) {
    const auto matches = text::find_normalized(context, evidence);
    if (matches.empty()) break;
    const auto sentences = text::sentence_spans(context);
    std::vector<text::ByteSpan> cuts;
    for (const auto& m : matches) {
      auto w = widen_to_sentences(sentences, m.begin, m.end);
      // Take the blanks after the cut (or before it at a line end) so the
      // neighbouring sentences are not left with a double space.
      if (w.end < context.size() && is_blank(context[w.end])) {
        while (w.end < context.size() && is_blank(context[w.end])) ++w.end;
      } else {
        while (w.begin > 0 && is_blank(context[w.begin - 1])) --w.begin;
      }
      if (!cuts.empty() && w.begin <= cuts.back().end) {
        cuts.back().end = std::max(cuts.back().end, w.end);
      } else {
        cuts.push_back(w);
      }
    }
    std::string next;
    next.reserve(context.size());
    std::size_t pos = 0;
    std::size_t removed_before_first = 0;
    for (const auto& c : cuts) {
      if (first && c.end <= *first) removed_before_first += c.size();
      next.append(context, pos, c.begin - pos);
      pos = c.end;
    }
    next.append(context, pos, std::string::npos);
    if (!first) {
      first = cuts.front().begin;
    } else {
      *first -= std::min(*first, removed_before_first);
    }
    context = std::move(next);
  }
  if (!first) return Drop{DropReason::evidence_absent_at_deletion, "evidence not found in the document"};
  const auto offset = std::min(*first, context.size());
  return EvidenceDeletion{std::move(context), offset};
}

Outcome<std::string> make_misleading(const QATuple& tuple, const Fragment& fragment, const Agents& agents,
                                     RewriteStrategy strategy) {
  return agents.rewrite_question(tuple, fragment, strategy);
}

std::string example_id(const FragmentRef& ref) { return ref.doc_id + "#" + std::to_string(ref.index); }

namespace {

// Lowercased, whitespace-collapsed answers agree when either contains the
// other.
bool answers_agree(std::string_view a, std::string_view b) {
  auto norm = [](std::string_view s) {
    auto t = text::to_lower_ascii(text::normalize_whitespace(s));
    for (;;) {
      if (!t.empty() && t.back() == '.') {
        t.pop_back();
      } else if (t.size() >= 3 && t.compare(t.size() - 3, 3, "\u3002") == 0) {
        t.resize(t.size() - 3);
      } else {
        return t;
      }
    }
  };
  const auto x = norm(a);
  const auto y = norm(b);
  if (x.empty() || y.empty()) return false;
  return x.find(y) != std::string::npos || y.find(x) != std::string::npos;
}

std::string render_passages(const std::vector<ScoredFragment>& hits, const std::vector<Fragment>& fragments) {
  std::string out;
  std::size_t n = 0;
  for (const auto& h : hits) {
    const auto it = std::find_if(fragments.begin(), fragments.end(),
                                 [&](const Fragment& f) { return f.index == h.ref.index; });
    if (it == fragments.end()) continue;
    if (!out.empty()) out += "\n\n";
    out += "[" + std::to_string(++n) + "] " + text::trim(it->text);
  }
  if (out.empty()) out = "(no relevant passages)";
  return out;
}

}  // namespace

std::optional<Drop> review(const BenchmarkExample& candidate, const std::vector<Fragment>& fragments,
                           const LexicalIndex& index, const Agents& agents, const ReviewConfig& config) {
  const auto hits = index.top_n(candidate.question, config.top_n);
  std::map<std::string, std::string> vars{
      {"question", candidate.question},
      {"passages", render_passages(hits, fragments)},
      {"doc_id", candidate.provenance.doc_id},
      {"fragment_index", std::to_string(candidate.provenance.fragment_index)},
      {"label", std::string(to_string(candidate.label))},
  };
  const auto conflict = agents.call(roles::review_conflict, vars);
  if (!conflict.ok()) return Drop{DropReason::review_error, "review_conflict: " + conflict.error().message};
  const auto reply = parse_conflict_reply(conflict.text());
  if (!reply) return Drop{DropReason::judge_parse_error, "unparseable conflict reply"};
  if (!reply->unanswerable) {
    if (is_unanswerable(candidate.label))
      return Drop{DropReason::conflicting_answer, "passages answer the question: " + reply->answer.substr(0, 80)};
    if (!answers_agree(reply->answer, candidate.gold_answer))
      return Drop{DropReason::answer_conflict, "passage answer '" + reply->answer.substr(0, 80) +
                                                   "' disagrees with the gold answer"};
  }

  vars.erase("passages");
  const auto common = agents.call(roles::review_common_sense, vars);
  if (!common.ok()) return Drop{DropReason::review_error, "review_common_sense: " + common.error().message};
  const auto yes = parse_yes_no(common.text());
  if (!yes) return Drop{DropReason::judge_parse_error, "unparseable common-sense reply"};
  if (*yes) return Drop{DropReason::common_sense, "answerable from general knowledge"};
  return std::nullopt;
}

namespace {

struct Slot {
  std::size_t document = 0;
  Fragment fragment;
  Label label = Label::answerable;
  RewriteStrategy strategy = RewriteStrategy::entity_substitution;
};

class Tally {
 public:
  explicit Tally(AttritionReport& report) : report_(report) {}
  void pass(Stage s) {
    ++report_.at(s).input;
    ++report_.at(s).kept;
  }
  void drop(Stage s, const Drop& d, const Fragment& f) {
    ++report_.at(s).input;
    ++report_.at(s).dropped[d.reason];
    spdlog::debug("{}#{}: dropped at {} ({}): {}", f.doc_id, f.index, to_string(s), to_string(d.reason), d.detail);
  }

 private:
  AttritionReport& report_;
};

struct DocumentResult {
  AttritionReport report;
  std::vector<BenchmarkExample> examples;
};

std::size_t evidence_offset_in(const Fragment& fragment, std::string_view evidence) {
  const auto m = text::find_normalized(fragment.text, evidence);
  return fragment.span.begin + (m.empty() ? 0 : m.front().begin);
}

class Console {
 public:
  Console(const SynthesisConfig& config, const Agents& agents) : config_(config), agents_(agents) {}

  // Runs every slot of one document through all four stages.
  DocumentResult process(const Document& doc, const std::vector<const Slot*>& slots) const {
    DocumentResult result;
    Tally tally(result.report);
    std::optional<std::vector<Fragment>> source_chunks;
    std::optional<LexicalIndex> source_index;
    for (const Slot* slot : slots) {
      auto candidate = build(doc, *slot, tally);
      if (!candidate) continue;
      std::vector<Fragment> chunks;
      std::optional<LexicalIndex> modified_index;
      const LexicalIndex* index = nullptr;
      const std::vector<Fragment>* fragments = nullptr;
      if (candidate->context == doc.text) {
        if (!source_index) {
          source_chunks = pack_paragraphs(doc, config_.segment);
          source_index = LexicalIndex::build(*source_chunks, config_.bm25);
        }
        index = &*source_index;
        fragments = &*source_chunks;
      } else {
        Document modified = doc;
        modified.text = candidate->context;
        chunks = pack_paragraphs(modified, config_.segment);
        modified_index = LexicalIndex::build(chunks, config_.bm25);
        index = &*modified_index;
        fragments = &chunks;
      }
      if (auto d = review(*candidate, *fragments, *index, agents_, ReviewConfig{config_.review_top_n})) {
        tally.drop(Stage::review, *d, slot->fragment);
        continue;
      }
      tally.pass(Stage::review);
      result.examples.push_back(std::move(*candidate));
    }
    return result;
  }

 private:
  // Preparation, QA generation and negative construction for one slot.
  std::optional<BenchmarkExample> build(const Document& doc, const Slot& slot, Tally& tally) const {
    const Fragment& fragment = slot.fragment;
    const auto score = agents_.score_quality(fragment, doc.language);
    if (!score) return dropped(tally, Stage::preparation, score.drop(), fragment);
    if (*score <= config_.quality_threshold) {
      return dropped(tally, Stage::preparation,
                     Drop{DropReason::below_quality_threshold, "score " + std::to_string(*score)}, fragment);
    }
    const auto topics = agents_.select_topics(fragment);
    if (!topics) return dropped(tally, Stage::preparation, topics.drop(), fragment);
    if (topics->empty()) return dropped(tally, Stage::preparation, Drop{DropReason::no_topic, ""}, fragment);
    tally.pass(Stage::preparation);

    const auto tuple = agents_.generate_qa(fragment, *topics, doc.language);
    if (!tuple) return dropped(tally, Stage::qa_generation, tuple.drop(), fragment);
    const auto verdict = agents_.judge_qa_quality(*tuple, fragment);
    if (!verdict) return dropped(tally, Stage::qa_generation, verdict.drop(), fragment);
    if (!verdict->pass) {
      const auto reason =
          verdict->reason == "judge_parse_error" ? DropReason::judge_parse_error : DropReason::qa_judge_fail;
      return dropped(tally, Stage::qa_generation, Drop{reason, verdict->reason}, fragment);
    }
    tally.pass(Stage::qa_generation);

    BenchmarkExample ex;
    ex.id = example_id(tuple->fragment_ref);
    ex.label = slot.label;
    ex.language = doc.language;
    ex.domain = doc.domain;
    ex.provenance.doc_id = doc.id;
    ex.provenance.fragment_index = fragment.index;
    ex.provenance.evidence = tuple->evidence;

    switch (slot.label) {
      case Label::answerable:
        ex.context = doc.text;
        ex.question = tuple->question;
        ex.gold_answer = tuple->answer;
        ex.provenance.evidence_offset = evidence_offset_in(fragment, tuple->evidence);
        break;
      case Label::lack_of_evidence: {
        auto deletion = make_lack_of_evidence(doc.text, tuple->evidence);
        if (!deletion) return dropped(tally, Stage::negative_generation, deletion.drop(), fragment);
        if (text::count_tokens(deletion->context) == 0) {
          return dropped(tally, Stage::negative_generation,
                         Drop{DropReason::context_exhausted, "nothing left after deleting the evidence"}, fragment);
        }
        auto gold = agents_.write_unanswerable_gold(*tuple, fragment, UnanswerableReason::lack_of_evidence,
                                                    std::nullopt, doc.language);
        if (!gold) return dropped(tally, Stage::negative_generation, gold.drop(), fragment);
        ex.context = std::move(deletion).value().context;
        ex.provenance.evidence_offset = deletion->first_offset;
        ex.question = tuple->question;
        ex.gold_answer = std::move(gold).value();
        break;
      }
      case Label::misleading: {
        auto rewritten = make_misleading(*tuple, fragment, agents_, slot.strategy);
        if (!rewritten) return dropped(tally, Stage::negative_generation, rewritten.drop(), fragment);
        auto gold = agents_.write_unanswerable_gold(*tuple, fragment, UnanswerableReason::misleading, *rewritten,
                                                    doc.language);
        if (!gold) return dropped(tally, Stage::negative_generation, gold.drop(), fragment);
        ex.context = doc.text;
        ex.question = *rewritten;
        ex.gold_answer = std::move(gold).value();
        ex.provenance.strategy = slot.strategy;
        ex.provenance.original_question = tuple->question;
        ex.provenance.evidence_offset = evidence_offset_in(fragment, tuple->evidence);
        break;
      }
    }
    ex.length_bucket = length_bucket(text::count_tokens(ex.context));
    tally.pass(Stage::negative_generation);
    return ex;
  }

  static std::optional<BenchmarkExample> dropped(Tally& tally, Stage stage, const Drop& d, const Fragment& f) {
    tally.drop(stage, d, f);
    return std::nullopt;
  }

  const SynthesisConfig& config_;
  const Agents& agents_;
};

}  // namespace

SynthesisResult run(const std::vector<Document>& corpus, const SynthesisConfig& config, const Agents& agents,
                    const std::atomic<bool>* cancel) {
  if (corpus.empty()) throw ConfigError("synthesis needs a non-empty corpus");
  config.validate();
  std::vector<std::string> unbound;
  for (auto role : {roles::quality, roles::topics, roles::qa_generate, roles::qa_judge, roles::rewrite,
                    roles::gold_writer, roles::review_conflict, roles::review_common_sense}) {
    if (!agents.has_role(role)) unbound.emplace_back(role);
  }
  if (!unbound.empty()) {
    std::string msg = "no backend bound for synthesis role(s):";
    for (const auto& r : unbound) msg += " " + r;
    throw ConfigError(msg);
  }

  SynthesisResult result;

  // Segmentation is pure and cheap, so every slot (and its label) is fixed
  // before any agent call. Labels then do not depend on completion order or
  // on which items survive.
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corpus[a].id < corpus[b].id; });
  std::vector<Slot> slots;
  for (auto d : order) {
    try {
      for (auto& f : segment(corpus[d], config.alpha, config.segment)) slots.push_back({d, std::move(f)});
    } catch (const std::exception& e) {
      ++result.documents_skipped;
      spdlog::warn("{}: segmentation failed, skipping document: {}", corpus[d].id, e.what());
    }
  }
  const auto labels = assign_labels(slots.size(), config.label_mix, config.seed);
  std::size_t misleading = config.seed % config.strategies.size();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    slots[i].label = labels[i];
    if (labels[i] == Label::misleading)
      slots[i].strategy = config.strategies[misleading++ % config.strategies.size()];
  }

  std::vector<std::vector<const Slot*>> by_document;
  std::vector<std::size_t> document_of;
  for (const auto& s : slots) {
    if (document_of.empty() || document_of.back() != s.document) {
      document_of.push_back(s.document);
      by_document.emplace_back();
    }
    by_document.back().push_back(&s);
  }

  spdlog::info("synthesis: {} documents, {} fragments, {} workers", corpus.size(), slots.size(), config.workers);
  const Console console(config, agents);
  std::vector<std::optional<DocumentResult>> partial(by_document.size());
  std::mutex progress_mutex;
  std::size_t done = 0;
  const auto ran = parallel_for(
      by_document.size(), config.workers,
      [&](std::size_t i) {
        partial[i] = console.process(corpus[document_of[i]], by_document[i]);
        std::lock_guard lock(progress_mutex);
        ++done;
        if (done % 10 == 0 || done == by_document.size())
          spdlog::info("synthesis: {}/{} documents done", done, by_document.size());
      },
      cancel);
  result.interrupted = ran < by_document.size();

  for (auto& p : partial) {
    if (!p) continue;
    for (std::size_t s = 0; s < kStageCount; ++s) {
      auto& into = result.report.stages[s];
      into.input += p->report.stages[s].input;
      into.kept += p->report.stages[s].kept;
      for (const auto& [reason, count] : p->report.stages[s].dropped) into.dropped[reason] += count;
    }
    for (auto& ex : p->examples) result.examples.push_back(std::move(ex));
  }
  std::stable_sort(result.examples.begin(), result.examples.end(),
                   [](const BenchmarkExample& a, const BenchmarkExample& b) {
                     if (a.provenance.doc_id != b.provenance.doc_id) return a.provenance.doc_id < b.provenance.doc_id;
                     return a.provenance.fragment_index < b.provenance.fragment_index;
                   });
  result.report.validate();
  return result;
}

}  // namespace factguard
