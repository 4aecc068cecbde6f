#include "factguard/eval.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "factguard/errors.hpp"
#include "factguard/text.hpp"
#include "factguard/workers.hpp"

namespace factguard {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Task2Class c) {
  switch (c) {
    case Task2Class::incorrect: return "incorrect";
    case Task2Class::direct_refusal: return "direct_refusal";
    case Task2Class::reasoned: return "reasoned";
  }
  return "incorrect";
}

const std::vector<Task2Class>& all_task2_classes() {
  static const std::vector<Task2Class> v{Task2Class::incorrect, Task2Class::direct_refusal, Task2Class::reasoned};
  return v;
}

std::optional<Task2Class> parse_task2_class(std::string_view s) {
  for (auto c : all_task2_classes()) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(JudgmentFlag f) {
  switch (f) {
    case JudgmentFlag::none: return "none";
    case JudgmentFlag::judge_parse_error: return "judge_parse_error";
    case JudgmentFlag::judge_error: return "judge_error";
    case JudgmentFlag::judge_disagreement: return "judge_disagreement";
    case JudgmentFlag::transport_failed: return "transport_failed";
    case JudgmentFlag::context_overflow: return "context_overflow";
  }
  return "none";
}

std::optional<JudgmentFlag> parse_judgment_flag(std::string_view s) {
  for (auto f : {JudgmentFlag::none, JudgmentFlag::judge_parse_error, JudgmentFlag::judge_error,
                 JudgmentFlag::judge_disagreement, JudgmentFlag::transport_failed, JudgmentFlag::context_overflow}) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

EvalJudgment::EvalJudgment(std::string example_id, std::optional<int> task1_score,
                           std::optional<Task2Class> task2_class, JudgmentFlag flag, std::string task1_reply,
                           std::string task2_reply)
    : example_id_(std::move(example_id)),
      task1_score_(task1_score),
      task2_class_(task2_class),
      flag_(flag),
      task1_reply_(std::move(task1_reply)),
      task2_reply_(std::move(task2_reply)) {
  if (task1_score_ && *task1_score_ != 0 && *task1_score_ != 1)
    throw ValidationError(example_id_ + ": task1 score must be 0 or 1");
  if (task1_score_ && task2_class_ && ((*task2_class_ != Task2Class::incorrect) != (*task1_score_ == 1)))
    throw ValidationError(example_id_ + ": task2 class " + std::string(to_string(*task2_class_)) +
                          " contradicts task1 score " + std::to_string(*task1_score_));
}

namespace {

// Text after "KEY:" on the first line carrying that key, else the first
// non-empty line.
std::string verdict_text(std::string_view reply, std::string_view key) {
  std::istringstream in{std::string(reply)};
  std::string line;
  std::string first;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    while (!t.empty() && (t.front() == '*' || t.front() == '-' || t.front() == '#')) t.erase(t.begin());
    t = text::trim(t);
    if (t.empty()) continue;
    if (first.empty()) first = t;
    const auto lower = text::to_lower_ascii(t);
    const auto k = text::to_lower_ascii(key);
    if (lower.rfind(k, 0) == 0) {
      auto rest = t.substr(k.size());
      while (!rest.empty() && (rest.front() == '*' || rest.front() == ' ')) rest.erase(rest.begin());
      if (rest.rfind(':', 0) == 0) return text::trim(rest.substr(1));
    }
  }
  return first;
}

}  // namespace

std::optional<int> parse_task1_score(std::string_view reply) {
  // Only the first word counts so a trailing justification is tolerated.
  auto v = verdict_text(reply, "SCORE");
  v = v.substr(0, v.find_first_of(" \t"));
  while (!v.empty() && (v.back() == '.' || v.back() == '*' || v.back() == ',')) v.pop_back();
  if (v == "1") return 1;
  if (v == "0") return 0;
  return std::nullopt;
}

std::optional<Task2Class> parse_task2_reply(std::string_view reply) {
  auto v = text::to_lower_ascii(verdict_text(reply, "CLASS"));
  std::string key;
  for (char c : v) {
    if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
      key.push_back(c);
    } else if (!key.empty() && key.back() != '_') {
      key.push_back('_');
    }
  }
  while (!key.empty() && key.back() == '_') key.pop_back();
  if (key == "incorrect" || key == "incorrect_answer") return Task2Class::incorrect;
  if (key == "direct_refusal" || key == "refusal") return Task2Class::direct_refusal;
  if (key == "reasoned" || key == "reasoned_answer") return Task2Class::reasoned;
  return std::nullopt;
}

std::vector<Prediction> run_candidate(const std::vector<BenchmarkExample>& examples, const Agents& agents,
                                      const EvalOptions& options, const std::atomic<bool>* cancel) {
  if (!agents.has_role(roles::candidate)) throw ConfigError("no backend bound for role 'candidate'");
  std::vector<std::optional<Prediction>> slots(examples.size());
  parallel_for(
      examples.size(), options.workers,
      [&](std::size_t i) {
        const auto& ex = examples[i];
        Prediction p{ex.id, options.model, "", false, false};
        if (options.max_context_tokens && text::count_tokens(ex.context) > *options.max_context_tokens) {
          p.context_overflow = true;
        } else {
          const auto reply =
              agents.call(roles::candidate, {{"context", ex.context}, {"question", ex.question}, {"example_id", ex.id}});
          if (reply.ok()) {
            p.answer = text::trim(reply.text());
          } else {
            p.transport_failed = true;
            spdlog::warn("{}: candidate call failed: {}", ex.id, reply.error().message);
          }
        }
        slots[i] = std::move(p);
      },
      cancel);
  std::vector<Prediction> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Prediction& a, const Prediction& b) { return a.example_id < b.example_id; });
  return out;
}

EvalJudgment judge(const BenchmarkExample& example, const Prediction& prediction, const Agents& agents,
                   const EvalOptions& options) {
  const bool negative = is_unanswerable(example.label);
  const bool want1 = options.task1;
  const bool want2 = options.task2 && negative;
  if (prediction.transport_failed || prediction.context_overflow) {
    const auto flag = prediction.transport_failed ? JudgmentFlag::transport_failed : JudgmentFlag::context_overflow;
    return EvalJudgment(example.id, want1 ? std::optional<int>(0) : std::nullopt,
                        want2 ? std::optional<Task2Class>(Task2Class::incorrect) : std::nullopt, flag);
  }
  const std::map<std::string, std::string> vars{{"label", std::string(to_string(example.label))},
                                                {"question", example.question},
                                                {"gold_answer", example.gold_answer},
                                                {"prediction", prediction.answer},
                                                {"example_id", example.id}};
  std::optional<int> score;
  std::optional<Task2Class> cls;
  std::string reply1;
  std::string reply2;
  JudgmentFlag flag = JudgmentFlag::none;
  auto note = [&](JudgmentFlag f) {
    if (flag == JudgmentFlag::none) flag = f;
  };
  if (want1) {
    const auto r = agents.call(roles::judge_task1, vars);
    if (!r.ok()) {
      note(JudgmentFlag::judge_error);
      reply1 = r.error().message;
    } else {
      reply1 = r.text();
      score = parse_task1_score(reply1);
      if (!score) note(JudgmentFlag::judge_parse_error);
    }
  }
  if (want2) {
    const auto r = agents.call(roles::judge_task2, vars);
    if (!r.ok()) {
      note(JudgmentFlag::judge_error);
      reply2 = r.error().message;
    } else {
      reply2 = r.text();
      cls = parse_task2_reply(reply2);
      if (!cls) note(JudgmentFlag::judge_parse_error);
    }
  }
  if (score && cls && ((*cls != Task2Class::incorrect) != (*score == 1))) {
    // Two judge calls that contradict each other carry no usable verdict.
    note(JudgmentFlag::judge_disagreement);
  }
  if (flag != JudgmentFlag::none) {
    score.reset();
    cls.reset();
  }
  return EvalJudgment(example.id, score, cls, flag, std::move(reply1), std::move(reply2));
}

std::string IdMismatch::describe() const {
  std::string out;
  auto list = [&](const char* what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    out += std::string(what) + " (" + std::to_string(ids.size()) + "):";
    for (const auto& id : ids) out += "\n  " + id;
    out += "\n";
  };
  list("examples without a prediction", missing);
  list("predictions for unknown examples", unknown);
  list("examples predicted more than once", duplicate);
  return out;
}

IdMismatch check_prediction_ids(const std::vector<BenchmarkExample>& examples,
                                const std::vector<Prediction>& predictions) {
  IdMismatch m;
  std::set<std::string> known;
  for (const auto& ex : examples) known.insert(ex.id);
  std::map<std::string, std::size_t> seen;
  for (const auto& p : predictions) ++seen[p.example_id];
  for (const auto& [id, n] : seen) {
    if (known.count(id) == 0) m.unknown.push_back(id);
    if (n > 1) m.duplicate.push_back(id);
  }
  for (const auto& id : known) {
    if (seen.count(id) == 0) m.missing.push_back(id);
  }
  return m;
}

std::vector<EvalJudgment> judge_all(const std::vector<BenchmarkExample>& examples,
                                    const std::vector<Prediction>& predictions, const Agents& agents,
                                    const EvalOptions& options, const std::atomic<bool>* cancel) {
  const auto mismatch = check_prediction_ids(examples, predictions);
  if (!mismatch.ok()) throw ValidationError("predictions do not match the examples:\n" + mismatch.describe());
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) by_id[p.example_id] = &p;
  std::vector<const BenchmarkExample*> todo;
  for (const auto& ex : examples) {
    if (options.task1 || (options.task2 && is_unanswerable(ex.label))) todo.push_back(&ex);
  }
  std::vector<std::optional<EvalJudgment>> slots(todo.size());
  parallel_for(
      todo.size(), options.workers,
      [&](std::size_t i) { slots[i] = judge(*todo[i], *by_id.at(todo[i]->id), agents, options); }, cancel);
  std::vector<EvalJudgment> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const EvalJudgment& a, const EvalJudgment& b) { return a.example_id() < b.example_id(); });
  return out;
}

std::optional<double> Cell::accuracy() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::size_t Task2Breakdown::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

std::optional<std::array<double, kTask2ClassCount>> Task2Breakdown::percentages() const {
  const auto n = total();
  if (n == 0) return std::nullopt;
  std::array<double, kTask2ClassCount> out{};
  for (std::size_t i = 0; i < kTask2ClassCount; ++i)
    out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(n);
  return out;
}

EvalReport aggregate(const std::vector<EvalJudgment>& judgments, const std::vector<BenchmarkExample>& examples,
                     const EvalOptions& options) {
  std::map<std::string, const BenchmarkExample*> by_id;
  for (const auto& ex : examples) by_id[ex.id] = &ex;
  std::vector<std::string> unknown;
  std::vector<std::string> repeated;
  std::set<std::string> seen;
  for (const auto& j : judgments) {
    if (by_id.count(j.example_id()) == 0) unknown.push_back(j.example_id());
    if (!seen.insert(j.example_id()).second) repeated.push_back(j.example_id());
  }
  if (!unknown.empty() || !repeated.empty()) {
    std::string msg = "judgments do not match the examples:";
    for (const auto& id : unknown) msg += "\n  unknown example id " + id;
    for (const auto& id : repeated) msg += "\n  repeated judgment for " + id;
    throw ValidationError(msg);
  }

  EvalReport r;
  r.has_task1 = options.task1;
  r.has_task2 = options.task2;
  for (auto lang : {Language::en, Language::zh}) {
    for (auto l : all_labels()) r.by_language_label[{lang, l}] = {};
  }
  for (auto l : all_labels()) {
    for (auto b : all_length_buckets()) r.by_label_bucket[{l, b}] = {};
  }
  for (const auto& j : judgments) {
    const auto& ex = *by_id.at(j.example_id());
    if (j.flag() != JudgmentFlag::none) ++r.flagged[j.flag()];
    const bool judge_problem = j.flag() == JudgmentFlag::judge_parse_error || j.flag() == JudgmentFlag::judge_error ||
                               j.flag() == JudgmentFlag::judge_disagreement;
    if ((judge_problem && options.exclude_flagged) ||
        (j.flag() == JudgmentFlag::context_overflow && options.skip_context_overflow)) {
      ++r.excluded[j.flag()];
      continue;
    }
    if (options.task1) {
      const int score = judge_problem ? 0 : j.task1_score().value_or(0);
      for (Cell* c : {&r.overall, &r.by_language_label[{ex.language, ex.label}],
                      &r.by_label_bucket[{ex.label, ex.length_bucket}]}) {
        ++c->total;
        c->correct += static_cast<std::size_t>(score);
      }
    }
    if (options.task2 && is_unanswerable(ex.label) && j.flag() != JudgmentFlag::transport_failed) {
      const auto cls = judge_problem ? Task2Class::incorrect : j.task2_class().value_or(Task2Class::incorrect);
      ++r.task2.counts[static_cast<std::size_t>(cls)];
    }
  }
  return r;
}

namespace {

std::string pct(std::optional<double> v) {
  if (!v) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << 100.0 * *v;
  return ss.str();
}

std::string cell_text(const Cell& c) {
  if (c.total == 0) return "-";
  return pct(c.accuracy()) + " (" + std::to_string(c.correct) + "/" + std::to_string(c.total) + ")";
}

ojson cell_json(const Cell& c) {
  ojson j;
  j["correct"] = c.correct;
  j["total"] = c.total;
  j["accuracy"] = c.accuracy() ? ojson(*c.accuracy()) : ojson(nullptr);
  return j;
}

}  // namespace

std::string render_eval_text(const EvalReport& r) {
  std::ostringstream out;
  if (r.has_task1) {
    out << "Task 1: answer consistency (ACC %)\n";
    out << "  overall: " << cell_text(r.overall) << "\n\n";
    out << "  " << std::left << std::setw(10) << "language";
    for (auto l : all_labels()) out << std::setw(22) << to_string(l);
    out << "\n";
    for (auto lang : {Language::en, Language::zh}) {
      out << "  " << std::setw(10) << to_string(lang);
      for (auto l : all_labels()) out << std::setw(22) << cell_text(r.by_language_label.at({lang, l}));
      out << "\n";
    }
    out << "\n  " << std::setw(18) << "label";
    for (auto b : all_length_buckets()) out << std::setw(20) << to_string(b);
    out << "\n";
    for (auto l : all_labels()) {
      out << "  " << std::setw(18) << to_string(l);
      for (auto b : all_length_buckets()) out << std::setw(20) << cell_text(r.by_label_bucket.at({l, b}));
      out << "\n";
    }
  }
  if (r.has_task2) {
    if (r.has_task1) out << "\n";
    out << "Task 2: unanswerable questions (% of " << r.task2.total() << ")\n";
    const auto p = r.task2.percentages();
    for (std::size_t i = 0; i < kTask2ClassCount; ++i) {
      out << "  " << std::left << std::setw(16) << to_string(static_cast<Task2Class>(i)) << std::right
          << std::setw(8) << (p ? pct((*p)[i] / 100.0) : "-") << "  (" << r.task2.counts[i] << ")\n";
    }
  }
  if (!r.flagged.empty()) {
    out << "\nflagged judgments:";
    for (const auto& [f, n] : r.flagged) {
      const auto it = r.excluded.find(f);
      out << " " << to_string(f) << "=" << n;
      if (it != r.excluded.end()) out << " (" << it->second << " excluded)";
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::ordered_json eval_to_json(const EvalReport& r) {
  ojson j = ojson::object();
  if (r.has_task1) {
    ojson t1;
    t1["overall"] = cell_json(r.overall);
    t1["by_language_label"] = ojson::object();
    for (const auto& [k, c] : r.by_language_label)
      t1["by_language_label"][std::string(to_string(k.first))][std::string(to_string(k.second))] = cell_json(c);
    t1["by_label_length"] = ojson::object();
    for (const auto& [k, c] : r.by_label_bucket)
      t1["by_label_length"][std::string(to_string(k.first))][std::string(to_string(k.second))] = cell_json(c);
    j["task1"] = std::move(t1);
  }
  if (r.has_task2) {
    ojson t2;
    t2["total"] = r.task2.total();
    const auto p = r.task2.percentages();
    for (std::size_t i = 0; i < kTask2ClassCount; ++i) {
      t2[std::string(to_string(static_cast<Task2Class>(i)))] = {
          {"count", r.task2.counts[i]}, {"percent", p ? ojson((*p)[i]) : ojson(nullptr)}};
    }
    j["task2"] = std::move(t2);
  }
  j["flagged"] = ojson::object();
  for (const auto& [f, n] : r.flagged) j["flagged"][std::string(to_string(f))] = n;
  j["excluded"] = ojson::object();
  for (const auto& [f, n] : r.excluded) j["excluded"][std::string(to_string(f))] = n;
  return j;
}

namespace {

template <class F>
void for_each_record(std::string_view data, const char* what, F&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const auto line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed ") + what + " record: " + e.what(), line_no);
    } catch (const InputError& e) {
      throw InputError(e.what(), line_no);
    } catch (const ValidationError& e) {
      throw InputError(e.what(), line_no);
    }
  }
}

}  // namespace

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    ojson j;
    j["id"] = p.example_id;
    j["model"] = p.model;
    j["answer"] = p.answer;
    j["transport_failed"] = p.transport_failed;
    j["context_overflow"] = p.context_overflow;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<Prediction> parse_predictions(std::string_view data) {
  std::vector<Prediction> out;
  for_each_record(data, "prediction", [&](const nlohmann::json& j) {
    Prediction p;
    p.example_id = j.at("id").get<std::string>();
    p.model = j.value("model", std::string());
    p.answer = j.at("answer").get<std::string>();
    p.transport_failed = j.value("transport_failed", false);
    p.context_overflow = j.value("context_overflow", false);
    out.push_back(std::move(p));
  });
  return out;
}

std::string judgments_to_jsonl(const std::vector<EvalJudgment>& judgments) {
  std::string out;
  for (const auto& jd : judgments) {
    ojson j;
    j["id"] = jd.example_id();
    j["task1_score"] = jd.task1_score() ? ojson(*jd.task1_score()) : ojson(nullptr);
    j["task2_class"] = jd.task2_class() ? ojson(to_string(*jd.task2_class())) : ojson(nullptr);
    j["flag"] = to_string(jd.flag());
    j["task1_reply"] = jd.task1_reply();
    j["task2_reply"] = jd.task2_reply();
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<EvalJudgment> parse_judgments(std::string_view data) {
  std::vector<EvalJudgment> out;
  for_each_record(data, "judgment", [&](const nlohmann::json& j) {
    std::optional<int> score;
    if (!j.at("task1_score").is_null()) score = j["task1_score"].get<int>();
    std::optional<Task2Class> cls;
    if (!j.at("task2_class").is_null()) {
      const auto s = j["task2_class"].get<std::string>();
      cls = parse_task2_class(s);
      if (!cls) throw InputError("unknown task2 class '" + s + "'");
    }
    const auto fs = j.value("flag", std::string("none"));
    const auto flag = parse_judgment_flag(fs);
    if (!flag) throw InputError("unknown judgment flag '" + fs + "'");
    out.emplace_back(j.at("id").get<std::string>(), score, cls, *flag, j.value("task1_reply", std::string()),
                     j.value("task2_reply", std::string()));
  });
  return out;
}

}  // namespace factguard
