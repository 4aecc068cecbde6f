#include "factguard/agents.hpp"

#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

#include "factguard/errors.hpp"
#include "factguard/text.hpp"

namespace factguard {

std::string_view to_string(RewriteStrategy s) {
  switch (s) {
    case RewriteStrategy::entity_substitution: return "entity_substitution";
    case RewriteStrategy::impossible_condition: return "impossible_condition";
    case RewriteStrategy::other_false_assumption: return "other_false_assumption";
  }
  return "entity_substitution";
}

std::optional<RewriteStrategy> parse_rewrite_strategy(std::string_view s) {
  for (auto v : all_rewrite_strategies()) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

const std::vector<RewriteStrategy>& all_rewrite_strategies() {
  static const std::vector<RewriteStrategy> v{RewriteStrategy::entity_substitution,
                                              RewriteStrategy::impossible_condition,
                                              RewriteStrategy::other_false_assumption};
  return v;
}

bool RefusalMarkers::present(std::string_view reply, Language language) const {
  const auto haystack = text::to_lower_ascii(reply);
  for (const auto& m : language == Language::en ? en : zh) {
    if (haystack.find(text::to_lower_ascii(m)) != std::string::npos) return true;
  }
  return false;
}

namespace {

std::vector<std::string> lines_of(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto nl = s.find('\n', pos);
    auto line = s.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

// Strips list bullets and markdown emphasis that models like to add before
// field labels.
std::string_view strip_decoration(std::string_view line) {
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t' || line.front() == '*' ||
                           line.front() == '-' || line.front() == '#' || line.front() == '>'))
    line.remove_prefix(1);
  return line;
}

// If `line` starts with `key` followed by ':' (ASCII or fullwidth), returns
// the text after the separator.
std::optional<std::string> field_value(std::string_view line, std::string_view key) {
  line = strip_decoration(line);
  if (line.size() < key.size()) return std::nullopt;
  if (text::to_lower_ascii(line.substr(0, key.size())) != text::to_lower_ascii(key)) return std::nullopt;
  auto rest = line.substr(key.size());
  while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  if (rest.rfind(":", 0) == 0) {
    rest.remove_prefix(1);
  } else if (rest.rfind("\xEF\xBC\x9A", 0) == 0) {  // fullwidth colon
    rest.remove_prefix(3);
  } else {
    return std::nullopt;
  }
  while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
  return text::trim(rest);
}

std::string snake_case(std::string_view s) {
  std::string out;
  for (char c : text::to_lower_ascii(text::trim(s))) {
    if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
      out.push_back(c);
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string strip_quotes(const std::string& s) {
  static const std::vector<std::pair<std::string, std::string>> pairs{
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE3\x80\x8C", "\xE3\x80\x8D"}};
  for (const auto& [open, close] : pairs) {
    if (s.size() >= open.size() + close.size() && s.rfind(open, 0) == 0 &&
        s.compare(s.size() - close.size(), close.size(), close) == 0)
      return text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
  }
  return s;
}

}  // namespace

std::optional<int> parse_quality_score(std::string_view reply) {
  auto first_int = [](std::string_view s) -> std::optional<long> {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::isdigit(static_cast<unsigned char>(s[i])) == 0) continue;
      const bool negative = i > 0 && s[i - 1] == '-';
      long v = 0;
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0 && v < 1000000) {
        v = v * 10 + (s[j] - '0');
        ++j;
      }
      return negative ? -v : v;
    }
    return std::nullopt;
  };
  std::optional<long> value;
  for (const auto& line : lines_of(reply)) {
    if (auto f = field_value(line, "SCORE")) {
      value = first_int(*f);
      break;
    }
  }
  if (!value) value = first_int(reply);
  if (!value || *value < 1 || *value > 5) return std::nullopt;
  return static_cast<int>(*value);
}

std::set<TopicCategory> parse_topics(std::string_view reply, std::vector<std::string>* unknown) {
  std::string body(reply);
  for (const auto& line : lines_of(reply)) {
    if (auto f = field_value(line, "TOPICS")) {
      body = *f;
      break;
    }
  }
  static const std::vector<std::pair<std::string, TopicCategory>> zh_names{
      {"时间", TopicCategory::time},     {"数值", TopicCategory::numeric},
      {"数字", TopicCategory::numeric},  {"地点", TopicCategory::location},
      {"人物", TopicCategory::person},   {"组织", TopicCategory::organization},
      {"机构", TopicCategory::organization}, {"事件", TopicCategory::event},
      {"物体", TopicCategory::object},   {"物品", TopicCategory::object}};
  // Separators: ASCII , ; newline and the CJK comma/enumeration comma.
  for (const char* sep : {"\xEF\xBC\x8C", "\xE3\x80\x81", "\xEF\xBC\x9B"}) {
    std::size_t p = 0;
    const std::string s(sep);
    while ((p = body.find(s, p)) != std::string::npos) body.replace(p, s.size(), ",");
  }
  std::set<TopicCategory> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto end = body.find_first_of(",;\n", pos);
    if (end == std::string::npos) end = body.size();
    std::string item = text::trim(std::string_view(body).substr(pos, end - pos));
    while (!item.empty() && (item.back() == '.' || item.back() == '*')) item.pop_back();
    while (!item.empty() && (item.front() == '*' || item.front() == '-')) item.erase(item.begin());
    item = text::trim(item);
    pos = end + 1;
    if (item.empty() || text::to_lower_ascii(item) == "none" || item == "无") continue;
    if (auto t = parse_topic(item)) {
      out.insert(*t);
      continue;
    }
    const auto zh = std::find_if(zh_names.begin(), zh_names.end(),
                                 [&](const auto& p) { return p.first == item; });
    if (zh != zh_names.end()) {
      out.insert(zh->second);
      continue;
    }
    if (unknown != nullptr) unknown->push_back(item);
  }
  return out;
}

std::optional<QAReply> parse_qa_reply(std::string_view reply) {
  QAReply r;
  std::string* current = nullptr;
  for (const auto& line : lines_of(reply)) {
    if (auto v = field_value(line, "QUESTION")) {
      r.question = *v;
      current = &r.question;
    } else if (auto v2 = field_value(line, "ANSWER")) {
      r.answer = *v2;
      current = &r.answer;
    } else if (auto v3 = field_value(line, "EVIDENCE")) {
      r.evidence = *v3;
      current = &r.evidence;
    } else if (current != nullptr) {
      const auto t = text::trim(line);
      if (t.empty() || t.rfind("```", 0) == 0) {
        current = nullptr;
      } else {
        current->append(current->empty() ? "" : "\n").append(t);
      }
    }
  }
  if (r.question.empty() || r.answer.empty() || r.evidence.empty()) return std::nullopt;
  return r;
}

std::optional<JudgeVerdict> parse_judge_verdict(std::string_view reply) {
  for (const auto& raw : lines_of(reply)) {
    auto line = std::string(strip_decoration(raw));
    line = text::trim(line);
    if (line.empty()) continue;
    if (auto v = field_value(line, "VERDICT")) line = *v;
    const auto lower = text::to_lower_ascii(line);
    if (lower.rfind("pass", 0) == 0) return JudgeVerdict{true, ""};
    if (lower.rfind("fail", 0) == 0) {
      auto reason = snake_case(std::string_view(line).substr(4));
      if (reason.empty()) reason = "unspecified";
      return JudgeVerdict{false, reason};
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::string parse_rewrite(std::string_view reply) {
  for (const auto& line : lines_of(reply)) {
    if (auto v = field_value(line, "QUESTION")) return *v;
  }
  for (const auto& line : lines_of(reply)) {
    auto t = text::trim(line);
    if (!t.empty()) return t;
  }
  return {};
}

std::optional<ConflictReply> parse_conflict_reply(std::string_view reply) {
  auto is_refusal = [](std::string_view v) {
    const auto lower = text::to_lower_ascii(text::trim(v));
    return lower.rfind("unanswerable", 0) == 0 || lower == "none" || lower == "unknown" ||
           lower.find("无法回答") != std::string::npos;
  };
  for (const auto& line : lines_of(reply)) {
    if (auto v = field_value(line, "ANSWER")) {
      if (v->empty() || is_refusal(*v)) return ConflictReply{true, ""};
      return ConflictReply{false, *v};
    }
  }
  for (const auto& line : lines_of(reply)) {
    const auto t = text::trim(strip_decoration(line));
    if (t.empty()) continue;
    if (is_refusal(t)) return ConflictReply{true, ""};
    break;
  }
  return std::nullopt;
}

std::optional<bool> parse_yes_no(std::string_view reply) {
  for (const auto& line : lines_of(reply)) {
    const auto t = text::to_lower_ascii(text::trim(strip_decoration(line)));
    if (t.empty()) continue;
    if (t.rfind("yes", 0) == 0 || t.rfind("是", 0) == 0) return true;
    if (t.rfind("no", 0) == 0 || t.rfind("否", 0) == 0) return false;
    return std::nullopt;
  }
  return std::nullopt;
}

std::map<std::string, std::string> fragment_variables(const Fragment& fragment) {
  return {{"fragment", fragment.text},
          {"doc_id", fragment.doc_id},
          {"fragment_index", std::to_string(fragment.index)}};
}

Agents::Agents(PromptLibrary prompts, std::map<std::string, RoleBinding, std::less<>> bindings,
               RefusalMarkers markers)
    : prompts_(std::move(prompts)), bindings_(std::move(bindings)), markers_(std::move(markers)) {}

Agents Agents::uniform(BackendPtr backend, std::string model, PromptLibrary prompts) {
  std::map<std::string, RoleBinding, std::less<>> bindings;
  for (const auto& role : all_roles()) bindings[role] = RoleBinding{backend, model};
  return Agents(std::move(prompts), std::move(bindings));
}

bool Agents::has_role(std::string_view role) const {
  const auto it = bindings_.find(role);
  return it != bindings_.end() && it->second.backend != nullptr;
}

Completion Agents::call(std::string_view role, const std::map<std::string, std::string>& variables) const {
  const auto it = bindings_.find(role);
  if (it == bindings_.end() || !it->second.backend)
    throw ConfigError("no backend bound for role '" + std::string(role) + "'");
  auto request = prompts_.get(role).render(variables);
  request.agent = std::string(role);
  request.model = it->second.model;
  request.temperature = it->second.temperature;
  request.max_output_tokens = it->second.max_output_tokens;
  validate(request);
  return it->second.backend->complete(request);
}

namespace {

Drop backend_drop(std::string_view role, const Completion& c) {
  return Drop{DropReason::backend_error, std::string(role) + ": " + c.error().message};
}

}  // namespace

Outcome<int> Agents::score_quality(const Fragment& fragment, Language language) const {
  auto vars = fragment_variables(fragment);
  vars["language"] = std::string(to_string(language));
  const auto reply = call(roles::quality, vars);
  if (!reply.ok()) return backend_drop(roles::quality, reply);
  const auto score = parse_quality_score(reply.text());
  if (!score) return Drop{DropReason::quality_parse_error, "unparseable score: " + reply.text().substr(0, 80)};
  return *score;
}

Outcome<std::set<TopicCategory>> Agents::select_topics(const Fragment& fragment) const {
  const auto reply = call(roles::topics, fragment_variables(fragment));
  if (!reply.ok()) return backend_drop(roles::topics, reply);
  std::vector<std::string> unknown;
  auto topics = parse_topics(reply.text(), &unknown);
  for (const auto& u : unknown)
    spdlog::warn("{}#{}: ignoring unknown topic label '{}'", fragment.doc_id, fragment.index, u);
  return topics;
}

Outcome<QATuple> Agents::generate_qa(const Fragment& fragment, const std::set<TopicCategory>& topics,
                                     Language language) const {
  if (topics.empty()) throw std::invalid_argument("generate_qa requires at least one topic");
  auto vars = fragment_variables(fragment);
  std::string topic_list;
  for (auto t : topics) topic_list += (topic_list.empty() ? "" : ", ") + std::string(to_string(t));
  vars["topics"] = topic_list;
  vars["language"] = std::string(to_string(language));
  const auto reply = call(roles::qa_generate, vars);
  if (!reply.ok()) return backend_drop(roles::qa_generate, reply);
  const auto parsed = parse_qa_reply(reply.text());
  if (!parsed) return Drop{DropReason::malformed_qa, "reply lacks QUESTION/ANSWER/EVIDENCE"};

  auto matches = text::find_normalized(fragment.text, parsed->evidence);
  if (matches.empty()) matches = text::find_normalized(fragment.text, strip_quotes(parsed->evidence));
  if (matches.empty())
    return Drop{DropReason::evidence_not_found, "evidence not in fragment: " + parsed->evidence.substr(0, 80)};
  const auto& first = matches.front();
  return QATuple{{fragment.doc_id, fragment.index},
                 parsed->question,
                 parsed->answer,
                 fragment.text.substr(first.begin, first.size())};
}

Outcome<JudgeVerdict> Agents::judge_qa_quality(const QATuple& tuple, const Fragment& fragment) const {
  auto vars = fragment_variables(fragment);
  vars["question"] = tuple.question;
  vars["answer"] = tuple.answer;
  vars["evidence"] = tuple.evidence;
  const auto reply = call(roles::qa_judge, vars);
  if (!reply.ok()) return backend_drop(roles::qa_judge, reply);
  auto verdict = parse_judge_verdict(reply.text());
  if (!verdict) return JudgeVerdict{false, "judge_parse_error"};
  return *verdict;
}

namespace {

std::string_view strategy_instructions(RewriteStrategy s) {
  switch (s) {
    case RewriteStrategy::entity_substitution:
      return "replace a key entity (name, date, number, place or organization) with a similar "
             "but different one that the passage does not support.";
    case RewriteStrategy::impossible_condition:
      return "add a condition that contradicts the passage or could not have held.";
    case RewriteStrategy::other_false_assumption:
      return "embed another false assumption about the passage, such as a reversed relation or "
             "a negated fact.";
  }
  return "";
}

}  // namespace

Outcome<std::string> Agents::rewrite_question(const QATuple& tuple, const Fragment& fragment,
                                              RewriteStrategy strategy) const {
  auto vars = fragment_variables(fragment);
  vars["question"] = tuple.question;
  vars["answer"] = tuple.answer;
  vars["evidence"] = tuple.evidence;
  vars["strategy"] = std::string(to_string(strategy));
  vars["strategy_instructions"] = std::string(strategy_instructions(strategy));
  const auto reply = call(roles::rewrite, vars);
  if (!reply.ok()) return backend_drop(roles::rewrite, reply);
  auto rewritten = parse_rewrite(reply.text());
  if (rewritten.empty()) return Drop{DropReason::rewrite_noop, "empty rewrite"};
  if (text::normalize_whitespace(rewritten) == text::normalize_whitespace(tuple.question))
    return Drop{DropReason::rewrite_noop, "rewrite identical to the original question"};
  return rewritten;
}

Outcome<std::string> Agents::write_unanswerable_gold(const QATuple& tuple, const Fragment& fragment,
                                                     UnanswerableReason reason,
                                                     const std::optional<std::string>& rewritten_question,
                                                     Language language) const {
  if (reason == UnanswerableReason::misleading && !rewritten_question)
    throw std::invalid_argument("misleading gold answers need the rewritten question");
  auto vars = fragment_variables(fragment);
  vars["question"] = rewritten_question.value_or(tuple.question);
  vars["original_question"] = tuple.question;
  vars["answer"] = tuple.answer;
  vars["evidence"] = tuple.evidence;
  vars["reason"] = reason == UnanswerableReason::misleading ? "misleading" : "lack_of_evidence";
  vars["language"] = std::string(to_string(language));
  const auto reply = call(roles::gold_writer, vars);
  if (!reply.ok()) return backend_drop(roles::gold_writer, reply);
  auto gold = text::trim(reply.text());
  if (!markers_.present(gold, language))
    return Drop{DropReason::gold_missing_refusal, "gold answer lacks a refusal marker"};
  return gold;
}

}  // namespace factguard
