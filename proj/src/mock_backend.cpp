#include "factguard/mock_backend.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "factguard/errors.hpp"
#include "factguard/prompts.hpp"
#include "factguard/text.hpp"

namespace factguard {

using json = nlohmann::json;

MockScript MockScript::from_json(const json& j) {
  MockScript s;
  if (!j.is_object()) throw ConfigError("mock script must be a JSON object");
  s.strict = j.value("strict", false);
  if (j.contains("replies")) {
    for (const auto& [k, v] : j.at("replies").items()) {
      if (!v.is_string()) throw ConfigError("mock reply for '" + k + "' must be a string");
      s.replies[k] = v.get<std::string>();
    }
  }
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      MockRule rule;
      rule.role = r.value("role", "*");
      if (!r.contains("reply") || !r.at("reply").is_string())
        throw ConfigError("mock rule needs a string \"reply\"");
      rule.reply = r.at("reply").get<std::string>();
      if (r.contains("when"))
        for (const auto& [k, v] : r.at("when").items()) rule.when[k] = v.get<std::string>();
      if (r.contains("contains"))
        for (const auto& [k, v] : r.at("contains").items()) rule.contains[k] = v.get<std::string>();
      s.rules.push_back(std::move(rule));
    }
  }
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("malformed mock script " + path.string() + ": " + e.what());
  }
}

MockBackend::MockBackend(MockScript script, std::uint64_t seed)
    : script_(std::move(script)), seed_(seed) {}

std::string MockBackend::key(const ChatRequest& request) {
  return request.agent + "/" + request.digest();
}

namespace {

const std::string* variable(const ChatRequest& request, const std::string& name) {
  if (name == "prompt") return &request.last_user();
  const auto it = request.variables.find(name);
  return it == request.variables.end() ? nullptr : &it->second;
}

bool matches(const MockRule& rule, const ChatRequest& request) {
  if (rule.role != "*" && rule.role != request.agent) return false;
  for (const auto& [name, value] : rule.when) {
    const auto* v = variable(request, name);
    if (v == nullptr || *v != value) return false;
  }
  for (const auto& [name, value] : rule.contains) {
    const auto* v = variable(request, name);
    if (v == nullptr || v->find(value) == std::string::npos) return false;
  }
  return true;
}

}  // namespace

Completion MockBackend::complete(const ChatRequest& request) {
  const std::string k = key(request);
  const std::string* scripted = nullptr;
  if (auto it = script_.replies.find(k); it != script_.replies.end()) scripted = &it->second;
  if (scripted == nullptr) {
    for (const auto& rule : script_.rules) {
      if (matches(rule, request)) {
        scripted = &rule.reply;
        break;
      }
    }
  }
  if (scripted == nullptr) {
    if (auto it = script_.replies.find(request.agent + "/*"); it != script_.replies.end())
      scripted = &it->second;
    else if (auto it2 = script_.replies.find("*/*"); it2 != script_.replies.end())
      scripted = &it2->second;
  }

  if (scripted != nullptr) {
    const std::string& r = *scripted;
    if (r == "$echo") return Completion::success(request.last_user());
    if (r == "$fail:transport") return Completion::failure({BackendErrorKind::transport, "scripted transport failure"});
    if (r == "$fail:server") return Completion::failure({BackendErrorKind::server, "scripted HTTP 500"});
    if (r == "$fail:client") return Completion::failure({BackendErrorKind::client, "scripted HTTP 400"});
    if (r != "$simulate") return Completion::success(r);
  } else if (script_.strict) {
    return Completion::failure({BackendErrorKind::unscripted, "no scripted reply for key " + k});
  }

  if (auto reply = Simulator(seed_).reply(request)) return Completion::success(*reply);
  return Completion::failure({BackendErrorKind::unscripted, "no scripted reply for key " + k});
}

std::shared_ptr<MockBackend> mock_backend(MockScript script, std::uint64_t seed) {
  return std::make_shared<MockBackend>(std::move(script), seed);
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

constexpr std::string_view kOpenQuote = "\xE2\x80\x9C";   // “
constexpr std::string_view kCloseQuote = "\xE2\x80\x9D";  // ”
constexpr std::string_view kBlank = "___";
constexpr std::string_view kZhQuestionPrefix = "根据文章，";

std::string var(const ChatRequest& r, const std::string& name) {
  const auto it = r.variables.find(name);
  return it == r.variables.end() ? std::string{} : it->second;
}

bool is_zh(const ChatRequest& r, const std::string& question = {}) {
  const auto lang = var(r, "language");
  if (!lang.empty()) return lang == "zh";
  return question.rfind(kZhQuestionPrefix, 0) == 0;
}

std::string make_question(const std::string& statement, bool zh) {
  if (zh) return std::string(kZhQuestionPrefix) + std::string(kOpenQuote) + statement +
                std::string(kCloseQuote) + "中空缺的内容是什么？";
  return "According to the article, what fills the blank in " + std::string(kOpenQuote) + statement +
         std::string(kCloseQuote) + "?";
}

struct QuotedStatement {
  std::size_t begin = 0;  // offset of the statement inside the question
  std::string text;
};

std::optional<QuotedStatement> quoted_statement(const std::string& question) {
  const auto open = question.find(kOpenQuote);
  const auto close = question.rfind(kCloseQuote);
  if (open == std::string::npos || close == std::string::npos || close <= open) return std::nullopt;
  const auto begin = open + kOpenQuote.size();
  return QuotedStatement{begin, question.substr(begin, close - begin)};
}

std::string strip_ascii_punct(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (b < e && punct(s[b])) ++b;
  while (e > b && punct(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::size_t occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Runs of ASCII digits with their offsets.
std::vector<std::pair<std::size_t, std::string>> digit_runs(std::string_view s) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isdigit(static_cast<unsigned char>(s[i])) == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0) ++j;
    out.emplace_back(i, std::string(s.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::string increment_number(const std::string& digits) {
  std::string out = digits;
  int i = static_cast<int>(out.size()) - 1;
  while (i >= 0) {
    if (out[static_cast<std::size_t>(i)] == '9') {
      out[static_cast<std::size_t>(i)] = '0';
      --i;
    } else {
      ++out[static_cast<std::size_t>(i)];
      return out;
    }
  }
  return "1" + out;
}

bool contains_any(std::string_view hay, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](std::string_view n) { return hay.find(n) != std::string_view::npos; });
}

std::string simulate_quality(const ChatRequest& r, std::uint64_t roll) {
  const auto fragment = var(r, "fragment");
  const auto ts = text::terms(fragment);
  if (ts.size() < 12) return "SCORE: 1";
  std::vector<std::string> sorted = ts;
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = static_cast<double>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  if (distinct / static_cast<double>(ts.size()) < 0.1) return "SCORE: 2";
  return "SCORE: " + std::to_string(4 + roll % 2);
}

std::string simulate_topics(const ChatRequest& r) {
  const auto f = var(r, "fragment");
  std::vector<std::string> found;
  bool time = contains_any(f, {"January", "February", "March", "April", "May ", "June", "July", "August",
                               "September", "October", "November", "December", "century", "年", "月"});
  for (const auto& [_, run] : digit_runs(f)) {
    if (run.size() == 4 && (run[0] == '1' || run[0] == '2')) time = true;
  }
  if (time) found.emplace_back("time");
  if (has_digit(f)) found.emplace_back("numeric");
  if (contains_any(f, {" City", " River", " Street", " County", " Province", " Kingdom", "省", "市", "县", "河"}))
    found.emplace_back("location");
  if (contains_any(f, {"Mr. ", "Mrs. ", "Dr. ", "Judge ", "Captain ", "General ", "先生", "女士", "法官", "将军"}))
    found.emplace_back("person");
  if (contains_any(f, {"Court", "Company", "Corporation", "University", "Ministry", "Council", "Bank",
                       "Committee", "公司", "法院", "大学", "委员会", "银行", "政府"}))
    found.emplace_back("organization");
  if (contains_any(f, {" war", " battle", " trial", " election", " treaty", " hearing", "战争", "战役",
                       "审判", "会议", "选举"}))
    found.emplace_back("event");
  if (contains_any(f, {" ship", " sword", " letter", " machine", " painting", " ring", "船", "剑", "信", "机器"}))
    found.emplace_back("object");
  if (found.empty()) return "TOPICS: none";
  std::string out = "TOPICS: ";
  for (std::size_t i = 0; i < found.size(); ++i) out += (i ? ", " : "") + found[i];
  return out;
}

std::string simulate_qa(const ChatRequest& r, std::uint64_t roll) {
  const auto fragment = var(r, "fragment");
  const bool zh = is_zh(r);
  struct Candidate {
    std::string sentence;
    std::string answer;
  };
  std::vector<Candidate> candidates;
  for (const auto& span : text::sentence_spans(fragment)) {
    const auto sentence = text::normalize_whitespace(std::string_view(fragment).substr(span.begin, span.size()));
    if (text::count_tokens(sentence) < 6) continue;
    if (sentence.find(kOpenQuote) != std::string::npos || sentence.find(kCloseQuote) != std::string::npos ||
        sentence.find(kBlank) != std::string::npos)
      continue;
    if (text::find_normalized(fragment, sentence).size() != 1) continue;
    if (zh) {
      for (const auto& [_, run] : digit_runs(sentence)) {
        if (run.size() >= 2 && occurrences(sentence, run) == 1) candidates.push_back({sentence, run});
      }
      continue;
    }
    const auto words = split_spaces(sentence);
    for (std::size_t i = 1; i < words.size(); ++i) {
      const auto w = strip_ascii_punct(words[i]);
      if (w.size() < 2) continue;
      const bool capital = std::isupper(static_cast<unsigned char>(w[0])) != 0 && w.size() >= 3;
      if (!has_digit(w) && !capital) continue;
      if (occurrences(sentence, w) != 1) continue;
      candidates.push_back({sentence, w});
    }
  }
  if (candidates.empty()) return "No suitable fact was found in this passage.";
  const auto& c = candidates[roll % candidates.size()];
  std::string statement = c.sentence;
  statement.replace(statement.find(c.answer), c.answer.size(), kBlank);
  return "QUESTION: " + make_question(statement, zh) + "\nANSWER: " + c.answer + "\nEVIDENCE: " + c.sentence;
}

// Lowercases a leading function word so a prefix can precede it.
std::string lower_first(const std::string& s) {
  static constexpr std::string_view kWords[] = {"The ", "On ", "In ", "At ", "By ", "Under ", "A ", "An ", "It "};
  for (std::string_view w : kWords) {
    if (s.compare(0, w.size(), w) != 0) continue;
    std::string out = s;
    out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
    return out;
  }
  return s;
}

std::string rewrite_statement(const std::string& statement, std::string_view strategy, bool zh) {
  const auto blank = statement.find(kBlank);
  if (strategy == "impossible_condition")
    return zh ? "在公元前五百年，" + statement : "Two centuries before any of these events, " + lower_first(statement);
  if (strategy == "other_false_assumption") {
    if (zh) return "并非" + statement;
    static const std::vector<std::string> aux{"was", "is", "were", "are", "had", "has", "did", "will", "would", "could"};
    auto words = split_spaces(statement);
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (std::find(aux.begin(), aux.end(), words[i]) != aux.end()) {
        words.insert(words.begin() + static_cast<long>(i) + 1, "not");
        std::string out;
        for (std::size_t k = 0; k < words.size(); ++k) out += (k ? " " : "") + words[k];
        return out;
      }
    }
    return "It is false that " + lower_first(statement);
  }
  // entity_substitution
  for (const auto& [pos, run] : digit_runs(statement)) {
    if (blank != std::string::npos && pos >= blank && pos < blank + kBlank.size()) continue;
    std::string out = statement;
    out.replace(pos, run.size(), increment_number(run));
    return out;
  }
  if (!zh) {
    const auto words = split_spaces(statement);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      offset = statement.find(words[i], offset);
      const auto w = strip_ascii_punct(words[i]);
      if (i > 0 && w.size() >= 3 && std::isupper(static_cast<unsigned char>(w[0])) != 0 && w != kBlank) {
        const std::string replacement = w == "Halvorsen" ? "Ravensworth" : "Halvorsen";
        std::string out = statement;
        out.replace(statement.find(w, offset), w.size(), replacement);
        return out;
      }
      offset += words[i].size();
    }
    return "the former " + lower_first(statement);
  }
  return "据称" + statement;
}

std::string simulate_rewrite(const ChatRequest& r) {
  const auto question = var(r, "question");
  const auto quoted = quoted_statement(question);
  if (!quoted) return "QUESTION: " + question;
  const bool zh = question.rfind(kZhQuestionPrefix, 0) == 0;
  const auto rewritten = rewrite_statement(quoted->text, var(r, "strategy"), zh);
  std::string out = question;
  out.replace(quoted->begin, quoted->text.size(), rewritten);
  return "QUESTION: " + out;
}

std::string simulate_gold(const ChatRequest& r) {
  const bool zh = is_zh(r);
  const auto quoted = quoted_statement(var(r, "question"));
  const auto statement = quoted ? quoted->text : var(r, "question");
  const auto evidence = text::normalize_whitespace(var(r, "evidence"));
  if (var(r, "reason") == "misleading") {
    if (zh) return "该问题无法回答。问题的前提“" + statement + "”与文章不符，文章中写的是：“" + evidence + "”。";
    return "The question cannot be answered. Its premise (\"" + statement +
           "\") does not match the article, which states: \"" + evidence + "\"";
  }
  if (zh) return "该问题无法回答。文章中没有提到“" + statement + "”中缺失的信息。";
  return "The question cannot be answered. The article does not contain the statement the question asks about (\"" +
         statement + "\"), so the missing detail is not given.";
}

std::string simulate_candidate(const ChatRequest& r, std::uint64_t roll) {
  const auto question = var(r, "question");
  const bool zh = question.rfind(kZhQuestionPrefix, 0) == 0;
  if (auto answer = Simulator::read_answer(var(r, "context"), question))
    return zh ? "答案是" + *answer + "。" : "The answer is " + *answer + ".";
  const auto pick = roll % 100;
  if (pick < 35) return zh ? "答案是1987。" : "The answer is 1987.";
  if (pick < 60) return zh ? "答案未知。" : "The answer is unknown.";
  return zh ? "该问题无法回答，因为文章中没有提到问题所问的内容，文章只讨论了相关的其他事实。"
            : "The question cannot be answered because the article does not contain the statement it asks "
              "about; it discusses related facts but not this one.";
}

bool recognizes_unanswerable(std::string_view prediction) {
  const auto lower = text::to_lower_ascii(prediction);
  return contains_any(lower, {"cannot be answered", "unknown", "not mentioned", "does not mention",
                              "does not contain", "无法回答", "未知", "没有提到"});
}

std::string simulate_task1(const ChatRequest& r) {
  const auto prediction = var(r, "prediction");
  if (var(r, "label") == "answerable") {
    const auto gold = text::to_lower_ascii(text::normalize_whitespace(var(r, "gold_answer")));
    const auto pred = text::to_lower_ascii(text::normalize_whitespace(prediction));
    return !gold.empty() && pred.find(gold) != std::string::npos ? "SCORE: 1" : "SCORE: 0";
  }
  return recognizes_unanswerable(prediction) ? "SCORE: 1" : "SCORE: 0";
}

std::string simulate_task2(const ChatRequest& r) {
  const auto prediction = var(r, "prediction");
  if (!recognizes_unanswerable(prediction)) return "CLASS: incorrect";
  return text::count_tokens(prediction) <= 8 ? "CLASS: direct_refusal" : "CLASS: reasoned";
}

}  // namespace

std::optional<std::string> Simulator::read_answer(const std::string& passages, const std::string& question) {
  const auto quoted = quoted_statement(question);
  if (!quoted) return std::nullopt;
  const auto blank = quoted->text.find(kBlank);
  if (blank == std::string::npos) return std::nullopt;
  const std::string prefix = quoted->text.substr(0, blank);
  const std::string suffix = quoted->text.substr(blank + kBlank.size());
  const std::string p = text::normalize_whitespace(passages);

  auto plausible = [](std::string_view a) {
    if (a.empty() || a.size() > 80) return false;
    return a.find(". ") == std::string_view::npos && a.find("\xE3\x80\x82") == std::string_view::npos;
  };
  if (!prefix.empty()) {
    for (auto pos = p.find(prefix); pos != std::string::npos; pos = p.find(prefix, pos + 1)) {
      const auto start = pos + prefix.size();
      if (!suffix.empty()) {
        const auto q = p.find(suffix, start);
        if (q != std::string::npos && q > start && plausible(std::string_view(p).substr(start, q - start)))
          return p.substr(start, q - start);
      } else {
        auto end = start;
        while (end < p.size() && p[end] != ' ') ++end;
        auto a = strip_ascii_punct(std::string_view(p).substr(start, end - start));
        if (!a.empty()) return a;
      }
    }
    return std::nullopt;
  }
  if (suffix.empty()) return std::nullopt;
  for (auto q = p.find(suffix); q != std::string::npos; q = p.find(suffix, q + 1)) {
    auto b = q;
    if (b > 0 && std::isdigit(static_cast<unsigned char>(p[b - 1])) != 0) {
      while (b > 0 && std::isdigit(static_cast<unsigned char>(p[b - 1])) != 0) --b;
    } else {
      while (b > 0 && p[b - 1] != ' ' && static_cast<unsigned char>(p[b - 1]) < 0x80) --b;
    }
    if (b < q) return p.substr(b, q - b);
  }
  return std::nullopt;
}

std::uint64_t Simulator::roll(const ChatRequest& request, std::string_view salt) const {
  std::string key = request.agent;
  key += '|';
  key += salt;
  key += '|';
  key += request.digest();
  return text::fnv1a64(key, 0xcbf29ce484222325ULL ^ (seed_ * 0x9E3779B97F4A7C15ULL));
}

std::optional<std::string> Simulator::reply(const ChatRequest& request) const {
  const auto& role = request.agent;
  if (role == roles::quality) return simulate_quality(request, roll(request, "quality"));
  if (role == roles::topics) return simulate_topics(request);
  if (role == roles::qa_generate) return simulate_qa(request, roll(request, "qa"));
  if (role == roles::qa_judge) return std::string("pass");
  if (role == roles::rewrite) return simulate_rewrite(request);
  if (role == roles::gold_writer) return simulate_gold(request);
  if (role == roles::review_conflict) {
    if (auto a = read_answer(var(request, "passages"), var(request, "question"))) return "ANSWER: " + *a;
    return std::string("UNANSWERABLE");
  }
  if (role == roles::review_common_sense) return std::string("NO");
  if (role == roles::candidate) return simulate_candidate(request, roll(request, "candidate"));
  if (role == roles::judge_task1) return simulate_task1(request);
  if (role == roles::judge_task2) return simulate_task2(request);
  return std::nullopt;
}

}  // namespace factguard
