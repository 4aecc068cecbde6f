#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factguard/backend.hpp"
#include "factguard/corpus.hpp"
#include "factguard/outcome.hpp"
#include "factguard/prompts.hpp"

namespace factguard {

struct FragmentRef {
  std::string doc_id;
  std::size_t index = 0;
  friend bool operator==(const FragmentRef&, const FragmentRef&) = default;
};

struct QATuple {
  FragmentRef fragment_ref;
  std::string question;
  std::string answer;
  /// Verbatim fragment text located by normalized-whitespace matching.
  std::string evidence;
};

enum class RewriteStrategy { entity_substitution, impossible_condition, other_false_assumption };

std::string_view to_string(RewriteStrategy s);
std::optional<RewriteStrategy> parse_rewrite_strategy(std::string_view s);
const std::vector<RewriteStrategy>& all_rewrite_strategies();

enum class UnanswerableReason { lack_of_evidence, misleading };

/// Phrases that mark an explicit statement of unanswerability, per language.
struct RefusalMarkers {
  std::vector<std::string> en{"cannot be answered", "can't be answered", "can not be answered",
                              "unanswerable"};
  std::vector<std::string> zh{"无法回答", "不能回答", "无法作答"};

  /// Case-insensitive (ASCII) search for any marker of the language.
  bool present(std::string_view reply, Language language) const;
};

struct JudgeVerdict {
  bool pass = false;
  std::string reason;  // snake_case, empty on pass
};

// Reply parsers. Exposed for unit tests; agents call them internally.
std::optional<int> parse_quality_score(std::string_view reply);
std::set<TopicCategory> parse_topics(std::string_view reply, std::vector<std::string>* unknown = nullptr);

struct QAReply {
  std::string question;
  std::string answer;
  std::string evidence;
};
/// Reads QUESTION:/ANSWER:/EVIDENCE: fields, tolerating surrounding prose.
/// Returns nullopt when any field is missing or empty.
std::optional<QAReply> parse_qa_reply(std::string_view reply);
std::optional<JudgeVerdict> parse_judge_verdict(std::string_view reply);
/// Rewritten question from a "QUESTION:" line or the first non-empty line.
std::string parse_rewrite(std::string_view reply);

struct ConflictReply {
  bool unanswerable = false;
  std::string answer;
};
/// "ANSWER: <text>" or "UNANSWERABLE" from the passage-only reader.
std::optional<ConflictReply> parse_conflict_reply(std::string_view reply);
/// Leading YES/NO (also 是/否).
std::optional<bool> parse_yes_no(std::string_view reply);

struct RoleBinding {
  BackendPtr backend;
  std::string model;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

/// Dispatches each agent role to its backend with its prompt template.
class Agents {
 public:
  Agents(PromptLibrary prompts, std::map<std::string, RoleBinding, std::less<>> bindings,
         RefusalMarkers markers = {});

  /// Binds every role to one backend.
  static Agents uniform(BackendPtr backend, std::string model = "mock",
                        PromptLibrary prompts = PromptLibrary::builtin());

  bool has_role(std::string_view role) const;
  const RefusalMarkers& refusal_markers() const { return markers_; }

  /// Renders the role's template with `variables` and sends it.
  Completion call(std::string_view role, const std::map<std::string, std::string>& variables) const;

  Outcome<int> score_quality(const Fragment& fragment, Language language) const;
  Outcome<std::set<TopicCategory>> select_topics(const Fragment& fragment) const;
  Outcome<QATuple> generate_qa(const Fragment& fragment, const std::set<TopicCategory>& topics,
                               Language language) const;
  Outcome<JudgeVerdict> judge_qa_quality(const QATuple& tuple, const Fragment& fragment) const;
  Outcome<std::string> rewrite_question(const QATuple& tuple, const Fragment& fragment,
                                        RewriteStrategy strategy) const;
  Outcome<std::string> write_unanswerable_gold(const QATuple& tuple, const Fragment& fragment,
                                               UnanswerableReason reason,
                                               const std::optional<std::string>& rewritten_question,
                                               Language language) const;

 private:
  PromptLibrary prompts_;
  std::map<std::string, RoleBinding, std::less<>> bindings_;
  RefusalMarkers markers_;
};

/// Fragment-level variables common to every synthesis prompt.
std::map<std::string, std::string> fragment_variables(const Fragment& fragment);

}  // namespace factguard
