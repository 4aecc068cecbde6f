#pragma once

#include <array>
#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "factguard/agents.hpp"
#include "factguard/pipeline.hpp"

namespace factguard {

struct Prediction {
  std::string example_id;
  std::string model;
  std::string answer;
  /// The candidate backend failed after retries; answer is empty.
  bool transport_failed = false;
  /// The context exceeded the candidate's window; no call was made.
  bool context_overflow = false;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

enum class Task2Class { incorrect, direct_refusal, reasoned };
inline constexpr std::size_t kTask2ClassCount = 3;
std::string_view to_string(Task2Class c);
std::optional<Task2Class> parse_task2_class(std::string_view s);
const std::vector<Task2Class>& all_task2_classes();

enum class JudgmentFlag { none, judge_parse_error, judge_error, judge_disagreement, transport_failed, context_overflow };
std::string_view to_string(JudgmentFlag f);
std::optional<JudgmentFlag> parse_judgment_flag(std::string_view s);

/// One graded prediction. Construction enforces the coupling between the two
/// tasks: a non-incorrect Task 2 class requires a Task 1 score of 1 and
/// incorrect requires 0.
class EvalJudgment {
 public:
  EvalJudgment() = default;
  EvalJudgment(std::string example_id, std::optional<int> task1_score, std::optional<Task2Class> task2_class,
               JudgmentFlag flag = JudgmentFlag::none, std::string task1_reply = {}, std::string task2_reply = {});

  const std::string& example_id() const { return example_id_; }
  const std::optional<int>& task1_score() const { return task1_score_; }
  const std::optional<Task2Class>& task2_class() const { return task2_class_; }
  JudgmentFlag flag() const { return flag_; }
  /// Raw judge replies kept for audit.
  const std::string& task1_reply() const { return task1_reply_; }
  const std::string& task2_reply() const { return task2_reply_; }

  friend bool operator==(const EvalJudgment&, const EvalJudgment&) = default;

 private:
  std::string example_id_;
  std::optional<int> task1_score_;
  std::optional<Task2Class> task2_class_;
  JudgmentFlag flag_ = JudgmentFlag::none;
  std::string task1_reply_;
  std::string task2_reply_;
};

struct EvalOptions {
  bool task1 = true;
  bool task2 = true;
  /// Leave parse errors, judge failures and task disagreements out of every
  /// numerator and denominator. When false they count as wrong.
  bool exclude_flagged = true;
  /// Leave context_overflow predictions out instead of scoring them 0.
  bool skip_context_overflow = false;
  std::optional<std::size_t> max_context_tokens;
  std::string model = "candidate";
  std::size_t workers = 1;
};

// Judge reply parsers.
std::optional<int> parse_task1_score(std::string_view reply);
std::optional<Task2Class> parse_task2_reply(std::string_view reply);

/// One prediction per example, sorted by example id.
std::vector<Prediction> run_candidate(const std::vector<BenchmarkExample>& examples, const Agents& agents,
                                      const EvalOptions& options, const std::atomic<bool>* cancel = nullptr);

EvalJudgment judge(const BenchmarkExample& example, const Prediction& prediction, const Agents& agents,
                   const EvalOptions& options);

struct IdMismatch {
  std::vector<std::string> missing;    // examples without a prediction
  std::vector<std::string> unknown;    // predictions for no known example
  std::vector<std::string> duplicate;  // ids predicted more than once
  bool ok() const { return missing.empty() && unknown.empty() && duplicate.empty(); }
  std::string describe() const;
};
IdMismatch check_prediction_ids(const std::vector<BenchmarkExample>& examples,
                                const std::vector<Prediction>& predictions);

/// Judges every example that the enabled tasks apply to, sorted by id.
/// Throws ValidationError listing every id mismatch.
std::vector<EvalJudgment> judge_all(const std::vector<BenchmarkExample>& examples,
                                    const std::vector<Prediction>& predictions, const Agents& agents,
                                    const EvalOptions& options, const std::atomic<bool>* cancel = nullptr);

struct Cell {
  std::size_t correct = 0;
  std::size_t total = 0;
  /// Absent for an empty cell.
  std::optional<double> accuracy() const;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Task2Breakdown {
  std::array<std::size_t, kTask2ClassCount> counts{};
  std::size_t total() const;
  /// Percentages in class order, absent when total is 0.
  std::optional<std::array<double, kTask2ClassCount>> percentages() const;
};

struct EvalReport {
  bool has_task1 = false;
  bool has_task2 = false;
  Cell overall;
  std::map<std::pair<Language, Label>, Cell> by_language_label;
  std::map<std::pair<Label, LengthBucket>, Cell> by_label_bucket;
  Task2Breakdown task2;
  /// Judgments left out of the scores, by flag.
  std::map<JudgmentFlag, std::size_t> excluded;
  std::map<JudgmentFlag, std::size_t> flagged;
};

/// Throws ValidationError on a judgment for an unknown or repeated id.
EvalReport aggregate(const std::vector<EvalJudgment>& judgments, const std::vector<BenchmarkExample>& examples,
                     const EvalOptions& options = {});

std::string render_eval_text(const EvalReport& report);
nlohmann::ordered_json eval_to_json(const EvalReport& report);

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions);
std::vector<Prediction> parse_predictions(std::string_view data);
std::string judgments_to_jsonl(const std::vector<EvalJudgment>& judgments);
std::vector<EvalJudgment> parse_judgments(std::string_view data);

}  // namespace factguard
