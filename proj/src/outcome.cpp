#include "factguard/outcome.hpp"

namespace factguard {

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::below_quality_threshold: return "below_quality_threshold";
    case DropReason::quality_parse_error: return "quality_parse_error";
    case DropReason::no_topic: return "no_topic";
    case DropReason::malformed_qa: return "malformed_qa";
    case DropReason::evidence_not_found: return "evidence_not_found";
    case DropReason::qa_judge_fail: return "qa_judge_fail";
    case DropReason::judge_parse_error: return "judge_parse_error";
    case DropReason::rewrite_noop: return "rewrite_noop";
    case DropReason::gold_missing_refusal: return "gold_missing_refusal";
    case DropReason::evidence_absent_at_deletion: return "evidence_absent_at_deletion";
    case DropReason::context_exhausted: return "context_exhausted";
    case DropReason::conflicting_answer: return "conflicting_answer";
    case DropReason::common_sense: return "common_sense";
    case DropReason::answer_conflict: return "answer_conflict";
    case DropReason::backend_error: return "backend_error";
    case DropReason::review_error: return "review_error";
  }
  return "backend_error";
}

const std::vector<DropReason>& all_drop_reasons() {
  static const std::vector<DropReason> v{
      DropReason::below_quality_threshold, DropReason::quality_parse_error,
      DropReason::no_topic,                DropReason::malformed_qa,
      DropReason::evidence_not_found,      DropReason::qa_judge_fail,
      DropReason::judge_parse_error,       DropReason::rewrite_noop,
      DropReason::gold_missing_refusal,    DropReason::evidence_absent_at_deletion,
      DropReason::context_exhausted,
      DropReason::conflicting_answer,      DropReason::common_sense,
      DropReason::answer_conflict,         DropReason::backend_error,
      DropReason::review_error};
  return v;
}

std::optional<DropReason> parse_drop_reason(std::string_view s) {
  for (auto r : all_drop_reasons()) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

}  // namespace factguard
