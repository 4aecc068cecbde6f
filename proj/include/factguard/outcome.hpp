#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace factguard {

/// Closed set of reasons an item can leave the synthesis pipeline.
enum class DropReason {
  below_quality_threshold,
  quality_parse_error,
  no_topic,
  malformed_qa,
  evidence_not_found,
  qa_judge_fail,
  judge_parse_error,
  rewrite_noop,
  gold_missing_refusal,
  evidence_absent_at_deletion,
  context_exhausted,
  conflicting_answer,
  common_sense,
  answer_conflict,
  backend_error,
  review_error,
};

std::string_view to_string(DropReason r);
std::optional<DropReason> parse_drop_reason(std::string_view s);
const std::vector<DropReason>& all_drop_reasons();

struct Drop {
  DropReason reason;
  std::string detail;
};

/// Either a value or the reason the item was dropped.
template <class T>
class Outcome {
 public:
  Outcome(T value) : state_(std::move(value)) {}
  Outcome(Drop drop) : state_(std::move(drop)) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(state_); }
  T& value() & { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const Drop& drop() const { return std::get<Drop>(state_); }

 private:
  std::variant<T, Drop> state_;
};

}  // namespace factguard
