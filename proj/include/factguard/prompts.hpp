#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "factguard/backend.hpp"

namespace factguard {

/// Agent role names; each has one prompt template.
namespace roles {
inline constexpr std::string_view quality = "quality";
inline constexpr std::string_view topics = "topics";
inline constexpr std::string_view qa_generate = "qa_generate";
inline constexpr std::string_view qa_judge = "qa_judge";
inline constexpr std::string_view rewrite = "rewrite";
inline constexpr std::string_view gold_writer = "gold_writer";
inline constexpr std::string_view review_conflict = "review_conflict";
inline constexpr std::string_view review_common_sense = "review_common_sense";
inline constexpr std::string_view candidate = "candidate";
inline constexpr std::string_view judge_task1 = "judge_task1";
inline constexpr std::string_view judge_task2 = "judge_task2";
}  // namespace roles

const std::vector<std::string>& all_roles();

/// A versioned prompt: "# factguard prompt <version>: <role>" header, then
/// "[system]" and "[user]" sections with {{placeholder}} slots.
struct PromptTemplate {
  std::string role;
  std::string version;
  std::string system;
  std::string user;

  static PromptTemplate parse(std::string_view source);

  std::vector<std::string> placeholders() const;

  /// Renders into a chat request. Every placeholder must have a variable;
  /// a missing one is a ConfigError.
  ChatRequest render(const std::map<std::string, std::string>& variables) const;
};

class PromptLibrary {
 public:
  /// Templates compiled in from prompts/v1.
  static PromptLibrary builtin();
  /// Built-in set overridden by any "<role>.txt" files in `dir`.
  static PromptLibrary load(const std::filesystem::path& dir);

  const PromptTemplate& get(std::string_view role) const;
  void set(PromptTemplate t);

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace factguard
