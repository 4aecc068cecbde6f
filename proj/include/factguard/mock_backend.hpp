#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "factguard/backend.hpp"

namespace factguard {

/// Reply chosen when every `when` variable equals and every `contains`
/// variable contains the given value. The pseudo-variable "prompt" refers to
/// the rendered user message.
struct MockRule {
  std::string role = "*";
  std::map<std::string, std::string> when;
  std::map<std::string, std::string> contains;
  std::string reply;
};

/// Scripted replies for the mock backend.
///
/// Lookup order: "role/<digest>" entry, rules in order, "role/*" entry,
/// "*/*" entry. Unmatched requests are answered by the seeded simulator, or
/// fail with an unscripted error naming the key in strict mode.
///
/// Reply directives: "$echo" returns the user message, "$simulate" defers to
/// the simulator, "$fail:transport" / "$fail:server" / "$fail:client" return
/// the corresponding backend error.
struct MockScript {
  std::map<std::string, std::string> replies;
  std::vector<MockRule> rules;
  bool strict = false;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
};

/// Deterministic, network-free backend. Replies depend only on the script,
/// the seed and the request, so concurrent use needs no locking.
class MockBackend final : public AgentBackend {
 public:
  MockBackend(MockScript script, std::uint64_t seed);

  std::string name() const override { return "mock"; }
  Completion complete(const ChatRequest& request) override;

  /// "role/<digest>" key for a request.
  static std::string key(const ChatRequest& request);

 private:
  MockScript script_;
  std::uint64_t seed_;
};

std::shared_ptr<MockBackend> mock_backend(MockScript script = {}, std::uint64_t seed = 0);

/// Rule-based stand-in for every agent role, driven by the request
/// variables. It is a toy reader/writer built for offline pipeline runs, not
/// a model of any real LLM.
class Simulator {
 public:
  explicit Simulator(std::uint64_t seed) : seed_(seed) {}

  /// nullopt for roles it does not know.
  std::optional<std::string> reply(const ChatRequest& request) const;

  /// Cloze reader: finds the quoted statement of a question in `passages`
  /// and returns the text that fills its blank.
  static std::optional<std::string> read_answer(const std::string& passages, const std::string& question);

 private:
  std::uint64_t roll(const ChatRequest& request, std::string_view salt) const;

  std::uint64_t seed_;
};

}  // namespace factguard
