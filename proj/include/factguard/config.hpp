#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "factguard/agents.hpp"
#include "factguard/corpus.hpp"
#include "factguard/dataset.hpp"
#include "factguard/eval.hpp"
#include "factguard/pipeline.hpp"

namespace factguard {

/// Endpoint, model, auth and limits for one agent role.
struct BackendBinding {
  std::string endpoint;
  std::string model;
  /// Name of the environment variable holding the bearer token. Empty means
  /// the endpoint takes no auth.
  std::string auth_env = "FACTGUARD_API_KEY";
  double temperature = 0.0;
  int max_output_tokens = 1024;
  int timeout_s = 120;
  int max_in_flight = 4;
  int requests_per_minute = 60;
  int max_attempts = 3;
};

struct RunConfig {
  std::filesystem::path corpus_path;
  CorpusFormat corpus_format = CorpusFormat::plain_text_directory;
  LoadOptions load;
  SynthesisConfig synthesis;
  BackendBinding default_backend;
  std::map<std::string, BackendBinding> role_backends;
  bool mock = false;
  std::filesystem::path mock_script;
  SplitRatios splits = kDefaultSplitRatios;
  std::optional<std::filesystem::path> prompts_dir;
  EvalOptions eval;
  std::filesystem::path output_dir = "factguard-out";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  const BackendBinding& binding_for(std::string_view role) const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
/// Reads the process environment.
EnvLookup process_env();

/// Command-line layer, applied last.
struct ConfigFlags {
  std::optional<std::filesystem::path> config_file;
  bool mock = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> out;
};

/// Defaults, then the config file, then FACTGUARD_* environment variables,
/// then flags. Throws ConfigError listing every problem found.
RunConfig resolve_config(const ConfigFlags& flags, const EnvLookup& env = process_env());

/// Applies one JSON layer. Problems are appended rather than thrown; relative
/// paths resolve against base_dir.
void apply_config_json(RunConfig& config, const nlohmann::json& j, const std::filesystem::path& base_dir,
                       std::vector<std::string>& problems);

/// Resolved config as written next to run outputs. Token values are never
/// included, only the names of the variables that hold them.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Problems preventing live backends for `roles` (none in mock mode).
std::vector<std::string> check_backends(const RunConfig& config, const std::vector<std::string_view>& roles,
                                        const EnvLookup& env = process_env());

/// Agents for `roles`, mock or live per the config. Throws ConfigError when a
/// live binding is incomplete.
Agents build_agents(const RunConfig& config, const std::vector<std::string_view>& roles,
                    const EnvLookup& env = process_env());

}  // namespace factguard
