#include "factguard/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "factguard/errors.hpp"
#include "factguard/io.hpp"
#include "factguard/mock_backend.hpp"
#include "factguard/text.hpp"

namespace factguard {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const BackendBinding& RunConfig::binding_for(std::string_view role) const {
  const auto it = role_backends.find(std::string(role));
  return it == role_backends.end() ? default_backend : it->second;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

namespace {

// Reads typed fields from one JSON object, recording problems instead of
// throwing so that every mistake in a file is reported at once.
class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>& problems)
      : j_(j), path_(std::move(path)), problems_(problems) {
    if (!j_.is_object()) problem("must be an object");
  }

  bool ok() const { return j_.is_object(); }
  bool has(const char* key) const { return ok() && j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(path(key) + ": wrong type (" + std::string(j_.at(key).type_name()) + ")");
    }
  }

  void only(std::initializer_list<const char*> keys) {
    if (!ok()) return;
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items()) {
      if (allowed.count(k) == 0) problems_.push_back(path(k.c_str()) + ": unknown key");
    }
  }

  void problem(const std::string& msg) { problems_.push_back((path_.empty() ? "config" : path_) + ": " + msg); }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& problems_;
};

fs::path resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

void apply_binding(BackendBinding& b, const json& j, const std::string& where, std::vector<std::string>& problems) {
  Section s(j, where, problems);
  s.only({"endpoint", "model", "auth_env", "temperature", "max_output_tokens", "timeout_s", "max_in_flight",
          "requests_per_minute", "max_attempts"});
  s.get("endpoint", b.endpoint);
  s.get("model", b.model);
  s.get("auth_env", b.auth_env);
  s.get("temperature", b.temperature);
  s.get("max_output_tokens", b.max_output_tokens);
  s.get("timeout_s", b.timeout_s);
  s.get("max_in_flight", b.max_in_flight);
  s.get("requests_per_minute", b.requests_per_minute);
  s.get("max_attempts", b.max_attempts);
}

void check_binding(const BackendBinding& b, const std::string& where, std::vector<std::string>& problems) {
  if (b.temperature < 0.0) problems.push_back(where + ".temperature must be >= 0");
  if (b.max_output_tokens < 1) problems.push_back(where + ".max_output_tokens must be >= 1");
  if (b.timeout_s < 1) problems.push_back(where + ".timeout_s must be >= 1");
  if (b.max_in_flight < 1) problems.push_back(where + ".max_in_flight must be >= 1");
  if (b.requests_per_minute < 1) problems.push_back(where + ".requests_per_minute must be >= 1");
  if (b.max_attempts < 1) problems.push_back(where + ".max_attempts must be >= 1");
}

ojson binding_json(const BackendBinding& b) {
  ojson j;
  j["endpoint"] = b.endpoint;
  j["model"] = b.model;
  j["auth_env"] = b.auth_env;
  j["temperature"] = b.temperature;
  j["max_output_tokens"] = b.max_output_tokens;
  j["timeout_s"] = b.timeout_s;
  j["max_in_flight"] = b.max_in_flight;
  j["requests_per_minute"] = b.requests_per_minute;
  j["max_attempts"] = b.max_attempts;
  return j;
}

}  // namespace

void apply_config_json(RunConfig& c, const json& j, const fs::path& base_dir, std::vector<std::string>& problems) {
  Section root(j, "", problems);
  if (!root.ok()) return;
  root.only({"corpus", "segment", "synthesis", "retrieval", "backends", "mock", "splits", "prompts_dir", "eval",
             "output_dir", "seed", "workers"});

  if (root.has("corpus")) {
    Section s(root.at("corpus"), "corpus", problems);
    s.only({"path", "format", "default_language", "default_domain", "skip_malformed"});
    std::string path;
    s.get("path", path);
    if (!path.empty()) c.corpus_path = resolve_path(path, base_dir);
    std::string format;
    s.get("format", format);
    if (format == "directory") {
      c.corpus_format = CorpusFormat::plain_text_directory;
    } else if (format == "jsonl" || format == "records") {
      c.corpus_format = CorpusFormat::line_delimited_records;
    } else if (!format.empty()) {
      s.problem("format must be \"directory\" or \"jsonl\", got \"" + format + "\"");
    }
    std::string lang;
    s.get("default_language", lang);
    if (!lang.empty()) {
      if (auto l = parse_language(lang)) c.load.default_language = *l;
      else s.problem("unknown default_language \"" + lang + "\"");
    }
    std::string domain;
    s.get("default_domain", domain);
    if (!domain.empty()) {
      if (auto d = parse_domain(domain)) c.load.default_domain = *d;
      else s.problem("unknown default_domain \"" + domain + "\"");
    }
    s.get("skip_malformed", c.load.skip_malformed);
  }
  if (root.has("segment")) {
    Section s(root.at("segment"), "segment", problems);
    s.only({"min_frag", "max_frag", "strict"});
    s.get("min_frag", c.synthesis.segment.min_frag);
    s.get("max_frag", c.synthesis.segment.max_frag);
    s.get("strict", c.synthesis.segment.strict);
  }
  if (root.has("synthesis")) {
    Section s(root.at("synthesis"), "synthesis", problems);
    s.only({"alpha", "quality_threshold", "label_mix", "review_top_n", "strategies"});
    s.get("alpha", c.synthesis.alpha);
    s.get("quality_threshold", c.synthesis.quality_threshold);
    s.get("review_top_n", c.synthesis.review_top_n);
    if (s.has("label_mix")) {
      Section m(s.at("label_mix"), "synthesis.label_mix", problems);
      m.only({"answerable", "lack_of_evidence", "misleading"});
      for (auto l : all_labels()) {
        const auto name = std::string(to_string(l));
        m.get(name.c_str(), c.synthesis.label_mix[static_cast<std::size_t>(l)]);
      }
    }
    if (s.has("strategies")) {
      std::vector<std::string> names;
      s.get("strategies", names);
      std::vector<RewriteStrategy> strategies;
      for (const auto& n : names) {
        if (auto st = parse_rewrite_strategy(n)) strategies.push_back(*st);
        else s.problem("unknown rewrite strategy \"" + n + "\"");
      }
      c.synthesis.strategies = strategies;
    }
  }
  if (root.has("retrieval")) {
    Section s(root.at("retrieval"), "retrieval", problems);
    s.only({"k1", "b"});
    s.get("k1", c.synthesis.bm25.k1);
    s.get("b", c.synthesis.bm25.b);
  }
  if (root.has("backends")) {
    Section s(root.at("backends"), "backends", problems);
    s.only({"default", "roles"});
    if (s.has("default")) apply_binding(c.default_backend, s.at("default"), "backends.default", problems);
    if (s.has("roles")) {
      Section r(s.at("roles"), "backends.roles", problems);
      if (r.ok()) {
        const auto known = all_roles();
        for (const auto& [role, value] : s.at("roles").items()) {
          if (std::find(known.begin(), known.end(), role) == known.end()) {
            problems.push_back("backends.roles." + role + ": unknown role");
            continue;
          }
          // A role override starts from the default binding.
          auto it = c.role_backends.find(role);
          if (it == c.role_backends.end()) it = c.role_backends.emplace(role, c.default_backend).first;
          apply_binding(it->second, value, "backends.roles." + role, problems);
        }
      }
    }
  }
  if (root.has("mock")) {
    Section s(root.at("mock"), "mock", problems);
    s.only({"enabled", "script"});
    s.get("enabled", c.mock);
    std::string script;
    s.get("script", script);
    if (!script.empty()) c.mock_script = resolve_path(script, base_dir);
  }
  if (root.has("splits")) {
    Section s(root.at("splits"), "splits", problems);
    s.only({"train", "development", "test"});
    for (auto sp : all_splits()) {
      const auto name = std::string(to_string(sp));
      s.get(name.c_str(), c.splits[static_cast<std::size_t>(sp)]);
    }
  }
  if (root.has("prompts_dir")) {
    std::string p;
    root.get("prompts_dir", p);
    if (!p.empty()) c.prompts_dir = resolve_path(p, base_dir);
  }
  if (root.has("eval")) {
    Section s(root.at("eval"), "eval", problems);
    s.only({"exclude_flagged", "skip_context_overflow", "max_context_tokens", "model"});
    s.get("exclude_flagged", c.eval.exclude_flagged);
    s.get("skip_context_overflow", c.eval.skip_context_overflow);
    if (s.has("max_context_tokens")) {
      std::size_t n = 0;
      s.get("max_context_tokens", n);
      c.eval.max_context_tokens = n;
    }
    s.get("model", c.eval.model);
  }
  if (root.has("output_dir")) {
    std::string p;
    root.get("output_dir", p);
    if (!p.empty()) c.output_dir = resolve_path(p, base_dir);
  }
  root.get("seed", c.seed);
  root.get("workers", c.workers);
}

namespace {

void finalize(RunConfig& c, std::vector<std::string>& problems) {
  c.synthesis.seed = c.seed;
  c.synthesis.workers = c.workers;
  c.eval.workers = c.workers;
  try {
    c.synthesis.validate();
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    // Keep the individual lines, not the heading.
    std::size_t pos = msg.find('\n');
    while (pos != std::string::npos) {
      const auto next = msg.find('\n', pos + 1);
      problems.push_back(text::trim(msg.substr(pos + 1, next == std::string::npos ? next : next - pos - 1)));
      pos = next;
    }
  }
  double sum = 0.0;
  for (double r : c.splits) {
    if (r < 0.0) problems.emplace_back("splits: ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) problems.push_back("splits: ratios must sum to 1 (got " + std::to_string(sum) + ")");
  if (!c.eval.model.empty() && c.eval.model.find('\n') != std::string::npos)
    problems.emplace_back("eval.model must be a single line");
  check_binding(c.default_backend, "backends.default", problems);
  for (const auto& [role, b] : c.role_backends) check_binding(b, "backends.roles." + role, problems);
  // Scoring and judging must be repeatable.
  for (auto role : {roles::quality, roles::qa_judge, roles::review_conflict, roles::review_common_sense,
                    roles::judge_task1, roles::judge_task2}) {
    if (c.binding_for(role).temperature != 0.0)
      problems.push_back("role " + std::string(role) + ": judging and scoring roles require temperature 0");
  }
  if (c.prompts_dir && !fs::is_directory(*c.prompts_dir))
    problems.push_back("prompts_dir: not a directory: " + c.prompts_dir->string());
  if (!c.mock_script.empty() && !fs::is_regular_file(c.mock_script))
    problems.push_back("mock.script: file not found: " + c.mock_script.string());
}

template <class T>
void env_number(const EnvLookup& env, const char* name, T& out, std::vector<std::string>& problems) {
  const auto v = env(name);
  if (!v) return;
  try {
    std::size_t used = 0;
    const auto n = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    out = static_cast<T>(n);
  } catch (const std::exception&) {
    problems.push_back(std::string(name) + ": not a non-negative integer: \"" + *v + "\"");
  }
}

}  // namespace

RunConfig resolve_config(const ConfigFlags& flags, const EnvLookup& env) {
  RunConfig c;
  std::vector<std::string> problems;
  if (flags.config_file) {
    try {
      const auto data = io::read_file(*flags.config_file);
      const auto j = json::parse(data);
      apply_config_json(c, j, fs::absolute(*flags.config_file).parent_path(), problems);
    } catch (const InputError& e) {
      problems.emplace_back(e.what());
    } catch (const json::exception& e) {
      problems.push_back(flags.config_file->string() + ": invalid JSON: " + e.what());
    }
  }
  if (auto v = env("FACTGUARD_OUT")) c.output_dir = *v;
  env_number(env, "FACTGUARD_SEED", c.seed, problems);
  env_number(env, "FACTGUARD_WORKERS", c.workers, problems);
  if (auto v = env("FACTGUARD_ENDPOINT")) c.default_backend.endpoint = *v;
  if (auto v = env("FACTGUARD_MODEL")) c.default_backend.model = *v;
  if (auto v = env("FACTGUARD_MOCK")) c.mock = *v == "1" || *v == "true";

  if (flags.mock) c.mock = true;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.workers) c.workers = *flags.workers;
  if (flags.out) c.output_dir = *flags.out;
  if (c.workers < 1) problems.emplace_back("workers must be >= 1");
  c.output_dir = fs::absolute(c.output_dir).lexically_normal();
  if (!c.corpus_path.empty()) c.corpus_path = fs::absolute(c.corpus_path).lexically_normal();
  finalize(c, problems);
  if (!problems.empty()) {
    std::string msg = "configuration has " + std::to_string(problems.size()) + " problem(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return c;
}

ojson to_json(const RunConfig& c) {
  ojson j;
  j["corpus"] = {{"path", c.corpus_path.string()},
                 {"format", c.corpus_format == CorpusFormat::plain_text_directory ? "directory" : "jsonl"},
                 {"default_language", to_string(c.load.default_language)},
                 {"default_domain", to_string(c.load.default_domain)},
                 {"skip_malformed", c.load.skip_malformed}};
  j["segment"] = {{"min_frag", c.synthesis.segment.min_frag},
                  {"max_frag", c.synthesis.segment.max_frag},
                  {"strict", c.synthesis.segment.strict}};
  ojson mix;
  for (auto l : all_labels()) mix[std::string(to_string(l))] = c.synthesis.label_mix[static_cast<std::size_t>(l)];
  ojson strategies = ojson::array();
  for (auto s : c.synthesis.strategies) strategies.push_back(to_string(s));
  j["synthesis"] = {{"alpha", c.synthesis.alpha},
                    {"quality_threshold", c.synthesis.quality_threshold},
                    {"label_mix", mix},
                    {"review_top_n", c.synthesis.review_top_n},
                    {"strategies", strategies}};
  j["retrieval"] = {{"k1", c.synthesis.bm25.k1}, {"b", c.synthesis.bm25.b}};
  ojson roles_j = ojson::object();
  for (const auto& [role, b] : c.role_backends) roles_j[role] = binding_json(b);
  j["backends"] = {{"default", binding_json(c.default_backend)}, {"roles", roles_j}};
  j["mock"] = {{"enabled", c.mock}, {"script", c.mock_script.string()}};
  ojson splits;
  for (auto s : all_splits()) splits[std::string(to_string(s))] = c.splits[static_cast<std::size_t>(s)];
  j["splits"] = splits;
  j["prompts_dir"] = c.prompts_dir ? ojson(c.prompts_dir->string()) : ojson(nullptr);
  j["eval"] = {{"exclude_flagged", c.eval.exclude_flagged},
               {"skip_context_overflow", c.eval.skip_context_overflow},
               {"max_context_tokens",
                c.eval.max_context_tokens ? ojson(*c.eval.max_context_tokens) : ojson(nullptr)},
               {"model", c.eval.model}};
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

std::vector<std::string> check_backends(const RunConfig& c, const std::vector<std::string_view>& roles,
                                        const EnvLookup& env) {
  std::vector<std::string> problems;
  if (c.mock) return problems;
  for (auto role : roles) {
    const auto& b = c.binding_for(role);
    const auto r = std::string(role);
    if (b.endpoint.empty()) problems.push_back("role " + r + ": no endpoint configured");
    if (b.model.empty()) problems.push_back("role " + r + ": no model configured");
    if (!b.auth_env.empty()) {
      const auto token = env(b.auth_env);
      if (!token || token->empty())
        problems.push_back("role " + r + ": auth token variable " + b.auth_env + " is not set");
    }
  }
  return problems;
}

Agents build_agents(const RunConfig& c, const std::vector<std::string_view>& roles, const EnvLookup& env) {
  auto prompts = c.prompts_dir ? PromptLibrary::load(*c.prompts_dir) : PromptLibrary::builtin();
  std::map<std::string, RoleBinding, std::less<>> bindings;
  if (c.mock) {
    auto script = c.mock_script.empty() ? MockScript{} : MockScript::load(c.mock_script);
    BackendPtr backend = mock_backend(std::move(script), c.seed);
    for (auto role : roles) {
      const auto& b = c.binding_for(role);
      bindings[std::string(role)] = RoleBinding{backend, b.model.empty() ? "mock" : b.model, b.temperature,
                                                b.max_output_tokens};
    }
    return Agents(std::move(prompts), std::move(bindings));
  }

  const auto problems = check_backends(c, roles, env);
  if (!problems.empty()) {
    std::string msg = "backend configuration incomplete:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  // Roles with the same endpoint, model and token share one client and one
  // rate limiter.
  std::map<std::string, BackendPtr> shared;
  for (auto role : roles) {
    const auto& b = c.binding_for(role);
    const auto token = b.auth_env.empty() ? std::string() : env(b.auth_env).value_or("");
    const auto key = b.endpoint + '\n' + b.model + '\n' + b.auth_env;
    auto& backend = shared[key];
    if (!backend) {
      auto limiter = std::make_shared<RateLimiter>(b.max_in_flight, b.requests_per_minute);
      auto http = std::make_shared<HttpBackend>(
          HttpBackendConfig{b.endpoint, b.model, token, std::chrono::seconds(b.timeout_s)}, limiter);
      RetryPolicy policy;
      policy.max_attempts = b.max_attempts;
      backend = std::make_shared<RetryingBackend>(http, policy);
    }
    bindings[std::string(role)] = RoleBinding{backend, b.model, b.temperature, b.max_output_tokens};
  }
  return Agents(std::move(prompts), std::move(bindings));
}

}  // namespace factguard
