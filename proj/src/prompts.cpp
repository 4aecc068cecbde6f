#include "factguard/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "factguard/errors.hpp"
#include "factguard/text.hpp"
#include "prompts_embedded.hpp"

namespace factguard {

const std::vector<std::string>& all_roles() {
  static const std::vector<std::string> v{
      std::string(roles::quality),         std::string(roles::topics),
      std::string(roles::qa_generate),     std::string(roles::qa_judge),
      std::string(roles::rewrite),         std::string(roles::gold_writer),
      std::string(roles::review_conflict), std::string(roles::review_common_sense),
      std::string(roles::candidate),       std::string(roles::judge_task1),
      std::string(roles::judge_task2)};
  return v;
}

PromptTemplate PromptTemplate::parse(std::string_view source) {
  constexpr std::string_view kHeader = "# factguard prompt ";
  PromptTemplate t;
  std::string* section = nullptr;
  std::istringstream in{std::string(source)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      if (line.rfind(kHeader, 0) != 0) throw ConfigError("prompt template lacks a header line");
      const auto rest = line.substr(kHeader.size());
      const auto colon = rest.find(':');
      if (colon == std::string::npos) throw ConfigError("malformed prompt header: " + line);
      t.version = text::trim(rest.substr(0, colon));
      t.role = text::trim(rest.substr(colon + 1));
      continue;
    }
    if (line == "[system]") {
      section = &t.system;
      continue;
    }
    if (line == "[user]") {
      section = &t.user;
      continue;
    }
    if (section == nullptr) {
      if (text::trim(line).empty()) continue;
      throw ConfigError("prompt '" + t.role + "': text before the first section");
    }
    section->append(line).push_back('\n');
  }
  t.system = text::trim(t.system);
  t.user = text::trim(t.user);
  if (t.user.empty()) throw ConfigError("prompt '" + t.role + "' has no [user] section");
  return t;
}

namespace {

template <class Fn>
void scan_placeholders(const std::string& s, Fn&& fn) {
  std::size_t pos = 0;
  while ((pos = s.find("{{", pos)) != std::string::npos) {
    const auto close = s.find("}}", pos + 2);
    if (close == std::string::npos) return;
    fn(pos, close + 2, s.substr(pos + 2, close - pos - 2));
    pos = close + 2;
  }
}

std::string substitute(const std::string& s, const std::map<std::string, std::string>& vars,
                       const std::string& role) {
  std::string out;
  std::size_t copied = 0;
  scan_placeholders(s, [&](std::size_t begin, std::size_t end, const std::string& name) {
    const auto it = vars.find(name);
    if (it == vars.end())
      throw ConfigError("prompt '" + role + "': no value for placeholder {{" + name + "}}");
    out.append(s, copied, begin - copied);
    out += it->second;
    copied = end;
  });
  out.append(s, copied, std::string::npos);
  return out;
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  auto collect = [&](std::size_t, std::size_t, const std::string& name) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  };
  scan_placeholders(system, collect);
  scan_placeholders(user, collect);
  return out;
}

ChatRequest PromptTemplate::render(const std::map<std::string, std::string>& variables) const {
  ChatRequest req;
  req.agent = role;
  if (!system.empty()) req.messages.push_back({"system", substitute(system, variables, role)});
  req.messages.push_back({"user", substitute(user, variables, role)});
  req.variables = variables;
  return req;
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (const auto& [role, source] : embedded_prompts()) {
    auto t = PromptTemplate::parse(source);
    if (t.role != role) throw ConfigError("embedded prompt '" + role + "' declares role '" + t.role + "'");
    lib.set(std::move(t));
  }
  return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  auto lib = builtin();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw ConfigError("prompt directory not found: " + dir.string());
  for (const auto& role : all_roles()) {
    const auto file = dir / (role + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto t = PromptTemplate::parse(ss.str());
    if (t.role != role) throw ConfigError(file.string() + " declares role '" + t.role + "'");
    lib.set(std::move(t));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(std::string_view role) const {
  const auto it = templates_.find(role);
  if (it == templates_.end()) throw ConfigError("no prompt template for role '" + std::string(role) + "'");
  return it->second;
}

void PromptLibrary::set(PromptTemplate t) {
  auto role = t.role;
  templates_.insert_or_assign(std::move(role), std::move(t));
}

}  // namespace factguard
