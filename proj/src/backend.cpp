#include "factguard/backend.hpp"

#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "factguard/text.hpp"

namespace factguard {

using json = nlohmann::json;

std::string ChatRequest::digest() const {
  std::string buf = model;
  buf.push_back('\x1f');
  for (const auto& m : messages) {
    buf += m.role;
    buf.push_back('\x1e');
    buf += m.content;
    buf.push_back('\x1f');
  }
  buf += std::to_string(temperature);
  buf.push_back('\x1f');
  buf += std::to_string(max_output_tokens);
  return text::hex64(text::fnv1a64(buf));
}

const std::string& ChatRequest::last_user() const {
  static const std::string empty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return empty;
}

void validate(const ChatRequest& request) {
  bool has_user = false;
  for (const auto& m : request.messages) has_user = has_user || m.role == "user";
  if (!has_user) throw std::invalid_argument("chat request '" + request.agent + "' has no user message");
  if (request.temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
  if (request.max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
}

RetryingBackend::RetryingBackend(BackendPtr inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Completion RetryingBackend::complete(const ChatRequest& request) {
  auto backoff = policy_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    auto result = inner_->complete(request);
    if (result.ok() || !result.error().retryable() || attempt >= policy_.max_attempts) return result;
    spdlog::debug("{}: attempt {} failed ({}), retrying in {} ms", request.agent, attempt,
                  result.error().message, backoff.count());
    sleeper_(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * policy_.multiplier));
  }
}

RateLimiter::RateLimiter(int max_in_flight, int requests_per_minute)
    : max_in_flight_(max_in_flight), requests_per_minute_(requests_per_minute) {
  if (max_in_flight_ < 1) throw std::invalid_argument("max_in_flight must be >= 1");
}

RateLimiter::Permit RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  while (true) {
    const auto now = Clock::now();
    while (!starts_.empty() && now - starts_.front() >= std::chrono::minutes(1)) starts_.pop_front();
    const bool slot = in_flight_ < max_in_flight_;
    const bool budget =
        requests_per_minute_ <= 0 || static_cast<int>(starts_.size()) < requests_per_minute_;
    if (slot && budget) {
      ++in_flight_;
      starts_.push_back(now);
      return Permit(this);
    }
    if (!budget) {
      cv_.wait_until(lock, starts_.front() + std::chrono::minutes(1));
    } else {
      cv_.wait(lock);
    }
  }
}

int RateLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

void RateLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

HttpBackend::HttpBackend(HttpBackendConfig config, std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("endpoint must be an absolute http(s) URL: " + config_.endpoint);
  const auto path_begin = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_begin);
  path_ = path_begin == std::string::npos ? "/" : config_.endpoint.substr(path_begin);
}

std::string HttpBackend::request_body(const ChatRequest& request, const std::string& model) {
  json body;
  body["model"] = model.empty() ? request.model : model;
  body["messages"] = json::array();
  for (const auto& m : request.messages)
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  return body.dump();
}

Completion HttpBackend::parse_response(int status, const std::string& body) {
  if (status == 429) return Completion::failure({BackendErrorKind::rate_limited, "HTTP 429"});
  if (status >= 500)
    return Completion::failure({BackendErrorKind::server, "HTTP " + std::to_string(status)});
  if (status < 200 || status >= 300)
    return Completion::failure(
        {BackendErrorKind::client, "HTTP " + std::to_string(status) + ": " + body.substr(0, 200)});
  try {
    const auto parsed = json::parse(body);
    const auto& content = parsed.at("choices").at(0).at("message").at("content");
    if (!content.is_string())
      return Completion::failure({BackendErrorKind::client, "message content is not a string"});
    return Completion::success(content.get<std::string>());
  } catch (const json::exception& e) {
    return Completion::failure({BackendErrorKind::client, std::string("bad response body: ") + e.what()});
  }
}

Completion HttpBackend::complete(const ChatRequest& request) {
  validate(request);
  std::optional<RateLimiter::Permit> permit;
  if (limiter_) permit.emplace(limiter_->acquire());

  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_connection_timeout(static_cast<time_t>(timeout), 0);
  client.set_read_timeout(static_cast<time_t>(timeout), 0);
  httplib::Headers headers;
  if (!config_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + config_.auth_token);
  auto res = client.Post(path_, headers, request_body(request, config_.model), "application/json");
  if (!res) {
    return Completion::failure(
        {BackendErrorKind::transport, "transport error: " + httplib::to_string(res.error())});
  }
  return parse_response(res->status, res->body);
}

}  // namespace factguard
