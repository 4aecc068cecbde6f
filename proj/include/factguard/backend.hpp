#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <string>
#include <vector>

namespace factguard {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct ChatRequest {
  /// Agent role tag (e.g. "qa_judge"). Not sent on the wire.
  std::string agent;
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  /// Values substituted into the prompt template. Not sent on the wire; the
  /// mock backend keys scripted replies and its simulator on them.
  std::map<std::string, std::string> variables;

  /// Stable digest over model, messages and decoding parameters.
  std::string digest() const;
  /// Content of the last user message, or empty.
  const std::string& last_user() const;
};

/// Throws std::invalid_argument when a request breaks the contract
/// (no user message, negative temperature, non-positive max tokens).
void validate(const ChatRequest& request);

enum class BackendErrorKind {
  transport,     // connection failures, timeouts
  server,        // HTTP 5xx
  rate_limited,  // HTTP 429
  client,        // other HTTP 4xx, malformed response body
  unscripted,    // strict mock without a matching script entry
};

struct BackendError {
  BackendErrorKind kind = BackendErrorKind::transport;
  std::string message;

  bool retryable() const {
    return kind == BackendErrorKind::transport || kind == BackendErrorKind::server ||
           kind == BackendErrorKind::rate_limited;
  }
};

/// Result of one completion: reply text or a classified error.
class Completion {
 public:
  static Completion success(std::string text) {
    Completion c;
    c.text_ = std::move(text);
    return c;
  }
  static Completion failure(BackendError error) {
    Completion c;
    c.error_ = std::move(error);
    return c;
  }

  bool ok() const { return text_.has_value(); }
  const std::string& text() const { return *text_; }
  const BackendError& error() const { return *error_; }

 private:
  std::optional<std::string> text_;
  std::optional<BackendError> error_;
};

/// Chat backend contract. Implementations must be safe for concurrent calls
/// and complete() must not throw for transport-level problems.
class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual std::string name() const = 0;
  virtual Completion complete(const ChatRequest& request) = 0;
};

using BackendPtr = std::shared_ptr<AgentBackend>;

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

/// Retries retryable errors with exponential backoff. The sleeper is
/// injectable so tests do not wait.
class RetryingBackend final : public AgentBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingBackend(BackendPtr inner, RetryPolicy policy = {}, Sleeper sleeper = {});

  std::string name() const override { return inner_->name(); }
  Completion complete(const ChatRequest& request) override;

 private:
  BackendPtr inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

/// Shared admission control: caps concurrent requests and requests started
/// in any trailing 60 s window.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  RateLimiter(int max_in_flight, int requests_per_minute);

  class Permit {
   public:
    explicit Permit(RateLimiter* owner) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (owner_ != nullptr) owner_->release();
    }

   private:
    RateLimiter* owner_;
  };

  Permit acquire();

  int in_flight() const;

 private:
  void release();

  const int max_in_flight_;
  const int requests_per_minute_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::deque<Clock::time_point> starts_;
};

struct HttpBackendConfig {
  /// Full URL of the chat-completion endpoint, e.g.
  /// "http://localhost:8000/v1/chat/completions".
  std::string endpoint;
  std::string model;
  std::string auth_token;
  std::chrono::seconds timeout{120};
};

/// Chat-completion client over HTTP(S): posts {model, messages, temperature,
/// max_tokens} and reads choices[0].message.content.
class HttpBackend final : public AgentBackend {
 public:
  HttpBackend(HttpBackendConfig config, std::shared_ptr<RateLimiter> limiter);

  std::string name() const override { return "http:" + config_.model; }
  Completion complete(const ChatRequest& request) override;

  /// Wire body for a request (exposed for tests).
  static std::string request_body(const ChatRequest& request, const std::string& model);
  /// Extracts choices[0].message.content or a client error.
  static Completion parse_response(int status, const std::string& body);

 private:
  HttpBackendConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace factguard
