#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dshape {

enum class ChatRole { kSystem, kUser, kAssistant };

std::string_view to_string(ChatRole role);

struct ChatExchange {
  ChatRole role = ChatRole::kUser;
  std::string content;
};

using ChatSession = std::vector<ChatExchange>;

inline constexpr std::string_view kApiKeyEnv = "DIALOGUE_SHAPING_API_KEY";
inline constexpr std::string_view kApiBaseEnv = "DIALOGUE_SHAPING_API_BASE";

struct ChatConfig {
  std::string base_url;  // e.g. "https://api.openai.com" or "http://127.0.0.1:8080/v1"
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  std::chrono::seconds timeout{60};

  // Reads the base URL and credential from the environment. Throws
  // ContractError when the base URL variable is unset.
  static ChatConfig from_env(std::string model);
};

class ChatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChatAuthError : public ChatError {
 public:
  using ChatError::ChatError;
};

// Body was not JSON or lacked choices[0].message.content.
class ChatResponseError : public ChatError {
 public:
  ChatResponseError(const std::string& what, std::string body)
      : ChatError(what), body_(std::move(body)) {}
  const std::string& body() const { return body_; }

 private:
  std::string body_;
};

class ChatRetryExhausted : public ChatError {
 public:
  ChatRetryExhausted(const std::string& what, int attempts, int last_status)
      : ChatError(what), attempts_(attempts), last_status_(last_status) {}
  int attempts() const { return attempts_; }
  // HTTP status of the final attempt, or -1 when no response arrived.
  int last_status() const { return last_status_; }

 private:
  int attempts_;
  int last_status_;
};

// Request JSON for a /v1/chat/completions-compatible endpoint.
std::string build_chat_request(const ChatSession& session, const ChatConfig& config);

// Extracts choices[0].message.content; throws ChatResponseError otherwise.
std::string parse_chat_response(std::string_view body);

// POSTs the session and returns the assistant text. Transient failures
// (transport errors, 408, 429, 5xx) are retried with capped exponential
// backoff up to config.max_attempts; 401/403 fail immediately.
std::string chat_complete(const ChatSession& session, const ChatConfig& config);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatSession& session) = 0;
};

class HttpChatClient final : public ChatBackend {
 public:
  explicit HttpChatClient(ChatConfig config) : config_(std::move(config)) {}
  std::string complete(const ChatSession& session) override {
    return chat_complete(session, config_);
  }

 private:
  ChatConfig config_;
};

// Offline stand-in: replies are chosen by the first rule whose needle occurs
// in the latest user message (case-insensitive).
class ScriptedChat final : public ChatBackend {
 public:
  struct Rule {
    std::string needle;
    std::string reply;
  };

  explicit ScriptedChat(std::vector<Rule> rules, std::optional<std::string> fallback = std::nullopt)
      : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

  std::string complete(const ChatSession& session) override;
  int calls() const { return calls_; }

 private:
  std::vector<Rule> rules_;
  std::optional<std::string> fallback_;
  int calls_ = 0;
};

}  // namespace dshape
