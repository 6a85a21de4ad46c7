#include "dshape/chat.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dshape/error.hpp"
#include "text.hpp"

namespace dshape {

namespace {

using Json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint resolve_endpoint(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ContractError("chat base URL must include a scheme: \"" + base_url + "\"");
  }
  const auto path_begin = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base_url.substr(0, path_begin);
  std::string prefix = path_begin == std::string::npos ? "" : base_url.substr(path_begin);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0) {
    ep.path = prefix + "/chat/completions";
  } else {
    ep.path = prefix + "/v1/chat/completions";
  }
  return ep;
}

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string_view to_string(ChatRole role) {
  switch (role) {
    case ChatRole::kSystem: return "system";
    case ChatRole::kUser: return "user";
    case ChatRole::kAssistant: return "assistant";
  }
  return "user";
}

ChatConfig ChatConfig::from_env(std::string model) {
  ChatConfig cfg;
  cfg.model = std::move(model);
  const char* base = std::getenv(std::string(kApiBaseEnv).c_str());
  if (base == nullptr || *base == '\0') {
    throw ContractError(std::string(kApiBaseEnv) + " is not set");
  }
  cfg.base_url = base;
  if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str())) cfg.api_key = key;
  return cfg;
}

std::string build_chat_request(const ChatSession& session, const ChatConfig& config) {
  Json messages = Json::array();
  for (const auto& m : session) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  Json body = {{"model", config.model}, {"messages", messages}, {"temperature", config.temperature}};
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  Json doc = Json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ChatResponseError("chat response is not JSON", std::string(body));
  try {
    const Json& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      throw ChatResponseError("chat response content is not a string", std::string(body));
    }
    return content.get<std::string>();
  } catch (const Json::exception&) {
    throw ChatResponseError("chat response lacks choices[0].message.content", std::string(body));
  }
}

std::string chat_complete(const ChatSession& session, const ChatConfig& config) {
  if (session.empty()) throw ContractError("chat session is empty");
  for (const auto& m : session) {
    if (m.content.empty()) throw ContractError("chat message content is empty");
  }
  if (config.model.empty()) throw ContractError("chat config has no model");
  if (config.max_attempts < 1) throw ContractError("chat config max_attempts must be positive");

  const Endpoint ep = resolve_endpoint(config.base_url);
  const std::string payload = build_chat_request(session, config);

  httplib::Client client(ep.origin);
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  auto backoff = config.initial_backoff;
  int last_status = -1;
  std::string last_error;
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (res) {
      last_status = res->status;
      if (res->status == 401 || res->status == 403) {
        throw ChatAuthError("chat endpoint rejected credentials (HTTP " +
                            std::to_string(res->status) + ")");
      }
      if (res->status >= 200 && res->status < 300) return parse_chat_response(res->body);
      if (!is_transient(res->status)) {
        throw ChatError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                        res->body.substr(0, 200));
      }
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      last_status = -1;
      last_error = httplib::to_string(res.error());
    }
    if (attempt < config.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, config.max_backoff);
    }
  }
  throw ChatRetryExhausted("chat request failed after " + std::to_string(config.max_attempts) +
                               " attempts (last: " + last_error + ")",
                           config.max_attempts, last_status);
}

std::string ScriptedChat::complete(const ChatSession& session) {
  if (session.empty()) throw ContractError("chat session is empty");
  ++calls_;
  std::string last_user;
  for (auto it = session.rbegin(); it != session.rend(); ++it) {
    if (it->role == ChatRole::kUser) {
      last_user = text::to_lower(it->content);
      break;
    }
  }
  for (const auto& rule : rules_) {
    if (last_user.find(text::to_lower(rule.needle)) != std::string::npos) return rule.reply;
  }
  if (fallback_) return *fallback_;
  throw ChatError("scripted chat has no reply for: \"" + last_user + "\"");
}

}  // namespace dshape
