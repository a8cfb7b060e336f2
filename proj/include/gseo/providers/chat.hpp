#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gseo/providers/http.hpp"
#include "gseo/providers/retry.hpp"

namespace gseo::providers {

enum class Role { system, user, assistant };

std::string_view role_name(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
  std::string model_id;
  // Prompt-catalog id of the template that produced this request. Never sent
  // over the wire; mocks and call recorders key on it.
  std::string template_id;

  /// Throws ValidationError unless messages are non-empty, the first role is
  /// system or user, and temperature lies in [0, 2].
  void validate() const;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  std::string finish_reason;
  Usage usage;
};

/// OpenAI-compatible chat-completions request body.
nlohmann::json chat_request_body(const ChatRequest& request);

/// Parses a chat-completions response body. Throws ProviderError when the
/// body is not a completion.
ChatResponse parse_chat_response(std::string_view body);

/// SHA-256 of the serialized request body.
std::string request_digest(const ChatRequest& request);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  /// Validates the request, then delegates. Implementations must be safe to
  /// call from several threads at once.
  ChatResponse complete(const ChatRequest& request);

 protected:
  virtual ChatResponse do_complete(const ChatRequest& request) = 0;
};

struct OpenAiChatOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  RetryPolicy retry;
};

class OpenAiChatClient : public ChatBackend {
 public:
  OpenAiChatClient(std::shared_ptr<HttpTransport> transport, OpenAiChatOptions options,
                   Sleeper sleep = real_sleeper());

  const RetryCounters& counters() const { return counters_; }

 protected:
  ChatResponse do_complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  OpenAiChatOptions options_;
  Sleeper sleep_;
  RetryCounters counters_;
};

/// One line of a mock chat script. A rule matches when every populated
/// criterion holds against the request's system and user messages.
struct ScriptRule {
  std::string template_id = "*";  // "*" matches any template, "judge.*" a prefix
  std::optional<std::string> digest;
  std::vector<std::string> contains;
  std::optional<std::pair<std::string, std::size_t>> occurrences;  // exact count of a needle
  std::string reply;
};

/// Offline chat backend: a pure function of (request, script). Rules are tried
/// in order and the first match answers. Replies may contain {{echo:TAG}},
/// which expands to the text inside <TAG>...</TAG> of the last user message.
class ScriptedChatBackend : public ChatBackend {
 public:
  using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

  explicit ScriptedChatBackend(std::vector<ScriptRule> rules);
  explicit ScriptedChatBackend(Responder responder);

  /// Fixture schema: {"schema": "gseo/v1", "rules": [{"template", "digest",
  /// "contains", "occurrences": {"text", "count"}, "reply"}]}.
  static std::unique_ptr<ScriptedChatBackend> from_json(const nlohmann::json& fixture);
  static std::unique_ptr<ScriptedChatBackend> load(const std::string& path);

 protected:
  ChatResponse do_complete(const ChatRequest& request) override;

 private:
  std::vector<ScriptRule> rules_;
  Responder responder_;
};

/// Pass-through decorator that counts calls per template id.
class RecordingChatBackend : public ChatBackend {
 public:
  explicit RecordingChatBackend(std::shared_ptr<ChatBackend> inner);

  std::size_t calls() const;
  std::size_t calls_with_prefix(std::string_view prefix) const;
  std::map<std::string, std::size_t> calls_by_template() const;
  std::vector<ChatRequest> requests() const;

 protected:
  ChatResponse do_complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  mutable std::mutex mutex_;
  std::vector<ChatRequest> requests_;
};

}  // namespace gseo::providers
