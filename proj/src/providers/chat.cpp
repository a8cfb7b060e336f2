#include "gseo/providers/chat.hpp"

#include <fstream>
#include <sstream>

#include "gseo/errors.hpp"
#include "gseo/text.hpp"

namespace gseo::providers {

using json = nlohmann::json;

std::string_view role_name(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (messages.empty()) throw ValidationError("chat request has no messages");
  if (messages.front().role == Role::assistant) {
    throw ValidationError("chat request must open with a system or user message");
  }
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ValidationError("temperature must lie in [0, 2], got " + std::to_string(temperature));
  }
}

json chat_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model_id}, {"messages", std::move(messages)}, {"temperature", request.temperature}};
}

ChatResponse parse_chat_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("chat response is not JSON: ") + e.what());
  }
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw ProviderError("chat response has no choices");
  }
  const auto& choice = doc["choices"][0];
  ChatResponse response;
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    response.content = choice["message"]["content"].get<std::string>();
  }
  response.finish_reason = choice.value("finish_reason", std::string{});
  if (choice.contains("finish_reason") && choice["finish_reason"].is_null()) response.finish_reason.clear();
  if (doc.contains("usage") && doc["usage"].is_object()) {
    response.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
    response.usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
  }
  return response;
}

std::string request_digest(const ChatRequest& request) {
  return text::sha256_hex(chat_request_body(request).dump());
}

ChatResponse ChatBackend::complete(const ChatRequest& request) {
  request.validate();
  return do_complete(request);
}

// --- live client -----------------------------------------------------------

OpenAiChatClient::OpenAiChatClient(std::shared_ptr<HttpTransport> transport, OpenAiChatOptions options,
                                   Sleeper sleep)
    : transport_(std::move(transport)), options_(std::move(options)), sleep_(std::move(sleep)) {}

ChatResponse OpenAiChatClient::do_complete(const ChatRequest& request) {
  if (options_.api_key.empty()) throw ProviderError("no chat API key configured (GSEO_LLM_API_KEY)");
  std::string base = options_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  HttpRequest http;
  http.url = base + "/chat/completions";
  http.headers = {{"Authorization", "Bearer " + options_.api_key}, {"Content-Type", "application/json"}};
  http.body = chat_request_body(request).dump();

  const auto raw = post_with_retry(*transport_, http, options_.retry, sleep_, counters_);
  return parse_chat_response(raw.body);
}

// --- scripted mock ---------------------------------------------------------

namespace {

std::string matchable_text(const ChatRequest& request) {
  std::string out;
  for (const auto& m : request.messages) {
    if (m.role == Role::assistant) continue;
    out.append(m.content);
    out.push_back('\n');
  }
  return out;
}

std::string last_user_message(const ChatRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == Role::user) return it->content;
  }
  return {};
}

std::string expand_echoes(const std::string& reply, const ChatRequest& request) {
  static constexpr std::string_view kOpen = "{{echo:";
  if (reply.find(kOpen) == std::string::npos) return reply;
  const std::string source = last_user_message(request);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = reply.find(kOpen, pos);
    if (open == std::string::npos) break;
    const auto close = reply.find("}}", open);
    if (close == std::string::npos) break;
    out.append(reply, pos, open - pos);
    const auto tag = reply.substr(open + kOpen.size(), close - open - kOpen.size());
    out.append(text::extract_tagged(source, text::trim(tag)));
    pos = close + 2;
  }
  out.append(reply, pos);
  return out;
}

bool rule_matches(const ScriptRule& rule, const ChatRequest& request, const std::string& haystack,
                  const std::string& digest) {
  if (rule.template_id.size() > 1 && rule.template_id.back() == '*') {
    const std::string_view prefix(rule.template_id.data(), rule.template_id.size() - 1);
    if (std::string_view(request.template_id).substr(0, prefix.size()) != prefix) return false;
  } else if (rule.template_id != "*" && rule.template_id != request.template_id) {
    return false;
  }
  if (rule.digest && *rule.digest != digest) return false;
  for (const auto& needle : rule.contains) {
    if (haystack.find(needle) == std::string::npos) return false;
  }
  if (rule.occurrences &&
      text::count_occurrences(haystack, rule.occurrences->first) != rule.occurrences->second) {
    return false;
  }
  return true;
}

int rough_tokens(std::string_view s) { return static_cast<int>(text::tokenize(s).size()); }

}  // namespace

ScriptedChatBackend::ScriptedChatBackend(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {}

ScriptedChatBackend::ScriptedChatBackend(Responder responder) : responder_(std::move(responder)) {}

std::unique_ptr<ScriptedChatBackend> ScriptedChatBackend::from_json(const json& fixture) {
  if (!fixture.is_object() || fixture.value("schema", "") != "gseo/v1" || !fixture.contains("rules") ||
      !fixture["rules"].is_array()) {
    throw ConfigError("chat fixture must be an object with schema \"gseo/v1\" and a rules array");
  }
  std::vector<ScriptRule> rules;
  for (const auto& r : fixture["rules"]) {
    if (!r.contains("reply") || !r["reply"].is_string()) throw ConfigError("chat fixture rule without a reply");
    ScriptRule rule;
    rule.template_id = r.value("template", "*");
    if (r.contains("digest")) rule.digest = r["digest"].get<std::string>();
    if (r.contains("contains")) {
      if (r["contains"].is_string()) {
        rule.contains.push_back(r["contains"].get<std::string>());
      } else {
        rule.contains = r["contains"].get<std::vector<std::string>>();
      }
    }
    if (r.contains("occurrences")) {
      const auto& o = r["occurrences"];
      rule.occurrences = std::make_pair(o.at("text").get<std::string>(), o.at("count").get<std::size_t>());
    }
    rule.reply = r["reply"].get<std::string>();
    rules.push_back(std::move(rule));
  }
  return std::make_unique<ScriptedChatBackend>(std::move(rules));
}

std::unique_ptr<ScriptedChatBackend> ScriptedChatBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open chat fixture: " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("invalid chat fixture " + path + ": " + e.what());
  }
}

ChatResponse ScriptedChatBackend::do_complete(const ChatRequest& request) {
  std::optional<std::string> reply;
  if (responder_) {
    reply = responder_(request);
  } else {
    const auto haystack = matchable_text(request);
    const auto digest = request_digest(request);
    for (const auto& rule : rules_) {
      if (rule_matches(rule, request, haystack, digest)) {
        reply = expand_echoes(rule.reply, request);
        break;
      }
    }
  }
  if (!reply) {
    throw ProviderError("no scripted reply for template '" + request.template_id + "' (digest " +
                        request_digest(request) + ")");
  }
  ChatResponse response;
  response.content = std::move(*reply);
  response.finish_reason = "stop";
  response.usage.prompt_tokens = rough_tokens(matchable_text(request));
  response.usage.completion_tokens = rough_tokens(response.content);
  return response;
}

// --- recorder --------------------------------------------------------------

RecordingChatBackend::RecordingChatBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

ChatResponse RecordingChatBackend::do_complete(const ChatRequest& request) {
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
  }
  return inner_->complete(request);
}

std::size_t RecordingChatBackend::calls() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::size_t RecordingChatBackend::calls_with_prefix(std::string_view prefix) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : requests_) {
    if (std::string_view(r.template_id).substr(0, prefix.size()) == prefix) ++n;
  }
  return n;
}

std::map<std::string, std::size_t> RecordingChatBackend::calls_by_template() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, std::size_t> out;
  for (const auto& r : requests_) ++out[r.template_id];
  return out;
}

std::vector<ChatRequest> RecordingChatBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

}  // namespace gseo::providers
