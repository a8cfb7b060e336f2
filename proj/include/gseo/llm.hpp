#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "gseo/providers/chat.hpp"

namespace gseo {

/// Model identity and the two sampling temperatures every agent call uses.
struct LlmSettings {
  std::string model_id = "gpt-4.1-mini";
  double precise_temperature = 0.1;   // evaluation and revision
  double creative_temperature = 0.6;  // analysis and query synthesis
};

providers::ChatRequest make_request(const LlmSettings& llm, std::string template_id, std::string system,
                                    std::string user, double temperature);

/// Result of an ask: the parsed value when available, and the raw reply last seen.
template <class T>
struct Asked {
  std::optional<T> value;
  std::string last_reply;
  int attempts = 0;
};

/// Sends `request`; if the reply is empty or `parse` returns nullopt, sends it
/// once more with the rejected reply and `correction` appended. Provider
/// errors propagate.
template <class T>
Asked<T> ask_with_reprompt(providers::ChatBackend& chat, providers::ChatRequest request,
                           const std::function<std::optional<T>(const std::string&)>& parse,
                           std::string_view correction) {
  Asked<T> out;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    auto response = chat.complete(request);
    out.attempts = attempt;
    out.last_reply = response.content;
    if (!response.content.empty()) {
      out.value = parse(response.content);
      if (out.value) return out;
    }
    if (!response.content.empty()) {
      request.messages.push_back({providers::Role::assistant, response.content});
    }
    request.messages.push_back({providers::Role::user, std::string(correction)});
  }
  return out;
}

}  // namespace gseo
