#include "gseo/llm.hpp"

namespace gseo {

providers::ChatRequest make_request(const LlmSettings& llm, std::string template_id, std::string system,
                                    std::string user, double temperature) {
  providers::ChatRequest request;
  request.model_id = llm.model_id;
  request.temperature = temperature;
  request.template_id = std::move(template_id);
  if (!system.empty()) request.messages.push_back({providers::Role::system, std::move(system)});
  request.messages.push_back({providers::Role::user, std::move(user)});
  return request;
}

}  // namespace gseo
