#include "gseo/select.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <regex>

#include "gseo/errors.hpp"
#include "gseo/prompts.hpp"
#include "gseo/text.hpp"

namespace gseo::select {

using json = nlohmann::json;

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::llm:
      return "llm";
    case Policy::argmax_mean:
      return "argmax_mean";
    case Policy::final_iteration:
      return "final_iteration";
  }
  return "";
}

json selection_to_json(const Selection& s) {
  return {{"schema", "gseo/v1"}, {"index", s.index}, {"policy", policy_name(s.policy)},
          {"justification", s.justification}};
}

Selection selection_from_json(const json& j) {
  if (j.value("schema", "") != "gseo/v1") throw ValidationError("selection file is not schema gseo/v1");
  Selection s;
  s.index = j.at("index").get<std::size_t>();
  s.justification = j.value("justification", "");
  const auto policy = j.at("policy").get<std::string>();
  for (auto p : {Policy::llm, Policy::argmax_mean, Policy::final_iteration}) {
    if (policy_name(p) == policy) {
      s.policy = p;
      return s;
    }
  }
  throw ValidationError("unknown selection policy: " + policy);
}

std::size_t argmax_mean(std::span<const PerformanceVector> vectors) {
  if (vectors.empty()) throw ValidationError("argmax_mean over an empty trajectory");
  std::size_t best = 0;
  double best_mean = vectors[0].mean();
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    const double m = vectors[i].mean();
    if (m > best_mean + kTieTolerance) {
      best = i;
      best_mean = m;
    }
  }
  return best;
}

std::size_t argmax_mean(const refine::Trajectory& trajectory) {
  std::vector<PerformanceVector> vectors;
  for (const auto& e : trajectory.entries) vectors.push_back(e.vector());
  return argmax_mean(vectors);
}

std::string render_selection_prompt(const refine::Trajectory& trajectory) {
  std::string versions;
  for (const auto& e : trajectory.entries) {
    versions += fmt::format("### Version {}\nScores:", e.version());
    for (auto d : kAllDimensions) {
      if (auto v = e.vector()[d]) versions += fmt::format(" {}={:.2f}", dimension_key(d), *v);
    }
    versions += fmt::format(" mean={:.2f}\n", e.vector().mean());
    versions += "Change: " + (e.applied ? e.applied->description : std::string("none (original)")) + "\n";
    std::string excerpt = e.document.body.substr(0, kExcerptChars);
    // do not cut a UTF-8 sequence in half
    while (!excerpt.empty() && (static_cast<unsigned char>(excerpt.back()) & 0xC0) == 0x80) excerpt.pop_back();
    if (!excerpt.empty() && (static_cast<unsigned char>(excerpt.back()) & 0x80)) excerpt.pop_back();
    versions += "Opening:\n" + excerpt + (e.document.body.size() > kExcerptChars ? " ..." : "") + "\n\n";
  }
  const auto& tmpl = prompts::agent_prompt(prompts::kSelect);
  return text::render(tmpl.user,
                      {{"count", std::to_string(trajectory.entries.size())}, {"versions", text::trim(versions)}});
}

std::optional<Selection> parse_selection_reply(std::string_view reply, std::size_t count) {
  static const std::regex version_re(R"(version\s*\**\s*[:#=]?\s*\**\s*(\d+))", std::regex::icase);
  static const std::regex justification_re(R"(justification\s*\**\s*:\s*\**)", std::regex::icase);
  const std::string s(reply);
  std::smatch m;
  if (!std::regex_search(s, m, version_re)) return std::nullopt;
  const auto digits = m[1].str();
  if (digits.size() > 9) return std::nullopt;
  const auto index = static_cast<std::size_t>(std::stoul(digits));
  if (index >= count) return std::nullopt;

  Selection out;
  out.index = index;
  out.policy = Policy::llm;
  std::smatch jm;
  out.justification = std::regex_search(s, jm, justification_re) ? text::trim(jm.suffix().str()) : "";
  if (out.justification.empty()) out.justification = text::trim(s);
  return out;
}

Selection select_best_version(providers::ChatBackend& chat, const LlmSettings& llm,
                              const refine::Trajectory& trajectory) {
  const auto count = trajectory.entries.size();
  if (count == 0) throw ValidationError("cannot select from an empty trajectory");
  if (count == 1) return {0, "only the original version exists", Policy::argmax_mean};

  const auto& tmpl = prompts::agent_prompt(prompts::kSelect);
  auto request =
      make_request(llm, tmpl.id, tmpl.system, render_selection_prompt(trajectory), llm.precise_temperature);
  std::function<std::optional<Selection>(const std::string&)> parse = [count](const std::string& reply) {
    return parse_selection_reply(reply, count);
  };
  try {
    auto asked = ask_with_reprompt(
        chat, std::move(request), parse,
        fmt::format("Answer with a version number between 0 and {} in the form:\nversion: <number>\n"
                    "justification: <reasoning>",
                    count - 1));
    if (asked.value) return std::move(*asked.value);
    spdlog::warn("selector reply did not name a valid version; using the highest mean");
  } catch (const ProviderError& e) {
    spdlog::warn("selector call failed ({}); using the highest mean", e.what());
  }
  const auto index = argmax_mean(trajectory);
  return {index, fmt::format("highest mean score ({:.3f})", trajectory.entries[index].vector().mean()),
          Policy::argmax_mean};
}

Selection select_final_iteration(const refine::Trajectory& trajectory) {
  if (trajectory.entries.empty()) throw ValidationError("cannot select from an empty trajectory");
  return {trajectory.entries.size() - 1, "final iteration", Policy::final_iteration};
}

}  // namespace gseo::select
