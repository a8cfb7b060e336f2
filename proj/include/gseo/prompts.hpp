#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gseo::prompts {

inline constexpr std::string_view kCatalogVersion = "1";

inline constexpr std::string_view kSynthesizeQueries = "query.synthesize";
inline constexpr std::string_view kFilterQueries = "query.filter";
inline constexpr std::string_view kRagAnswer = "rag.answer";
inline constexpr std::string_view kAnalyze = "maco.analyze";
inline constexpr std::string_view kEdit = "maco.edit";
inline constexpr std::string_view kSelect = "maco.select";
// judge templates are "judge.<KEY>", strategies "strategy.<key>"

struct PromptTemplate {
  std::string id;
  std::string version;
  std::string system;
  std::string user;  // {{placeholders}} rendered by text::render
};

/// Built-in agent template by id. Throws ValidationError for an unknown id.
const PromptTemplate& agent_prompt(std::string_view id);

std::vector<std::string> agent_prompt_ids();

}  // namespace gseo::prompts
