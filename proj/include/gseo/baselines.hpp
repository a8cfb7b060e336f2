#pragma once

#include <array>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "gseo/corpus.hpp"
#include "gseo/llm.hpp"

namespace gseo::baselines {

struct Strategy {
  std::string key;  // e.g. "more_quotes"
  std::string abbrev;  // e.g. "MQ"
  std::string category;
  std::string description;
  std::string prompt_template;  // {{document}} placeholder
  bool synthetic_content = false;  // may invent quotes, citations or figures
};

/// Versioned rewrite-strategy prompts, keyed by strategy key.
class StrategyCatalog {
 public:
  /// Validates the catalog document; throws ValidationError describing the
  /// first problem found.
  static StrategyCatalog from_json(const nlohmann::json& j);
  static StrategyCatalog load(const std::string& path);
  /// The catalog compiled into the binary.
  static const StrategyCatalog& builtin();

  const Strategy& at(std::string_view key) const;
  /// Accepts a key or an abbreviation (case-sensitive). StrategyError if unknown.
  const Strategy& resolve(std::string_view key_or_abbrev) const;
  const std::vector<std::string>& keys() const { return keys_; }
  const std::string& version() const { return version_; }
  const std::string& system_prompt() const { return system_; }

 private:
  std::string version_;
  std::string system_;
  std::vector<std::string> keys_;  // canonical order
  std::map<std::string, Strategy, std::less<>> strategies_;
};

inline constexpr std::array<std::string_view, 9> kStrategyKeys = {
    "fluent",       "simple_language", "technical_terms", "authoritative",   "more_quotes",
    "citing_sources", "statistics",    "unique_words",    "keyword_stuffing"};

inline constexpr std::array<std::string_view, 3> kCategories = {"fluency-engagement", "authority-credibility",
                                                                 "seo-techniques"};

/// One rewrite call at precise temperature. The result has provenance
/// baseline:<key> and version doc.version + 1. StrategyError if the rewrite
/// fails validation.
Document apply_strategy(providers::ChatBackend& chat, const LlmSettings& llm, const StrategyCatalog& catalog,
                        const Document& doc, const Strategy& strategy);

/// Applies 1..4 distinct strategies in order. A single strategy behaves like
/// apply_strategy; longer chains record provenance baseline:<A>+<B>+...
Document apply_pipeline(providers::ChatBackend& chat, const LlmSettings& llm, const StrategyCatalog& catalog,
                        const Document& doc, std::span<const Strategy> strategies);

/// "MQ,TT,CS,Fl" or "more_quotes,technical_terms" into strategies.
std::vector<Strategy> parse_pipeline(const StrategyCatalog& catalog, std::string_view chain);

/// Run-directory label for a chain: the key for one strategy, the abbreviation
/// chain joined by '+' otherwise.
std::string chain_label(std::span<const Strategy> strategies);

/// meta.json payload: the chain, categories and the synthetic-content flag.
nlohmann::json pipeline_metadata(const StrategyCatalog& catalog, std::span<const Strategy> strategies);

}  // namespace gseo::baselines
