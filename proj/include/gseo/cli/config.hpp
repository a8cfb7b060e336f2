#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "gseo/corpus.hpp"
#include "gseo/llm.hpp"
#include "gseo/providers/chat.hpp"
#include "gseo/providers/rerank.hpp"
#include "gseo/providers/search.hpp"
#include "gseo/refine.hpp"

namespace gseo::cli {

enum class Backend { live, mock };

struct CorpusSettings {
  int candidates = 10;
  int max_queries = 10;
  int min_queries = 3;  // fewer only warns
  int verify_k = 5;
  int seed_top_n = 10;
};

struct LiveSettings {
  std::string llm_base_url = "https://api.openai.com/v1";
  std::string search_base_url = "https://api.tavily.com";
  std::string llm_api_key;     // never persisted
  std::string search_api_key;  // never persisted
  int timeout_seconds = 120;
  providers::RetryPolicy retry;
};

struct MockSettings {
  std::filesystem::path chat_fixture;
  std::filesystem::path search_fixture;
};

struct RunConfig {
  LlmSettings llm;
  Backend backend = Backend::live;
  int max_iterations = 10;
  double tau = 7.0;
  int retrieval_k = 5;
  int concurrency = 4;
  std::uint64_t rng_seed = 0;
  refine::PlateauConfig plateau;
  refine::AnalystOptions analyst;
  CorpusSettings corpus;
  LiveSettings live;
  MockSettings mock;
  std::optional<std::filesystem::path> strategy_catalog;  // built-in when unset
  std::optional<std::filesystem::path> source;             // file the config came from

  /// Throws ConfigError for out-of-range values or missing mock fixtures.
  void validate() const;
};

/// Parses TOML text. Relative fixture paths resolve against `base_dir`.
/// tau is mandatory in a config file.
RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);

/// Reads the explicit path, else $GSEO_CONFIG, else defaults (with a warning
/// that tau falls back to 7.0). Environment overrides are applied last.
RunConfig load_config(const std::optional<std::filesystem::path>& explicit_path);

/// GSEO_LLM_API_KEY, GSEO_SEARCH_API_KEY, GSEO_BACKEND, GSEO_MODEL_ID,
/// GSEO_LLM_BASE_URL, GSEO_SEARCH_BASE_URL.
void apply_env_overrides(RunConfig& config);

/// Snapshot without secrets.
nlohmann::json config_to_json(const RunConfig& config);

struct Providers {
  std::shared_ptr<providers::RecordingChatBackend> chat;
  std::shared_ptr<providers::SearchBackend> search;
  std::shared_ptr<providers::Reranker> reranker;
};

/// Scripted fixtures in mock mode, HTTP clients otherwise. Live mode needs the
/// API keys and throws ConfigError without them.
Providers make_providers(const RunConfig& config);

}  // namespace gseo::cli
