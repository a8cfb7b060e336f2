#include "gseo/cli/config.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "gseo/errors.hpp"

namespace gseo::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
void read_value(const toml::table& table, std::string_view key, T& out) {
  const auto* node = table.get(key);
  if (!node) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value<bool>()) return void(out = *v);
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node->value<std::int64_t>()) return void(out = static_cast<T>(*v));
  } else if constexpr (std::is_floating_point_v<T>) {
    if (auto v = node->value<double>()) return void(out = *v);
  } else {
    if (auto v = node->value<std::string>()) return void(out = *v);
  }
  throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
}

const toml::table* subtable(const toml::table& root, std::string_view key) {
  const auto* node = root.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError("config key '" + std::string(key) + "' must be a table");
  return node->as_table();
}

Backend parse_backend(const std::string& s) {
  if (s == "live") return Backend::live;
  if (s == "mock") return Backend::mock;
  throw ConfigError("backend must be 'live' or 'mock', got '" + s + "'");
}

std::string backend_name(Backend b) { return b == Backend::mock ? "mock" : "live"; }

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_range(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config value out of range: " + what);
}

}  // namespace

void RunConfig::validate() const {
  check_range(max_iterations >= 0 && max_iterations <= 100, "max_iterations in [0, 100]");
  check_range(tau >= 0.0 && tau <= 10.0, "tau in [0, 10]");
  check_range(retrieval_k >= 1 && retrieval_k <= 20, "retrieval_k in [1, 20]");
  check_range(concurrency >= 1 && concurrency <= 64, "concurrency in [1, 64]");
  check_range(llm.precise_temperature >= 0.0 && llm.precise_temperature <= 2.0, "temperatures.precise in [0, 2]");
  check_range(llm.creative_temperature >= 0.0 && llm.creative_temperature <= 2.0, "temperatures.creative in [0, 2]");
  check_range(!llm.model_id.empty(), "model_id must be non-empty");
  check_range(plateau.epsilon >= 0.0, "plateau.epsilon >= 0");
  check_range(plateau.window >= 1, "plateau.window >= 1");
  check_range(analyst.examples_per_dim >= 1, "analyst.examples_per_dim >= 1");
  check_range(analyst.max_suggestions >= 1, "analyst.max_suggestions >= 1");
  check_range(corpus.candidates >= 1, "corpus.candidates >= 1");
  check_range(corpus.max_queries >= 1, "corpus.max_queries >= 1");
  check_range(corpus.min_queries >= 1, "corpus.min_queries >= 1");
  check_range(corpus.verify_k >= 1, "corpus.verify_k >= 1");
  check_range(corpus.seed_top_n >= 1, "corpus.seed_top_n >= 1");
  check_range(live.timeout_seconds >= 1, "live.timeout_seconds >= 1");
  check_range(live.retry.max_attempts >= 1, "live.max_attempts >= 1");
  if (backend == Backend::mock) {
    if (mock.chat_fixture.empty() || mock.search_fixture.empty()) {
      throw ConfigError("mock backend needs [mock] chat_fixture and search_fixture");
    }
  }
}

RunConfig parse_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "invalid TOML: " << e.description() << " at " << e.source().begin;
    throw ConfigError(msg.str());
  }

  RunConfig c;
  if (!root.contains("tau")) throw ConfigError("config must set tau (the success threshold)");
  read_value(root, "tau", c.tau);
  read_value(root, "model_id", c.llm.model_id);
  std::string backend = "live";
  read_value(root, "backend", backend);
  c.backend = parse_backend(backend);
  read_value(root, "max_iterations", c.max_iterations);
  read_value(root, "retrieval_k", c.retrieval_k);
  read_value(root, "concurrency", c.concurrency);
  std::int64_t seed = 0;
  read_value(root, "rng_seed", seed);
  if (seed < 0) throw ConfigError("rng_seed must be non-negative");
  c.rng_seed = static_cast<std::uint64_t>(seed);
  std::string catalog;
  read_value(root, "strategy_catalog", catalog);
  if (!catalog.empty()) c.strategy_catalog = resolve(base_dir, catalog);

  if (const auto* t = subtable(root, "temperatures")) {
    read_value(*t, "precise", c.llm.precise_temperature);
    read_value(*t, "creative", c.llm.creative_temperature);
  }
  if (const auto* t = subtable(root, "plateau")) {
    read_value(*t, "epsilon", c.plateau.epsilon);
    read_value(*t, "window", c.plateau.window);
    read_value(*t, "per_dimension", c.plateau.per_dimension);
  }
  if (const auto* t = subtable(root, "analyst")) {
    read_value(*t, "examples_per_dim", c.analyst.examples_per_dim);
    read_value(*t, "max_suggestions", c.analyst.max_suggestions);
  }
  if (const auto* t = subtable(root, "corpus")) {
    read_value(*t, "candidates", c.corpus.candidates);
    read_value(*t, "max_queries", c.corpus.max_queries);
    read_value(*t, "min_queries", c.corpus.min_queries);
    read_value(*t, "verify_k", c.corpus.verify_k);
    read_value(*t, "seed_top_n", c.corpus.seed_top_n);
  }
  if (const auto* t = subtable(root, "live")) {
    read_value(*t, "llm_base_url", c.live.llm_base_url);
    read_value(*t, "search_base_url", c.live.search_base_url);
    read_value(*t, "timeout_seconds", c.live.timeout_seconds);
    read_value(*t, "max_attempts", c.live.retry.max_attempts);
    if (t->contains("api_key") || t->contains("llm_api_key") || t->contains("search_api_key")) {
      throw ConfigError("API keys belong in GSEO_LLM_API_KEY / GSEO_SEARCH_API_KEY, not the config file");
    }
  }
  if (const auto* t = subtable(root, "mock")) {
    std::string chat, search;
    read_value(*t, "chat_fixture", chat);
    read_value(*t, "search_fixture", search);
    c.mock.chat_fixture = resolve(base_dir, chat);
    c.mock.search_fixture = resolve(base_dir, search);
  }
  return c;
}

void apply_env_overrides(RunConfig& config) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("GSEO_LLM_API_KEY")) config.live.llm_api_key = *v;
  if (auto v = env("GSEO_SEARCH_API_KEY")) config.live.search_api_key = *v;
  if (auto v = env("GSEO_BACKEND")) config.backend = parse_backend(*v);
  if (auto v = env("GSEO_MODEL_ID")) config.llm.model_id = *v;
  if (auto v = env("GSEO_LLM_BASE_URL")) config.live.llm_base_url = *v;
  if (auto v = env("GSEO_SEARCH_BASE_URL")) config.live.search_base_url = *v;
}

RunConfig load_config(const std::optional<fs::path>& explicit_path) {
  std::optional<fs::path> path = explicit_path;
  if (!path) {
    if (const char* env = std::getenv("GSEO_CONFIG"); env && *env) path = fs::path(env);
  }
  RunConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw UsageError("cannot read config file " + path->string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = parse_config(buffer.str(), fs::absolute(*path).parent_path());
    config.source = fs::absolute(*path);
  } else {
    spdlog::warn("no config file given; using defaults with tau = {}", config.tau);
  }
  apply_env_overrides(config);
  config.validate();
  return config;
}

json config_to_json(const RunConfig& c) {
  json j = {{"schema", "gseo/v1"},
            {"model_id", c.llm.model_id},
            {"backend", backend_name(c.backend)},
            {"max_iterations", c.max_iterations},
            {"tau", c.tau},
            {"retrieval_k", c.retrieval_k},
            {"concurrency", c.concurrency},
            {"rng_seed", c.rng_seed},
            {"temperatures", {{"precise", c.llm.precise_temperature}, {"creative", c.llm.creative_temperature}}},
            {"plateau",
             {{"epsilon", c.plateau.epsilon}, {"window", c.plateau.window}, {"per_dimension", c.plateau.per_dimension}}},
            {"analyst",
             {{"examples_per_dim", c.analyst.examples_per_dim}, {"max_suggestions", c.analyst.max_suggestions}}},
            {"corpus",
             {{"candidates", c.corpus.candidates},
              {"max_queries", c.corpus.max_queries},
              {"min_queries", c.corpus.min_queries},
              {"verify_k", c.corpus.verify_k},
              {"seed_top_n", c.corpus.seed_top_n}}}};
  if (c.backend == Backend::live) {
    j["live"] = {{"llm_base_url", c.live.llm_base_url},
                 {"search_base_url", c.live.search_base_url},
                 {"timeout_seconds", c.live.timeout_seconds},
                 {"max_attempts", c.live.retry.max_attempts}};
  } else {
    // file names only, so snapshots do not depend on where the checkout lives
    j["mock"] = {{"chat_fixture", c.mock.chat_fixture.filename().string()},
                 {"search_fixture", c.mock.search_fixture.filename().string()}};
  }
  j["strategy_catalog"] = c.strategy_catalog ? c.strategy_catalog->filename().string() : "builtin";
  return j;
}

Providers make_providers(const RunConfig& config) {
  Providers p;
  p.reranker = std::make_shared<providers::OverlapReranker>();
  if (config.backend == Backend::mock) {
    std::shared_ptr<providers::ChatBackend> chat = providers::ScriptedChatBackend::load(config.mock.chat_fixture);
    p.chat = std::make_shared<providers::RecordingChatBackend>(std::move(chat));
    p.search = providers::FixtureSearchBackend::load(config.mock.search_fixture);
    return p;
  }
  if (config.live.llm_api_key.empty()) throw ConfigError("live backend needs GSEO_LLM_API_KEY");
  if (config.live.search_api_key.empty()) throw ConfigError("live backend needs GSEO_SEARCH_API_KEY");
  auto transport =
      std::make_shared<providers::HttplibTransport>(std::chrono::seconds(config.live.timeout_seconds));
  providers::OpenAiChatOptions chat_options{config.live.llm_base_url, config.live.llm_api_key, config.live.retry};
  p.chat = std::make_shared<providers::RecordingChatBackend>(
      std::make_shared<providers::OpenAiChatClient>(transport, chat_options));
  providers::TavilyOptions search_options{config.live.search_base_url, config.live.search_api_key,
                                          config.live.retry};
  p.search = std::make_shared<providers::TavilySearchClient>(transport, search_options);
  return p;
}

}  // namespace gseo::cli
