#include "gseo/baselines.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "gseo/errors.hpp"
#include "gseo/refine.hpp"
#include "gseo/text.hpp"

namespace gseo::baselines {

using json = nlohmann::json;

std::string_view builtin_strategy_catalog();  // generated from prompts/strategies.json

namespace {

std::string required_string(const json& obj, const char* field, const std::string& where) {
  if (!obj.contains(field) || !obj[field].is_string() || text::trim(obj[field].get<std::string>()).empty()) {
    throw ValidationError(where + ": missing or empty string field '" + field + "'");
  }
  return obj[field].get<std::string>();
}

}  // namespace

StrategyCatalog StrategyCatalog::from_json(const json& j) {
  if (!j.is_object() || j.value("schema", "") != "gseo/v1") {
    throw ValidationError("strategy catalog: expected schema gseo/v1");
  }
  StrategyCatalog c;
  c.version_ = required_string(j, "version", "strategy catalog");
  c.system_ = required_string(j, "system", "strategy catalog");
  if (!j.contains("strategies") || !j["strategies"].is_object()) {
    throw ValidationError("strategy catalog: 'strategies' must be an object");
  }
  const auto& entries = j["strategies"];
  std::set<std::string> abbrevs;
  for (auto key : kStrategyKeys) {
    const std::string k(key);
    if (!entries.contains(k)) throw ValidationError("strategy catalog: missing strategy '" + k + "'");
    const auto& e = entries[k];
    const auto where = "strategy '" + k + "'";
    if (!e.is_object()) throw ValidationError(where + ": must be an object");
    Strategy s;
    s.key = k;
    s.abbrev = required_string(e, "abbrev", where);
    s.category = required_string(e, "category", where);
    s.description = required_string(e, "description", where);
    s.prompt_template = required_string(e, "template", where);
    if (!e.contains("synthetic_content") || !e["synthetic_content"].is_boolean()) {
      throw ValidationError(where + ": 'synthetic_content' must be a boolean");
    }
    s.synthetic_content = e["synthetic_content"].get<bool>();
    if (std::find(kCategories.begin(), kCategories.end(), s.category) == kCategories.end()) {
      throw ValidationError(where + ": unknown category '" + s.category + "'");
    }
    if (text::count_occurrences(s.prompt_template, "{{document}}") != 1) {
      throw ValidationError(where + ": template must contain {{document}} exactly once");
    }
    if (!abbrevs.insert(s.abbrev).second) throw ValidationError(where + ": duplicate abbreviation " + s.abbrev);
    c.keys_.push_back(k);
    c.strategies_.emplace(k, std::move(s));
  }
  for (const auto& [key, _] : entries.items()) {
    if (!c.strategies_.count(key)) throw ValidationError("strategy catalog: unknown strategy '" + key + "'");
  }
  return c;
}

StrategyCatalog StrategyCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read strategy catalog " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError("strategy catalog " + path + ": " + e.what());
  }
}

const StrategyCatalog& StrategyCatalog::builtin() {
  static const StrategyCatalog instance = from_json(json::parse(builtin_strategy_catalog()));
  return instance;
}

const Strategy& StrategyCatalog::at(std::string_view key) const {
  auto it = strategies_.find(key);
  if (it == strategies_.end()) {
    throw StrategyError("unknown strategy '" + std::string(key) + "'; expected one of: " + text::join(keys_, ", "));
  }
  return it->second;
}

const Strategy& StrategyCatalog::resolve(std::string_view key_or_abbrev) const {
  if (auto it = strategies_.find(key_or_abbrev); it != strategies_.end()) return it->second;
  for (const auto& [_, s] : strategies_) {
    if (s.abbrev == key_or_abbrev) return s;
  }
  return at(key_or_abbrev);
}

Document apply_strategy(providers::ChatBackend& chat, const LlmSettings& llm, const StrategyCatalog& catalog,
                        const Document& doc, const Strategy& strategy) {
  doc.validate();
  auto request = make_request(llm, "strategy." + strategy.key, catalog.system_prompt(),
                              text::render(strategy.prompt_template, {{"document", doc.body}}),
                              llm.precise_temperature);
  const auto response = chat.complete(request);
  std::string body = response.content.find("<document>") != std::string::npos
                         ? text::extract_tagged(response.content, "document")
                         : response.content;

  Document out = doc;
  out.body = text::trim(body);
  out.version = doc.version + 1;
  out.provenance = Provenance::baseline(strategy.key);
  const auto outcome = refine::validate_revision(doc, out);
  if (!outcome.passed) {
    throw StrategyError(fmt::format("strategy {} produced an invalid rewrite: {}", strategy.key, outcome.reason));
  }
  return out;
}

Document apply_pipeline(providers::ChatBackend& chat, const LlmSettings& llm, const StrategyCatalog& catalog,
                        const Document& doc, std::span<const Strategy> strategies) {
  if (strategies.empty() || strategies.size() > 4) {
    throw ValidationError(fmt::format("a pipeline takes 1 to 4 strategies, got {}", strategies.size()));
  }
  std::set<std::string> seen;
  for (const auto& s : strategies) {
    if (!seen.insert(s.key).second) throw ValidationError("strategy " + s.key + " repeated in pipeline");
  }
  Document current = doc;
  for (const auto& s : strategies) current = apply_strategy(chat, llm, catalog, current, s);
  current.provenance = Provenance::baseline(chain_label(strategies));
  return current;
}

std::vector<Strategy> parse_pipeline(const StrategyCatalog& catalog, std::string_view chain) {
  std::vector<Strategy> out;
  std::stringstream in{std::string(chain)};
  std::string item;
  while (std::getline(in, item, ',')) {
    item = text::trim(item);
    if (item.empty()) continue;
    out.push_back(catalog.resolve(item));
  }
  return out;
}

std::string chain_label(std::span<const Strategy> strategies) {
  if (strategies.size() == 1) return strategies[0].key;
  std::vector<std::string> parts;
  for (const auto& s : strategies) parts.push_back(s.abbrev);
  return text::join(parts, "+");
}

json pipeline_metadata(const StrategyCatalog& catalog, std::span<const Strategy> strategies) {
  json steps = json::array();
  bool synthetic = false;
  for (const auto& s : strategies) {
    steps.push_back({{"key", s.key}, {"abbrev", s.abbrev}, {"category", s.category},
                     {"synthetic_content", s.synthetic_content}});
    synthetic = synthetic || s.synthetic_content;
  }
  return {{"schema", "gseo/v1"},
          {"label", chain_label(strategies)},
          {"catalog_version", catalog.version()},
          {"steps", std::move(steps)},
          {"synthetic_content", synthetic}};
}

}  // namespace gseo::baselines
