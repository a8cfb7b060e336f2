#include <fstream>
#include <set>

#include "doctest.h"
#include "gseo/baselines.hpp"
#include "gseo/errors.hpp"
#include "support.hpp"

using namespace gseo;
using namespace gseo::baselines;
using namespace gseo::providers;
using nlohmann::json;

namespace {

json catalog_json() {
  std::ifstream in(gseo_test::fixture("../../prompts/strategies.json"));
  return json::parse(in);
}

/// Echoes the document and appends a sentence naming the strategy template.
std::shared_ptr<ScriptedChatBackend> rewriter(std::vector<std::string>* seen = nullptr) {
  return std::make_shared<ScriptedChatBackend>([seen](const ChatRequest& r) -> std::optional<std::string> {
    if (seen) seen->push_back(r.template_id);
    auto body = text::extract_tagged(r.messages.back().content, "document");
    if (body.empty()) return std::nullopt;
    return body + " Rewritten by " + r.template_id + ".";
  });
}

}  // namespace

TEST_CASE("the built-in catalog has the nine strategies") {
  const auto& c = StrategyCatalog::builtin();
  REQUIRE(c.keys().size() == 9);
  for (std::size_t i = 0; i < kStrategyKeys.size(); ++i) CHECK(c.keys()[i] == kStrategyKeys[i]);
  CHECK(c.resolve("MQ").key == "more_quotes");
  CHECK(c.resolve("more_quotes").abbrev == "MQ");
  CHECK(c.at("citing_sources").synthetic_content);
  CHECK_FALSE(c.at("fluent").synthetic_content);
  CHECK(c.at("keyword_stuffing").category == "seo-techniques");
  CHECK_FALSE(c.version().empty());
}

TEST_CASE("unknown strategies list the valid keys") {
  try {
    StrategyCatalog::builtin().resolve("clickbait");
    FAIL("expected StrategyError");
  } catch (const StrategyError& e) {
    const std::string msg = e.what();
    for (auto k : kStrategyKeys) CHECK(msg.find(std::string(k)) != std::string::npos);
  }
}

TEST_CASE("catalog schema checks") {
  CHECK_NOTHROW(StrategyCatalog::from_json(catalog_json()));
  auto j = catalog_json();
  j["schema"] = "other";
  CHECK_THROWS_AS(StrategyCatalog::from_json(j), ValidationError);
  j = catalog_json();
  j["strategies"].erase("statistics");
  CHECK_THROWS_AS(StrategyCatalog::from_json(j), ValidationError);
  j = catalog_json();
  j["strategies"]["bonus"] = j["strategies"]["fluent"];
  CHECK_THROWS_AS(StrategyCatalog::from_json(j), ValidationError);
  j = catalog_json();
  j["strategies"]["fluent"]["template"] = "no placeholder";
  CHECK_THROWS_AS(StrategyCatalog::from_json(j), ValidationError);
  j = catalog_json();
  j["strategies"]["fluent"]["category"] = "vibes";
  CHECK_THROWS_AS(StrategyCatalog::from_json(j), ValidationError);
  j = catalog_json();
  j["strategies"]["fluent"]["abbrev"] = "SL";
  CHECK_THROWS_AS(StrategyCatalog::from_json(j), ValidationError);
}

TEST_CASE("applying a strategy") {
  const auto& c = StrategyCatalog::builtin();
  auto chat = rewriter();
  const auto d0 = gseo_test::make_doc();
  const auto d0_copy = d0;
  const auto out = apply_strategy(*chat, {}, c, d0, c.at("more_quotes"));
  CHECK(out.provenance.str() == "baseline:more_quotes");
  CHECK(out.version == 1);
  CHECK(out.body == d0.body + " Rewritten by strategy.more_quotes.");
  CHECK(d0.body == d0_copy.body);
  CHECK(d0.version == 0);
}

TEST_CASE("a failed rewrite is an error, not a passthrough") {
  const auto& c = StrategyCatalog::builtin();
  auto empty = std::make_shared<ScriptedChatBackend>(
      [](const ChatRequest&) -> std::optional<std::string> { return std::string(""); });
  CHECK_THROWS_AS(apply_strategy(*empty, {}, c, gseo_test::make_doc(), c.at("fluent")), StrategyError);
  auto same = std::make_shared<ScriptedChatBackend>([](const ChatRequest& r) -> std::optional<std::string> {
    return text::extract_tagged(r.messages.back().content, "document");
  });
  CHECK_THROWS_AS(apply_strategy(*same, {}, c, gseo_test::make_doc(), c.at("fluent")), StrategyError);
}

TEST_CASE("each strategy sends a distinct prompt at precise temperature") {
  const auto& c = StrategyCatalog::builtin();
  std::set<std::string> digests, templates;
  LlmSettings llm;
  auto chat = std::make_shared<ScriptedChatBackend>([&](const ChatRequest& r) -> std::optional<std::string> {
    digests.insert(request_digest(r));
    templates.insert(r.template_id);
    CHECK(r.temperature == llm.precise_temperature);
    return text::extract_tagged(r.messages.back().content, "document") + " Changed.";
  });
  for (const auto& key : c.keys()) apply_strategy(*chat, llm, c, gseo_test::make_doc(), c.at(key));
  CHECK(digests.size() == 9);
  CHECK(templates.size() == 9);
}

TEST_CASE("pipelines run in order and label the chain") {
  const auto& c = StrategyCatalog::builtin();
  std::vector<std::string> seen;
  auto chat = rewriter(&seen);
  const auto two = parse_pipeline(c, "MQ,TT");
  apply_pipeline(*chat, {}, c, gseo_test::make_doc(), two);
  CHECK(seen == std::vector<std::string>{"strategy.more_quotes", "strategy.technical_terms"});

  const auto four = parse_pipeline(c, "MQ, TT, CS, Fl");
  const auto out = apply_pipeline(*chat, {}, c, gseo_test::make_doc(), four);
  CHECK(out.provenance.str() == "baseline:MQ+TT+CS+Fl");
  CHECK(out.version == 4);
  CHECK(chain_label(four) == "MQ+TT+CS+Fl");
  CHECK(chain_label(std::vector<Strategy>{c.at("statistics")}) == "statistics");

  const auto meta = pipeline_metadata(c, four);
  CHECK(meta.at("schema") == "gseo/v1");
  CHECK(meta.at("label") == "MQ+TT+CS+Fl");
  CHECK(meta.at("steps").size() == 4);
  CHECK(meta.at("synthetic_content") == true);
}

TEST_CASE("pipeline preconditions") {
  const auto& c = StrategyCatalog::builtin();
  auto chat = rewriter();
  CHECK_THROWS_AS(apply_pipeline(*chat, {}, c, gseo_test::make_doc(), std::vector<Strategy>{}), ValidationError);
  CHECK_THROWS_AS(apply_pipeline(*chat, {}, c, gseo_test::make_doc(), parse_pipeline(c, "MQ,MQ")), ValidationError);
  CHECK_THROWS_AS(apply_pipeline(*chat, {}, c, gseo_test::make_doc(), parse_pipeline(c, "Fl,SL,TT,Au,MQ")),
                  ValidationError);
  CHECK_THROWS_AS(parse_pipeline(c, "MQ,XX"), StrategyError);
}

TEST_CASE("a one-step pipeline equals applying the strategy") {
  const auto& c = StrategyCatalog::builtin();
  auto chat = rewriter();
  const auto d0 = gseo_test::make_doc();
  const auto a = apply_strategy(*chat, {}, c, d0, c.at("statistics"));
  const auto b = apply_pipeline(*chat, {}, c, d0, std::vector<Strategy>{c.at("statistics")});
  CHECK(a.body == b.body);
  CHECK(a.version == b.version);
  CHECK(a.provenance == b.provenance);
}
