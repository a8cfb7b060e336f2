#include <algorithm>
#include <map>

#include "doctest.h"
#include "gseo/corpus.hpp"
#include "gseo/errors.hpp"
#include "gseo/providers/search.hpp"
#include "support.hpp"

using namespace gseo;
using namespace gseo::providers;
using gseo_test::make_doc;
using gseo_test::make_result;

namespace {

std::shared_ptr<ScriptedChatBackend> replying(std::map<std::string, std::string> by_template) {
  return std::make_shared<ScriptedChatBackend>(
      [by_template = std::move(by_template)](const ChatRequest& r) -> std::optional<std::string> {
        auto it = by_template.find(r.template_id);
        if (it == by_template.end()) return std::nullopt;
        return it->second;
      });
}

Query query(std::string id, std::string text) { return {std::move(id), std::move(text), QueryOrigin::synthesized, {}}; }

std::vector<SearchResult> ten_results() {
  std::vector<SearchResult> out;
  for (int i = 0; i < 10; ++i) {
    out.push_back(make_result("https://site" + std::to_string(i) + ".example/", "Doc " + std::to_string(i),
                              "content " + std::to_string(i), 0.05 * (i + 1), 0));
  }
  return out;
}

}  // namespace

TEST_CASE("provenance round-trips") {
  CHECK(Provenance::original().str() == "original");
  CHECK(Provenance::maco(3).str() == "maco:3");
  CHECK(Provenance::baseline("MQ+TT").str() == "baseline:MQ+TT");
  CHECK(Provenance::parse("maco:3") == Provenance::maco(3));
  CHECK(Provenance::parse("baseline:fluency") == Provenance::baseline("fluency"));
  CHECK_THROWS_AS(Provenance::parse("mystery"), ValidationError);
}

TEST_CASE("document invariants") {
  auto d = make_doc();
  CHECK_NOTHROW(d.validate());
  d.version = 2;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.provenance = Provenance::maco(2);
  CHECK_NOTHROW(d.validate());
  d.version = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = make_doc("   ");
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("query tags are checked against closed vocabularies") {
  QueryTags tags;
  tags.answer_type = "Guide";
  tags.user_intent = "Purchase";
  CHECK_NOTHROW(tags.validate());
  tags.answer_type = "Poem";
  CHECK_THROWS_AS(tags.validate(), ValidationError);
}

TEST_CASE("corpus json round-trip keeps pairs and contexts") {
  auto c = gseo_test::make_corpus(2);
  c.pairs[1].contexts.clear();
  c.pairs[1].retrieval_error = "timeout";
  const auto j = corpus_to_json(c);
  CHECK(j.at("schema") == "gseo/v1");
  const auto back = corpus_from_json(j);
  REQUIRE(back.pairs.size() == 2);
  CHECK(back.pairs[0].contexts.size() == 2);
  CHECK(back.pairs[0].contexts[1].url == "https://b.example/0");
  CHECK(back.pairs[1].contexts.empty());
  CHECK(back.source.body == c.source.body);
  CHECK(corpus_to_json(back) == j);
}

TEST_CASE("corpus validation") {
  auto c = gseo_test::make_corpus(2);
  CHECK_NOTHROW(c.validate());
  c.pairs[1].query.text = c.pairs[0].query.text;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.pairs.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("question lists parse numbered and bulleted items") {
  const auto items = parse_question_list("Here you go:\n1. What is a solar cell?\n2) How long do panels last?\n- Why "
                                         "use inverters?\n\n");
  REQUIRE(items.size() == 3);
  CHECK(items[0] == "What is a solar cell?");
  CHECK(items[2] == "Why use inverters?");
  CHECK(parse_question_list("nothing numbered here").empty());
}

TEST_CASE("synthesis returns scripted questions") {
  std::string reply;
  for (int i = 1; i <= 8; ++i) reply += std::to_string(i) + ". What is solar fact number " + std::to_string(i) + "?\n";
  auto chat = replying({{"query.synthesize", reply}});
  const auto qs = synthesize_candidate_queries(*chat, {}, make_doc(), 8);
  REQUIRE(qs.size() == 8);
  CHECK(qs[0].query_id == "q1");
  CHECK(qs[7].text == "What is solar fact number 8?");
}

TEST_CASE("synthesis drops duplicate lines") {
  auto chat = replying({{"query.synthesize", "1. How do panels work?\n2. How do panels work?\n3. Why tilt panels?\n"}});
  const auto qs = synthesize_candidate_queries(*chat, {}, make_doc(), 5);
  REQUIRE(qs.size() == 2);
  CHECK(qs[1].text == "Why tilt panels?");
}

TEST_CASE("synthesis uses the creative temperature") {
  double seen = -1;
  auto chat = std::make_shared<ScriptedChatBackend>([&](const ChatRequest& r) -> std::optional<std::string> {
    seen = r.temperature;
    return std::string("1. How do panels work?");
  });
  LlmSettings llm;
  synthesize_candidate_queries(*chat, llm, make_doc(), 3);
  CHECK(seen == llm.creative_temperature);
}

TEST_CASE("synthesis preconditions and unparseable replies") {
  auto chat = replying({{"query.synthesize", "I cannot help with that."}});
  CHECK_THROWS_AS(synthesize_candidate_queries(*chat, {}, make_doc(""), 3), ValidationError);
  CHECK_THROWS_AS(synthesize_candidate_queries(*chat, {}, make_doc(), 0), ValidationError);
  CHECK_THROWS_AS(synthesize_candidate_queries(*chat, {}, make_doc(), 3), ParseError);
}

TEST_CASE("heuristics drop short, whitespace-duplicate and near-duplicate queries") {
  std::vector<Query> qs{query("q1", "How do solar panels work?"), query("q2", "How  do solar   panels work?"),
                        query("q3", "ok"), query("q4", "The sky is blue."),
                        query("q5", "Explain how inverters convert current"),
                        query("q6", "how do solar panels work ?")};
  const auto kept = apply_query_heuristics(qs, {});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].query_id == "q1");
  CHECK(kept[1].query_id == "q5");
}

TEST_CASE("filter replies") {
  CHECK(*parse_filter_reply("reject: 2, 4", 5) == std::vector<std::size_t>{1, 3, 5});
  CHECK(*parse_filter_reply("Reject: none", 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK(*parse_filter_reply("reasoning first\nkeep: 1,3", 4) == std::vector<std::size_t>{1, 3});
  CHECK_FALSE(parse_filter_reply("reject: 9", 3).has_value());
  CHECK_FALSE(parse_filter_reply("no idea", 3).has_value());
}

TEST_CASE("model filter rejecting 2 and 4 of 5 keeps the rest in order") {
  std::vector<Query> qs{query("q1", "What is a photovoltaic cell?"), query("q2", "How long do panels last?"),
                        query("q3", "Why do panels face south?"), query("q4", "Which inverter types exist?"),
                        query("q5", "What maintenance do panels need?")};
  auto chat = replying({{"query.filter", "reject: 2, 4"}});
  const auto kept = refine_queries(*chat, {}, qs, make_doc());
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].query_id == "q1");
  CHECK(kept[1].query_id == "q3");
  CHECK(kept[2].query_id == "q5");
  for (const auto& k : kept) {
    CHECK(std::any_of(qs.begin(), qs.end(), [&](const Query& q) { return q.text == k.text; }));
  }
}

TEST_CASE("unparseable filter keeps heuristic survivors") {
  std::vector<Query> qs{query("q1", "What is a photovoltaic cell?"), query("q2", "How long do panels last?")};
  auto chat = replying({{"query.filter", "hmm"}});
  CHECK(refine_queries(*chat, {}, qs, make_doc()).size() == 2);
  CHECK_THROWS_AS(refine_queries(*chat, {}, std::vector<Query>{}, make_doc()), ValidationError);
}

TEST_CASE("retrieval keeps query order and degrades failed searches") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  search->set_default(ten_results());
  search->fail_on("How long do panels last?");
  std::vector<Query> qs{query("q1", "What is a photovoltaic cell?"), query("q2", "How long do panels last?"),
                        query("q3", "Why do panels face south?")};
  const auto corpus = retrieve_contexts(*search, make_doc(), qs, 5, 3);
  REQUIRE(corpus.pairs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(corpus.pairs[i].query.query_id == qs[i].query_id);
  CHECK(corpus.pairs[1].contexts.empty());
  CHECK(corpus.pairs[1].retrieval_error.has_value());

  // top-k oracle: the five highest scores are sites 9..5
  REQUIRE(corpus.pairs[0].contexts.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(corpus.pairs[0].contexts[i].url == "https://site" + std::to_string(9 - i) + ".example/");
    CHECK(corpus.pairs[0].contexts[i].rank == i + 1);
  }
}

TEST_CASE("retrieval leaves out the source's own url") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  auto results = ten_results();
  results[9].url = "http://example.org/solar/";
  search->set_default(results);
  const auto corpus = retrieve_contexts(*search, make_doc(), std::vector<Query>{query("q1", "What is solar?")}, 5);
  for (const auto& c : corpus.pairs[0].contexts) CHECK(c.url != "http://example.org/solar/");
}

TEST_CASE("retrieval fails when every search fails") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  search->fail_on("What is solar?");
  CHECK_THROWS_AS(retrieve_contexts(*search, make_doc(), std::vector<Query>{query("q1", "What is solar?")}, 5),
                  CorpusError);
  CHECK_THROWS_AS(retrieve_contexts(*search, make_doc(), std::vector<Query>{}, 5), ValidationError);
}

TEST_CASE("benchmark pair selection is seeded") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  search->set_default(ten_results());
  const auto seed = query("s1", "best home solar setup");
  const auto a = build_benchmark_pair(*search, seed, 10, 42);
  const auto b = build_benchmark_pair(*search, seed, 10, 42);
  CHECK(a.source.url == b.source.url);
  CHECK(a.candidates.size() == 10);
  CHECK(a.source.url == a.candidates[seeded_index(42, 10)].url);

  search->set_default({ten_results()[0]});
  CHECK(build_benchmark_pair(*search, seed, 10, 7).source.url == "https://site0.example/");
  search->set_default({});
  CHECK_THROWS_AS(build_benchmark_pair(*search, seed, 10, 7), CorpusError);
}

TEST_CASE("seeded index stays in range and is deterministic") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    CHECK(seeded_index(s, 10) < 10);
    CHECK(seeded_index(s, 10) == seeded_index(s, 10));
  }
  CHECK(seeded_index(5, 1) == 0);
}

TEST_CASE("verification by normalized url within the top k") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  auto results = ten_results();
  auto doc = make_doc();
  doc.url = "https://site7.example";  // rank 3 by score, no trailing slash
  search->set_default(results);
  const auto q = query("q1", "What is solar?");
  CHECK(verify_query_article_link(*search, q, doc, 5));
  doc.url = "http://site3.example/";  // rank 7
  CHECK_FALSE(verify_query_article_link(*search, q, doc, 5));
  CHECK(verify_query_article_link(*search, q, doc, 7));
  doc.url = "https://elsewhere.example/";
  CHECK_FALSE(verify_query_article_link(*search, q, doc, 10));
  search->fail_on("What is solar?");
  CHECK_THROWS(verify_query_article_link(*search, q, doc, 5));
}

TEST_CASE("verification is monotone in k") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  search->set_default(ten_results());
  const auto q = query("q1", "What is solar?");
  for (int site = 0; site < 10; ++site) {
    auto doc = make_doc();
    doc.url = "https://site" + std::to_string(site) + ".example/";
    bool seen_true = false;
    for (int k = 1; k <= 12; ++k) {
      const bool linked = verify_query_article_link(*search, q, doc, k);
      if (seen_true) CHECK(linked);
      seen_true = seen_true || linked;
    }
    CHECK(seen_true);
  }
}

TEST_CASE("verification filter separates rejected and inconclusive queries") {
  auto search = FixtureSearchBackend::from_json(nlohmann::json{{"schema", "gseo/v1"}, {"responses", nlohmann::json::object()}});
  auto doc = make_doc();
  search->set_response("linked?", {make_result("https://example.org/solar", "Me", "x", 0.9, 1)});
  search->set_response("unlinked?", {make_result("https://other.example/", "Other", "x", 0.9, 1)});
  search->fail_on("broken?");
  std::vector<Query> qs{query("q1", "linked?"), query("q2", "unlinked?"), query("q3", "broken?")};
  const auto report = filter_verified_queries(*search, qs, doc, 5, 2);
  REQUIRE(report.retained.size() == 1);
  CHECK(report.retained[0].query_id == "q1");
  REQUIRE(report.rejected.size() == 1);
  CHECK(report.rejected[0].query_id == "q2");
  REQUIRE(report.inconclusive.size() == 1);
  CHECK(report.inconclusive[0].query_id == "q3");
}
