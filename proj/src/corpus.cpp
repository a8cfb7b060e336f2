#include "gseo/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <random>
#include <regex>
#include <set>

#include "gseo/concurrency.hpp"
#include "gseo/errors.hpp"
#include "gseo/prompts.hpp"
#include "gseo/text.hpp"

namespace gseo {

using json = nlohmann::json;

// --- provenance / document -------------------------------------------------

std::string Provenance::str() const {
  switch (kind) {
    case ProvenanceKind::original:
      return "original";
    case ProvenanceKind::baseline:
      return "baseline:" + detail;
    case ProvenanceKind::maco:
      return "maco:" + detail;
  }
  return "original";
}

Provenance Provenance::parse(std::string_view s) {
  if (s == "original") return original();
  if (s.rfind("baseline:", 0) == 0 && s.size() > 9) return baseline(std::string(s.substr(9)));
  if (s.rfind("maco:", 0) == 0 && s.size() > 5) return {ProvenanceKind::maco, std::string(s.substr(5))};
  throw ValidationError("unknown provenance: " + std::string(s));
}

void Document::validate() const {
  if (text::trim(body).empty()) throw ValidationError("document '" + doc_id + "' has an empty body");
  if (version < 0) throw ValidationError("document version must be non-negative");
  if ((version == 0) != (provenance.kind == ProvenanceKind::original)) {
    throw ValidationError("document '" + doc_id + "': version 0 must coincide with original provenance (version " +
                          std::to_string(version) + ", provenance " + provenance.str() + ")");
  }
}

void to_json(json& j, const Document& d) {
  j = {{"doc_id", d.doc_id}, {"title", d.title},          {"body", d.body},
       {"version", d.version}, {"provenance", d.provenance.str()}, {"url", d.url}};
}

void from_json(const json& j, Document& d) {
  d.doc_id = j.at("doc_id").get<std::string>();
  d.title = j.value("title", "");
  d.body = j.at("body").get<std::string>();
  d.version = j.value("version", 0);
  d.provenance = Provenance::parse(j.value("provenance", "original"));
  d.url = j.value("url", "");
}

// --- queries ---------------------------------------------------------------

const std::vector<std::string>& answer_type_vocabulary() {
  static const std::vector<std::string> v{"Fact", "Explanation", "List", "Comparison", "Guide"};
  return v;
}

const std::vector<std::string>& user_intent_vocabulary() {
  static const std::vector<std::string> v{"Learning", "Research", "Entertainment", "Comparison", "Purchase"};
  return v;
}

const std::vector<std::string>& topic_vocabulary() {
  static const std::vector<std::string> v{"Arts",     "Beauty",     "Business",     "Economics",
                                          "Education", "Electronics", "Hobbies",     "Internet",
                                          "News",     "Online Comm.", "Pets",        "Politics",
                                          "Real Estate", "Shopping",  "Sports"};
  return v;
}

namespace {

void check_vocab(const std::optional<std::string>& value, const std::vector<std::string>& vocab,
                 std::string_view field) {
  if (!value) return;
  if (std::find(vocab.begin(), vocab.end(), *value) == vocab.end()) {
    throw ValidationError(std::string(field) + " tag '" + *value + "' is not in the vocabulary");
  }
}

std::string_view origin_name(QueryOrigin o) { return o == QueryOrigin::synthesized ? "synthesized" : "seed-dataset"; }

QueryOrigin parse_origin(std::string_view s) {
  if (s == "synthesized") return QueryOrigin::synthesized;
  if (s == "seed-dataset") return QueryOrigin::seed_dataset;
  throw ValidationError("unknown query origin: " + std::string(s));
}

json tags_to_json(const QueryTags& t) {
  json j = json::object();
  if (t.answer_type) j["answer_type"] = *t.answer_type;
  if (t.user_intent) j["user_intent"] = *t.user_intent;
  if (t.topic) j["topic"] = *t.topic;
  return j;
}

QueryTags tags_from_json(const json& j) {
  QueryTags t;
  if (!j.is_object()) return t;
  if (j.contains("answer_type")) t.answer_type = j["answer_type"].get<std::string>();
  if (j.contains("user_intent")) t.user_intent = j["user_intent"].get<std::string>();
  if (j.contains("topic")) t.topic = j["topic"].get<std::string>();
  t.validate();
  return t;
}

}  // namespace

void QueryTags::validate() const {
  check_vocab(answer_type, answer_type_vocabulary(), "answer_type");
  check_vocab(user_intent, user_intent_vocabulary(), "user_intent");
  check_vocab(topic, topic_vocabulary(), "topic");
}

void BenchmarkCorpus::validate() const {
  if (pairs.empty()) throw ValidationError("benchmark corpus has no query pairs");
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    if (text::trim(p.query.text).empty()) throw ValidationError("corpus query text is empty");
    if (!seen.insert(p.query.text).second) throw ValidationError("duplicate corpus query: " + p.query.text);
  }
}

json corpus_to_json(const BenchmarkCorpus& corpus) {
  json pairs = json::array();
  for (const auto& p : corpus.pairs) {
    json entry = {{"query_id", p.query.query_id},
                  {"query", p.query.text},
                  {"origin", origin_name(p.query.origin)},
                  {"tags", tags_to_json(p.query.tags)},
                  {"contexts", p.contexts}};
    if (p.retrieval_error) entry["retrieval_error"] = *p.retrieval_error;
    pairs.push_back(std::move(entry));
  }
  return {{"schema", "gseo/v1"}, {"source_doc", corpus.source}, {"pairs", std::move(pairs)}};
}

BenchmarkCorpus corpus_from_json(const json& j) {
  if (j.value("schema", "") != "gseo/v1") throw ValidationError("corpus file is not schema gseo/v1");
  BenchmarkCorpus corpus;
  corpus.source = j.at("source_doc").get<Document>();
  for (const auto& p : j.at("pairs")) {
    CorpusPair pair;
    pair.query.query_id = p.at("query_id").get<std::string>();
    pair.query.text = p.at("query").get<std::string>();
    pair.query.origin = parse_origin(p.value("origin", "synthesized"));
    pair.query.tags = tags_from_json(p.value("tags", json::object()));
    pair.contexts = p.at("contexts").get<std::vector<SearchResult>>();
    if (p.contains("retrieval_error")) pair.retrieval_error = p["retrieval_error"].get<std::string>();
    corpus.pairs.push_back(std::move(pair));
  }
  corpus.validate();
  return corpus;
}

// --- synthesis -------------------------------------------------------------

std::vector<std::string> parse_question_list(std::string_view reply) {
  static const std::regex item(R"(^\s*(?:\d+\s*[.):]|[-*]|•)\s*(.+?)\s*$)");
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(reply)) {
    std::smatch m;
    if (!std::regex_match(line, m, item)) continue;
    auto q = text::collapse_whitespace(m[1].str());
    // strip wrapping quotes or bold markers the model sometimes adds
    while (q.size() >= 2 && (q.front() == '"' || q.front() == '*') && q.back() == q.front()) {
      q = text::trim(q.substr(1, q.size() - 2));
    }
    if (!q.empty()) out.push_back(std::move(q));
  }
  return out;
}

std::vector<Query> synthesize_candidate_queries(providers::ChatBackend& chat, const LlmSettings& llm,
                                                const Document& doc, int n_candidates) {
  if (text::trim(doc.body).empty()) throw ValidationError("cannot synthesize queries for an empty document");
  if (n_candidates < 1) throw ValidationError("n_candidates must be at least 1");

  const auto& tmpl = prompts::agent_prompt(prompts::kSynthesizeQueries);
  auto request = make_request(
      llm, tmpl.id, tmpl.system,
      text::render(tmpl.user, {{"title", doc.title}, {"body", doc.body}, {"count", std::to_string(n_candidates)}}),
      llm.creative_temperature);

  std::function<std::optional<std::vector<std::string>>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<std::vector<std::string>> {
    auto items = parse_question_list(reply);
    if (items.empty()) return std::nullopt;
    return items;
  };
  auto asked = ask_with_reprompt(chat, std::move(request), parse,
                                 "Reply only with a numbered list of questions, one per line.");
  if (!asked.value) throw ParseError("query synthesis produced no parseable question list");

  std::vector<Query> queries;
  std::set<std::string> seen;
  for (auto& q : *asked.value) {
    if (queries.size() >= static_cast<std::size_t>(n_candidates)) break;
    if (!seen.insert(q).second) continue;
    Query query;
    query.query_id = "q" + std::to_string(queries.size() + 1);
    query.text = std::move(q);
    query.origin = QueryOrigin::synthesized;
    queries.push_back(std::move(query));
  }
  return queries;
}

// --- refinement ------------------------------------------------------------

namespace {

bool has_question_form(std::string_view q) {
  static const std::set<std::string> kLeadWords = {
      "what", "why",    "how",   "when",  "where", "which", "who",   "whom",  "whose", "is",     "are",
      "can",  "could",  "does",  "do",    "did",   "should", "would", "will", "was",   "were",   "has",
      "have", "explain", "describe", "list", "compare", "tell", "give", "show", "name", "define",
      "summarize", "outline", "find", "identify", "provide", "suggest", "recommend", "discuss", "detail",
      "walk", "help", "calculate", "contrast"};
  const auto trimmed = text::trim(q);
  if (!trimmed.empty() && trimmed.back() == '?') return true;
  const auto tokens = text::tokenize(trimmed);
  return !tokens.empty() && kLeadWords.count(tokens.front()) > 0;
}

}  // namespace

std::vector<Query> apply_query_heuristics(std::span<const Query> candidates, const QueryHeuristics& heuristics) {
  std::vector<Query> kept;
  std::vector<std::set<std::string>> kept_tokens;
  std::set<std::string> exact;
  for (const auto& q : candidates) {
    const auto normalized = text::collapse_whitespace(q.text);
    if (normalized.size() < heuristics.min_length) continue;
    if (!has_question_form(normalized)) continue;
    if (!exact.insert(text::to_lower(normalized)).second) continue;
    const auto tokens = text::token_set(normalized);
    const bool near_dup = std::any_of(kept_tokens.begin(), kept_tokens.end(), [&](const auto& other) {
      return text::jaccard(tokens, other) >= heuristics.near_duplicate_jaccard;
    });
    if (near_dup) continue;
    kept.push_back(q);
    kept_tokens.push_back(tokens);
  }
  return kept;
}

std::optional<std::vector<std::size_t>> parse_filter_reply(std::string_view reply, std::size_t count) {
  static const std::regex line_re(R"(^\s*`?\s*(reject|keep)\s*:\s*(.*?)`?\s*$)", std::regex::icase);
  static const std::regex number_re(R"(\d+)");
  for (const auto& line : text::split_lines(reply)) {
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) continue;
    const bool reject = text::to_lower(m[1].str()) == "reject";
    const std::string list = m[2].str();
    std::set<std::size_t> listed;
    if (text::to_lower(text::trim(list)) != "none") {
      for (auto it = std::sregex_iterator(list.begin(), list.end(), number_re); it != std::sregex_iterator(); ++it) {
        const auto n = static_cast<std::size_t>(std::stoul(it->str()));
        if (n < 1 || n > count) return std::nullopt;
        listed.insert(n);
      }
      if (listed.empty()) return std::nullopt;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 1; i <= count; ++i) {
      if (listed.count(i) == (reject ? 1U : 0U)) continue;
      keep.push_back(i);
    }
    return keep;
  }
  return std::nullopt;
}

std::vector<Query> refine_queries(providers::ChatBackend& chat, const LlmSettings& llm,
                                  std::span<const Query> candidates, const Document& doc,
                                  const QueryHeuristics& heuristics) {
  if (candidates.empty()) throw ValidationError("refine_queries needs at least one candidate");
  auto survivors = apply_query_heuristics(candidates, heuristics);
  if (survivors.empty()) return survivors;

  std::string listing;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    listing += std::to_string(i + 1) + ". " + survivors[i].text + "\n";
  }
  const auto& tmpl = prompts::agent_prompt(prompts::kFilterQueries);
  auto request = make_request(llm, tmpl.id, tmpl.system,
                              text::render(tmpl.user, {{"body", doc.body}, {"candidates", text::trim(listing)}}),
                              llm.precise_temperature);
  const auto count = survivors.size();
  std::function<std::optional<std::vector<std::size_t>>(const std::string&)> parse =
      [count](const std::string& reply) { return parse_filter_reply(reply, count); };
  auto asked = ask_with_reprompt(chat, std::move(request), parse,
                                 "Reply with exactly one line: `reject: <comma-separated numbers>` or `reject: none`.");
  if (!asked.value) {
    spdlog::warn("query filter reply unparseable after re-prompt; keeping all {} heuristic survivors", count);
    return survivors;
  }
  std::vector<Query> kept;
  for (auto position : *asked.value) kept.push_back(survivors[position - 1]);
  return kept;
}

// --- retrieval -------------------------------------------------------------

BenchmarkCorpus retrieve_contexts(providers::SearchBackend& search, const Document& source,
                                  std::span<const Query> queries, int k, int concurrency) {
  if (queries.empty()) throw ValidationError("retrieve_contexts needs at least one query");
  if (k < 1) throw ValidationError("k must be at least 1");

  const auto source_url = source.url.empty() ? std::string{} : text::normalize_url(source.url);
  BenchmarkCorpus corpus;
  corpus.source = source;
  corpus.pairs.resize(queries.size());

  parallel_for(queries.size(), concurrency, [&](std::size_t i) {
    auto& pair = corpus.pairs[i];
    pair.query = queries[i];
    try {
      auto results = search.search(queries[i].text, source_url.empty() ? k : k + 1);
      std::erase_if(results, [&](const SearchResult& r) {
        return (!source_url.empty() && text::normalize_url(r.url) == source_url) || r.content == source.body;
      });
      pair.contexts = providers::normalize_results(std::move(results), k);
    } catch (const ProviderError& e) {
      pair.retrieval_error = e.what();
    }
  });

  std::size_t failures = 0;
  for (const auto& pair : corpus.pairs) {
    if (!pair.retrieval_error) continue;
    ++failures;
    spdlog::warn("retrieval failed for '{}': {}; keeping the pair with empty contexts", pair.query.text,
                 *pair.retrieval_error);
  }
  if (failures == corpus.pairs.size()) throw CorpusError("every context search failed");
  return corpus;
}

// --- benchmark construction ------------------------------------------------

std::size_t seeded_index(std::uint64_t rng_seed, std::size_t n) {
  if (n == 0) throw ValidationError("cannot pick from an empty set");
  std::mt19937_64 engine(rng_seed);
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = engine();
    if (x >= threshold) return static_cast<std::size_t>(x % bound);
  }
}

BenchmarkSeed build_benchmark_pair(providers::SearchBackend& search, const Query& seed_query, int top_n,
                                   std::uint64_t rng_seed) {
  if (top_n < 1) throw ValidationError("top_n must be at least 1");
  auto candidates = search.search(seed_query.text, top_n);
  if (candidates.empty()) throw CorpusError("seed query returned no documents: " + seed_query.text);

  const auto& chosen = candidates[seeded_index(rng_seed, candidates.size())];
  BenchmarkSeed seed;
  seed.source.doc_id = chosen.url.empty() ? "seed-rank-" + std::to_string(chosen.rank) : chosen.url;
  seed.source.title = chosen.title;
  seed.source.body = chosen.content;
  seed.source.url = chosen.url;
  seed.source.version = 0;
  seed.source.provenance = Provenance::original();
  seed.candidates = std::move(candidates);
  return seed;
}

bool verify_query_article_link(providers::SearchBackend& search, const Query& query, const Document& article,
                               int k) {
  const std::string identity = article.url.empty() ? article.doc_id : article.url;
  if (identity.find("://") == std::string::npos) {
    throw ValidationError("article '" + article.doc_id + "' has no URL identity to verify against");
  }
  const auto target = text::normalize_url(identity);
  const auto results = search.search(query.text, k);
  return std::any_of(results.begin(), results.end(),
                     [&](const SearchResult& r) { return text::normalize_url(r.url) == target; });
}

VerificationReport filter_verified_queries(providers::SearchBackend& search, std::span<const Query> queries,
                                           const Document& article, int k, int concurrency) {
  enum class Verdict { linked, unlinked, inconclusive };
  std::vector<Verdict> verdicts(queries.size(), Verdict::inconclusive);
  parallel_for(queries.size(), concurrency, [&](std::size_t i) {
    try {
      verdicts[i] = verify_query_article_link(search, queries[i], article, k) ? Verdict::linked : Verdict::unlinked;
    } catch (const ProviderError& e) {
      spdlog::warn("verification inconclusive for '{}': {}", queries[i].text, e.what());
      verdicts[i] = Verdict::inconclusive;
    }
  });
  VerificationReport report;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    switch (verdicts[i]) {
      case Verdict::linked:
        report.retained.push_back(queries[i]);
        break;
      case Verdict::unlinked:
        report.rejected.push_back(queries[i]);
        break;
      case Verdict::inconclusive:
        report.inconclusive.push_back(queries[i]);
        break;
    }
  }
  return report;
}

}  // namespace gseo
