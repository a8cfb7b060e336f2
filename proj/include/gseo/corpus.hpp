#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gseo/llm.hpp"
#include "gseo/providers/chat.hpp"
#include "gseo/providers/search.hpp"

namespace gseo {

using providers::SearchResult;

enum class ProvenanceKind { original, baseline, maco };

/// Where a document version came from: "original", "baseline:<chain>", "maco:<t>".
struct Provenance {
  ProvenanceKind kind = ProvenanceKind::original;
  std::string detail;

  std::string str() const;
  static Provenance parse(std::string_view s);
  static Provenance original() { return {}; }
  static Provenance baseline(std::string chain) { return {ProvenanceKind::baseline, std::move(chain)}; }
  static Provenance maco(int iteration) { return {ProvenanceKind::maco, std::to_string(iteration)}; }

  bool operator==(const Provenance&) const = default;
};

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  int version = 0;
  Provenance provenance;
  std::string url;  // identity used when verifying search membership; may be empty

  /// Throws ValidationError unless the body is non-empty and version 0 holds
  /// exactly when the provenance is original.
  void validate() const;
};

void to_json(nlohmann::json& j, const Document& d);
void from_json(const nlohmann::json& j, Document& d);

enum class QueryOrigin { synthesized, seed_dataset };

/// Optional labels, each from a closed vocabulary.
struct QueryTags {
  std::optional<std::string> answer_type;  // Fact, Explanation, List, Comparison, Guide
  std::optional<std::string> user_intent;  // Learning, Research, Entertainment, Comparison, Purchase
  std::optional<std::string> topic;

  /// Throws ValidationError for a label outside its vocabulary.
  void validate() const;
  bool empty() const { return !answer_type && !user_intent && !topic; }
};

const std::vector<std::string>& answer_type_vocabulary();
const std::vector<std::string>& user_intent_vocabulary();
const std::vector<std::string>& topic_vocabulary();

struct Query {
  std::string query_id;
  std::string text;
  QueryOrigin origin = QueryOrigin::synthesized;
  QueryTags tags;
};

struct CorpusPair {
  Query query;
  std::vector<SearchResult> contexts;
  std::optional<std::string> retrieval_error;
};

struct BenchmarkCorpus {
  Document source;
  std::vector<CorpusPair> pairs;

  /// Non-empty pairs with unique query texts.
  void validate() const;
};

nlohmann::json corpus_to_json(const BenchmarkCorpus& corpus);
BenchmarkCorpus corpus_from_json(const nlohmann::json& j);

struct QueryHeuristics {
  std::size_t min_length = 10;          // characters after trimming
  double near_duplicate_jaccard = 0.85;  // drop the later query at or above this
};

/// Asks the model (creative temperature) for up to n_candidates questions the
/// document answers. Exact duplicates are dropped. Throws ValidationError on an
/// empty body or n_candidates < 1, ParseError if no list comes back after one
/// re-prompt.
std::vector<Query> synthesize_candidate_queries(providers::ChatBackend& chat, const LlmSettings& llm,
                                                const Document& doc, int n_candidates);

/// Parses a numbered or bulleted list into question strings.
std::vector<std::string> parse_question_list(std::string_view reply);

/// Applies the heuristics (min length, question or imperative form, exact and
/// near duplicates), then the model filter. The result keeps input order and
/// is a subset of the input.
std::vector<Query> refine_queries(providers::ChatBackend& chat, const LlmSettings& llm,
                                  std::span<const Query> candidates, const Document& doc,
                                  const QueryHeuristics& heuristics = {});

/// Heuristic stage of refine_queries alone.
std::vector<Query> apply_query_heuristics(std::span<const Query> candidates, const QueryHeuristics& heuristics);

/// Parses "reject: 2, 4" / "reject: none" / "keep: 1, 3" into the 1-based
/// positions to keep out of `count`.
std::optional<std::vector<std::size_t>> parse_filter_reply(std::string_view reply, std::size_t count);

/// One search per query (concurrent, order-preserving), up to k contexts each.
/// Results pointing at the source's own URL are left out so the evaluated
/// document is never duplicated in its context. A failed search leaves that
/// pair with empty contexts and a recorded error; CorpusError if all fail.
BenchmarkCorpus retrieve_contexts(providers::SearchBackend& search, const Document& source,
                                  std::span<const Query> queries, int k, int concurrency = 1);

struct BenchmarkSeed {
  Document source;
  std::vector<SearchResult> candidates;
};

/// Retrieves the top_n results for a seed query and picks one uniformly at
/// random (seeded) as the source article. CorpusError on zero results.
BenchmarkSeed build_benchmark_pair(providers::SearchBackend& search, const Query& seed_query, int top_n,
                                   std::uint64_t rng_seed);

/// Uniform index in [0, n) from a 64-bit Mersenne Twister seeded with rng_seed.
/// Uses rejection sampling so the mapping is identical on every platform.
std::size_t seeded_index(std::uint64_t rng_seed, std::size_t n);

/// True iff a fresh search for the query lists the article (by normalized URL)
/// within the top k. Search failures propagate so callers can tell
/// "inconclusive" from "not linked".
bool verify_query_article_link(providers::SearchBackend& search, const Query& query, const Document& article,
                               int k);

struct VerificationReport {
  std::vector<Query> retained;
  std::vector<Query> rejected;
  std::vector<Query> inconclusive;
};

VerificationReport filter_verified_queries(providers::SearchBackend& search, std::span<const Query> queries,
                                           const Document& article, int k, int concurrency = 1);

}  // namespace gseo
