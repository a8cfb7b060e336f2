#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gseo/corpus.hpp"
#include "gseo/llm.hpp"
#include "gseo/providers/chat.hpp"
#include "gseo/providers/rerank.hpp"

namespace gseo {

enum class Dimension { CP, AA, FA, KC, SC, AD };
enum class Layer { attribution_mechanics, content_fidelity, semantic_dominance };

inline constexpr std::array<Dimension, 6> kAllDimensions = {Dimension::CP, Dimension::AA, Dimension::FA,
                                                            Dimension::KC, Dimension::SC, Dimension::AD};

std::string_view dimension_key(Dimension d);
std::string_view dimension_name(Dimension d);
Layer dimension_layer(Dimension d);
std::string_view layer_name(Layer l);
std::optional<Dimension> parse_dimension(std::string_view key);
inline std::size_t dimension_index(Dimension d) { return static_cast<std::size_t>(d); }

struct ContextDoc {
  std::string url;
  std::string title;
  std::string content;
  bool is_target = false;
};

/// The ordered context shown to the answer engine, with the document under
/// evaluation placed by the reranker.
struct EvaluationContext {
  Query query;
  std::vector<ContextDoc> docs;
  int insertion_position = 1;  // 1-based position of the target
};

struct GeneratedAnswer {
  std::string text;
  std::set<int> cited_source_indices;  // 1-based context positions
};

struct EvaluationRecord {
  int version = 0;
  std::string query_id;
  Dimension dim = Dimension::CP;
  std::optional<double> rating;  // nullopt marks a missing record
  std::string justification;
  std::string answer_text;
  int insertion_position = 1;
};

/// Per-dimension mean ratings of one document version. Components are absent
/// only for dimensions that were not requested.
struct PerformanceVector {
  int version = 0;
  std::array<std::optional<double>, 6> components{};

  std::optional<double> operator[](Dimension d) const { return components[dimension_index(d)]; }
  bool complete() const;
  /// Unweighted mean of the present components, summed in sorted order so the
  /// result does not depend on dimension order.
  double mean() const;
};

struct Evaluation {
  int version = 0;
  std::vector<EvaluationRecord> records;  // missing records excluded
  PerformanceVector vector;
  std::size_t missing = 0;
};

nlohmann::json vector_to_json(const PerformanceVector& v);
PerformanceVector vector_from_json(const nlohmann::json& j);
nlohmann::json evaluation_to_json(const Evaluation& e);
Evaluation evaluation_from_json(const nlohmann::json& j);

/// Appends the document to the retrieved contexts and lets the reranker order
/// them (input order if it fails). Throws ValidationError if the document
/// body is empty or already present among the contexts.
EvaluationContext build_eval_context(providers::Reranker& reranker, const Document& doc, const Query& query,
                                     std::span<const SearchResult> contexts);

/// Integers inside [n] or [n, m] markers; other bracketed text is ignored.
std::set<int> parse_citations(std::string_view answer);

/// Removes citation markers whose index is outside [1, context_size].
std::string strip_out_of_range_citations(std::string_view answer, int context_size);

/// Asks the answer engine (precise temperature) to answer the query from the
/// context with bracketed citations. Out-of-range citations trigger one
/// re-prompt; if they persist they are stripped and a warning logged.
GeneratedAnswer generate_answer(providers::ChatBackend& chat, const LlmSettings& llm, const Query& query,
                                const EvaluationContext& ctx);

struct JudgeReply {
  double rating = 0.0;
  std::string justification;
};

/// Reads "rating: x" (0..10, rounded to one decimal) and the justification.
std::optional<JudgeReply> parse_judge_reply(std::string_view reply);

/// One judge call for one dimension. A reply without a usable rating after one
/// re-prompt yields a record whose rating is nullopt.
EvaluationRecord score_dimension(providers::ChatBackend& chat, const LlmSettings& llm, const Document& doc,
                                 const Query& query, const GeneratedAnswer& answer, const EvaluationContext& ctx,
                                 Dimension dim);

/// Mean rating per requested dimension over the present records. Throws
/// EvaluationError if a requested dimension has no rating at all.
PerformanceVector aggregate_vector(int version, std::span<const EvaluationRecord> records,
                                   std::span<const Dimension> dims);

struct Evaluator {
  providers::ChatBackend& chat;
  providers::Reranker& reranker;
  LlmSettings llm;
  int concurrency = 4;
};

/// Scores the document on every (pair, dimension) cell. Answers are generated
/// once per pair; judge calls fan out up to the concurrency cap, and results
/// are assembled in (pair, dimension) order.
Evaluation evaluate_document(const Evaluator& evaluator, const Document& doc, const BenchmarkCorpus& corpus,
                             std::span<const Dimension> dims = kAllDimensions);

}  // namespace gseo
