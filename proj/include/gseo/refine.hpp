#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gseo/judge.hpp"

namespace gseo::refine {

struct Suggestion {
  std::string id;  // "g<priority>"
  std::vector<Dimension> targets;
  std::string description;
  int priority = 1;  // 1 is applied first
};

nlohmann::json suggestion_to_json(const Suggestion& s);
Suggestion suggestion_from_json(const nlohmann::json& j);

/// For each dimension, the `per_dim` lowest-rated records. Ties keep natural
/// query_id order. Dimensions appear in the fixed CP..AD order.
std::vector<EvaluationRecord> select_low_scoring_examples(std::span<const EvaluationRecord> records,
                                                          std::size_t per_dim);

/// Parses "N. [targets: CP, AD] description" items. Items without a
/// description are dropped; priorities are renumbered 1..m in list order.
std::vector<Suggestion> parse_suggestions(std::string_view reply);

struct AnalystOptions {
  std::size_t examples_per_dim = 2;
  std::size_t max_suggestions = 5;
};

/// Renders the analyst prompt body (exposed for prompt-assembly checks).
std::string render_analysis_prompt(const Document& doc, const PerformanceVector& vector,
                                   std::span<const EvaluationRecord> examples, std::size_t pair_count,
                                   std::size_t max_suggestions);

/// Analyst call at creative temperature. Returns an empty list when nothing
/// parses after one re-prompt.
std::vector<Suggestion> analyze(providers::ChatBackend& chat, const LlmSettings& llm, const Document& doc,
                                const PerformanceVector& vector, std::span<const EvaluationRecord> examples,
                                std::size_t pair_count, const AnalystOptions& options = {});

/// Editor call at precise temperature implementing one suggestion. An empty
/// completion is retried once, then ParseError.
Document apply_suggestion(providers::ChatBackend& chat, const LlmSettings& llm, const Document& doc,
                          const Suggestion& suggestion);

struct ValidationOutcome {
  bool passed = false;
  std::string reason;  // empty when passed
};

inline constexpr double kMinLengthRatio = 0.3;
inline constexpr double kMaxLengthRatio = 3.0;

/// Passes iff the new body is non-empty, new/old byte length lies in
/// [0.3, 3.0] and the body changed.
ValidationOutcome validate_revision(const Document& old_doc, const Document& new_doc);

struct Attempt {
  std::string suggestion_id;
  ValidationOutcome outcome;
};

struct TrajectoryEntry {
  Document document;
  Evaluation evaluation;
  std::vector<Suggestion> suggestions;  // analysis of this version; empty on the last entry
  std::optional<Suggestion> applied;    // suggestion that produced this version
  std::vector<Attempt> attempts;        // editor attempts that led here

  int version() const { return document.version; }
  const PerformanceVector& vector() const { return evaluation.vector; }
};

enum class Termination { max_iterations, plateau, validation_exhausted };
std::string_view termination_name(Termination t);
Termination parse_termination(std::string_view s);

struct Trajectory {
  std::vector<TrajectoryEntry> entries;
  Termination termination = Termination::max_iterations;
};

/// entry.json payload: everything except the document body and the records.
nlohmann::json entry_to_json(const TrajectoryEntry& entry);
/// Rebuilds an entry from its entry.json, document body and evaluation.
TrajectoryEntry entry_from_json(const nlohmann::json& j, std::string body, Evaluation evaluation);

struct PlateauConfig {
  double epsilon = 0.05;
  int window = 2;
  bool per_dimension = false;
};

/// True when each of the last `window` iterations improved the mean (or,
/// per-dimension, every component) by less than epsilon.
bool plateau_reached(std::span<const PerformanceVector> history, const PlateauConfig& config);

struct LoopConfig {
  int max_iterations = 10;
  PlateauConfig plateau;
  AnalystOptions analyst;
};

/// Receives loop progress for incremental persistence.
class TrajectorySink {
 public:
  virtual ~TrajectorySink() = default;
  virtual void on_evaluation(const Evaluation&) {}
  /// Called once per entry when its suggestions are final.
  virtual void on_entry(const TrajectoryEntry&) {}
  virtual void on_finish(const Trajectory&) {}
};

/// evaluate -> pick low scorers -> analyze -> edit with the best surviving
/// suggestion -> validate, until max_iterations, a plateau, or no suggestion
/// passes validation. `resume` holds already completed entries 0..k.
Trajectory run_refinement_loop(const Evaluator& evaluator, const Document& d0, const BenchmarkCorpus& corpus,
                               const LoopConfig& config, TrajectorySink* sink = nullptr,
                               std::vector<TrajectoryEntry> resume = {});

}  // namespace gseo::refine
