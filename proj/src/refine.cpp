#include "gseo/refine.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <regex>

#include "gseo/errors.hpp"
#include "gseo/prompts.hpp"
#include "gseo/text.hpp"

namespace gseo::refine {

using json = nlohmann::json;

json suggestion_to_json(const Suggestion& s) {
  json targets = json::array();
  for (auto d : s.targets) targets.push_back(dimension_key(d));
  return {{"id", s.id}, {"priority", s.priority}, {"targets", targets}, {"description", s.description}};
}

Suggestion suggestion_from_json(const json& j) {
  Suggestion s;
  s.id = j.at("id").get<std::string>();
  s.priority = j.at("priority").get<int>();
  s.description = j.at("description").get<std::string>();
  for (const auto& t : j.value("targets", json::array())) {
    auto d = parse_dimension(t.get<std::string>());
    if (!d) throw ValidationError("unknown suggestion target: " + t.get<std::string>());
    s.targets.push_back(*d);
  }
  if (text::trim(s.description).empty()) throw ValidationError("suggestion " + s.id + " has no description");
  return s;
}

std::vector<EvaluationRecord> select_low_scoring_examples(std::span<const EvaluationRecord> records,
                                                          std::size_t per_dim) {
  std::vector<EvaluationRecord> out;
  for (auto dim : kAllDimensions) {
    std::vector<const EvaluationRecord*> rows;
    for (const auto& r : records) {
      if (r.dim == dim && r.rating) rows.push_back(&r);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const EvaluationRecord* a, const EvaluationRecord* b) {
      if (*a->rating != *b->rating) return *a->rating < *b->rating;
      return text::natural_less(a->query_id, b->query_id);
    });
    for (std::size_t i = 0; i < rows.size() && i < per_dim; ++i) out.push_back(*rows[i]);
  }
  return out;
}

std::vector<Suggestion> parse_suggestions(std::string_view reply) {
  static const std::regex item(R"(^\s*\**\s*(\d+)\s*[.):]\**\s*(?:\[\s*targets?\s*:\s*([^\]]*)\])?\s*(.*)$)",
                               std::regex::icase);
  static const std::regex key(R"([A-Za-z]{2})");

  struct Raw {
    std::vector<Dimension> targets;
    std::string description;
  };
  std::vector<Raw> raw;
  bool in_item = false;
  for (const auto& line : text::split_lines(reply)) {
    std::smatch m;
    if (std::regex_match(line, m, item)) {
      Raw r;
      const std::string targets = m[2].str();
      for (auto it = std::sregex_iterator(targets.begin(), targets.end(), key); it != std::sregex_iterator(); ++it) {
        std::string k = it->str();
        std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::toupper(c); });
        if (auto d = parse_dimension(k); d && std::find(r.targets.begin(), r.targets.end(), *d) == r.targets.end()) {
          r.targets.push_back(*d);
        }
      }
      r.description = text::trim(m[3].str());
      raw.push_back(std::move(r));
      in_item = true;
    } else if (in_item && !text::trim(line).empty()) {
      auto& last = raw.back().description;
      last += (last.empty() ? "" : " ") + text::trim(line);
    } else if (text::trim(line).empty()) {
      in_item = in_item && !raw.empty() && raw.back().description.empty();
    }
  }

  std::vector<Suggestion> out;
  for (auto& r : raw) {
    if (r.description.empty()) continue;
    Suggestion s;
    s.priority = static_cast<int>(out.size()) + 1;
    s.id = "g" + std::to_string(s.priority);
    s.targets = std::move(r.targets);
    s.description = std::move(r.description);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_analysis_prompt(const Document& doc, const PerformanceVector& vector,
                                   std::span<const EvaluationRecord> examples, std::size_t pair_count,
                                   std::size_t max_suggestions) {
  std::string scores;
  for (auto d : kAllDimensions) {
    if (auto v = vector[d]) scores += fmt::format("- {} ({}): {:.2f}\n", dimension_key(d), dimension_name(d), *v);
  }

  // weakest dimensions first
  std::vector<Dimension> order(kAllDimensions.begin(), kAllDimensions.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](Dimension a, Dimension b) { return vector[a].value_or(10.0) < vector[b].value_or(10.0); });
  std::string rendered;
  int n = 0;
  for (auto d : order) {
    for (const auto& r : examples) {
      if (r.dim != d) continue;
      rendered += fmt::format("Example {} [{}] rating {:.1f} (query {}, source position {})\n", ++n,
                              dimension_key(d), r.rating.value_or(0.0), r.query_id, r.insertion_position);
      rendered += "Answer:\n" + r.answer_text + "\nJudge: " + r.justification + "\n\n";
    }
  }
  if (rendered.empty()) rendered = "(none)";

  const auto& tmpl = prompts::agent_prompt(prompts::kAnalyze);
  return text::render(tmpl.user, {{"document", doc.body},
                                  {"pair_count", std::to_string(pair_count)},
                                  {"scores", text::trim(scores)},
                                  {"examples", text::trim(rendered)},
                                  {"max_suggestions", std::to_string(max_suggestions)}});
}

std::vector<Suggestion> analyze(providers::ChatBackend& chat, const LlmSettings& llm, const Document& doc,
                                const PerformanceVector& vector, std::span<const EvaluationRecord> examples,
                                std::size_t pair_count, const AnalystOptions& options) {
  const auto& tmpl = prompts::agent_prompt(prompts::kAnalyze);
  auto request = make_request(llm, tmpl.id, tmpl.system,
                              render_analysis_prompt(doc, vector, examples, pair_count, options.max_suggestions),
                              llm.creative_temperature);
  std::function<std::optional<std::vector<Suggestion>>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<std::vector<Suggestion>> {
    auto s = parse_suggestions(reply);
    if (s.empty()) return std::nullopt;
    return s;
  };
  auto asked = ask_with_reprompt(chat, std::move(request), parse,
                                 "List the suggestions as a numbered list, one per item, in the form:\n"
                                 "1. [targets: CP, AD] <description>");
  if (!asked.value) {
    spdlog::warn("analyst reply for version {} did not parse; no suggestions", doc.version);
    return {};
  }
  auto out = std::move(*asked.value);
  if (out.size() > options.max_suggestions) out.resize(options.max_suggestions);
  return out;
}

Document apply_suggestion(providers::ChatBackend& chat, const LlmSettings& llm, const Document& doc,
                          const Suggestion& suggestion) {
  if (text::trim(suggestion.description).empty()) throw ValidationError("suggestion has no description");
  std::vector<std::string> keys;
  for (auto d : suggestion.targets) keys.emplace_back(dimension_key(d));
  std::string rendered = suggestion.description;
  if (!keys.empty()) rendered += "\n(targets: " + text::join(keys, ", ") + ")";

  const auto& tmpl = prompts::agent_prompt(prompts::kEdit);
  auto request = make_request(llm, tmpl.id, tmpl.system,
                              text::render(tmpl.user, {{"document", doc.body}, {"suggestion", rendered}}),
                              llm.precise_temperature);
  std::function<std::optional<std::string>(const std::string&)> parse =
      [](const std::string& reply) -> std::optional<std::string> {
    std::string body = reply.find("<document>") != std::string::npos ? text::extract_tagged(reply, "document")
                                                                     : reply;
    body = text::trim(body);
    if (body.empty()) return std::nullopt;
    return body;
  };
  auto asked = ask_with_reprompt(chat, std::move(request), parse,
                                 "Return the full revised document text and nothing else.");
  if (!asked.value) throw ParseError("editor returned an empty revision for suggestion " + suggestion.id);

  Document next = doc;
  next.body = std::move(*asked.value);
  next.version = doc.version + 1;
  next.provenance = Provenance::maco(next.version);
  return next;
}

ValidationOutcome validate_revision(const Document& old_doc, const Document& new_doc) {
  if (text::trim(new_doc.body).empty()) return {false, "empty body"};
  if (new_doc.body == old_doc.body) return {false, "unchanged body"};
  if (old_doc.body.empty()) return {true, {}};
  const double ratio = static_cast<double>(new_doc.body.size()) / static_cast<double>(old_doc.body.size());
  if (ratio < kMinLengthRatio || ratio > kMaxLengthRatio) {
    return {false, fmt::format("length ratio {:.2f} outside [{}, {}]", ratio, kMinLengthRatio, kMaxLengthRatio)};
  }
  return {true, {}};
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::max_iterations:
      return "max_iterations";
    case Termination::plateau:
      return "plateau";
    case Termination::validation_exhausted:
      return "validation_exhausted";
  }
  return "";
}

Termination parse_termination(std::string_view s) {
  for (auto t : {Termination::max_iterations, Termination::plateau, Termination::validation_exhausted}) {
    if (termination_name(t) == s) return t;
  }
  throw ValidationError("unknown termination reason: " + std::string(s));
}

json entry_to_json(const TrajectoryEntry& entry) {
  json suggestions = json::array();
  for (const auto& s : entry.suggestions) suggestions.push_back(suggestion_to_json(s));
  json attempts = json::array();
  for (const auto& a : entry.attempts) {
    attempts.push_back({{"suggestion_id", a.suggestion_id}, {"passed", a.outcome.passed}, {"reason", a.outcome.reason}});
  }
  json doc = entry.document;
  doc.erase("body");
  return {{"schema", "gseo/v1"},
          {"version", entry.version()},
          {"document", std::move(doc)},
          {"vector", vector_to_json(entry.vector())},
          {"applied", entry.applied ? suggestion_to_json(*entry.applied) : json(nullptr)},
          {"attempts", std::move(attempts)},
          {"suggestions", std::move(suggestions)}};
}

TrajectoryEntry entry_from_json(const json& j, std::string body, Evaluation evaluation) {
  if (j.value("schema", "") != "gseo/v1") throw ValidationError("trajectory entry is not schema gseo/v1");
  TrajectoryEntry entry;
  json doc = j.at("document");
  doc["body"] = std::move(body);
  entry.document = doc.get<Document>();
  entry.document.validate();
  if (evaluation.version != entry.document.version) {
    throw ValidationError(fmt::format("evaluation version {} does not match entry version {}", evaluation.version,
                                      entry.document.version));
  }
  entry.evaluation = std::move(evaluation);
  if (!j.at("applied").is_null()) entry.applied = suggestion_from_json(j["applied"]);
  for (const auto& a : j.at("attempts")) {
    entry.attempts.push_back({a.at("suggestion_id").get<std::string>(),
                              {a.at("passed").get<bool>(), a.value("reason", "")}});
  }
  for (const auto& s : j.at("suggestions")) entry.suggestions.push_back(suggestion_from_json(s));
  return entry;
}

bool plateau_reached(std::span<const PerformanceVector> history, const PlateauConfig& config) {
  if (config.window < 1) return false;
  const auto w = static_cast<std::size_t>(config.window);
  if (history.size() < w + 1) return false;
  for (std::size_t i = history.size() - w; i < history.size(); ++i) {
    const auto& prev = history[i - 1];
    const auto& cur = history[i];
    if (config.per_dimension) {
      for (auto d : kAllDimensions) {
        if (cur[d] && prev[d] && *cur[d] - *prev[d] >= config.epsilon) return false;
      }
    } else if (cur.mean() - prev.mean() >= config.epsilon) {
      return false;
    }
  }
  return true;
}

namespace {

std::vector<PerformanceVector> history_of(const std::vector<TrajectoryEntry>& entries) {
  std::vector<PerformanceVector> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.vector());
  return out;
}

}  // namespace

Trajectory run_refinement_loop(const Evaluator& evaluator, const Document& d0, const BenchmarkCorpus& corpus,
                               const LoopConfig& config, TrajectorySink* sink, std::vector<TrajectoryEntry> resume) {
  corpus.validate();
  d0.validate();
  if (config.max_iterations < 0) throw ValidationError("max_iterations must be >= 0");

  Trajectory trajectory;
  trajectory.entries = std::move(resume);
  for (std::size_t i = 0; i < trajectory.entries.size(); ++i) {
    if (trajectory.entries[i].version() != static_cast<int>(i)) {
      throw ValidationError("resumed trajectory is not contiguous from version 0");
    }
  }

  if (trajectory.entries.empty()) {
    TrajectoryEntry first;
    first.document = d0;
    first.evaluation = evaluate_document(evaluator, d0, corpus);
    if (sink) sink->on_evaluation(first.evaluation);
    trajectory.entries.push_back(std::move(first));
  } else {
    spdlog::info("resuming from version {}", trajectory.entries.back().version());
  }

  while (true) {
    auto& current = trajectory.entries.back();
    const int t = current.version();

    std::optional<Termination> stop;
    if (plateau_reached(history_of(trajectory.entries), config.plateau)) {
      stop = Termination::plateau;
    } else if (t >= config.max_iterations) {
      stop = Termination::max_iterations;
    }
    if (stop) {
      current.suggestions.clear();
      if (sink) sink->on_entry(current);
      trajectory.termination = *stop;
      break;
    }

    if (current.suggestions.empty()) {
      const auto examples = select_low_scoring_examples(current.evaluation.records, config.analyst.examples_per_dim);
      current.suggestions = analyze(evaluator.chat, evaluator.llm, current.document, current.vector(), examples,
                                    corpus.pairs.size(), config.analyst);
    }
    if (sink) sink->on_entry(current);

    TrajectoryEntry next;
    for (const auto& suggestion : current.suggestions) {
      Document revised;
      ValidationOutcome outcome;
      try {
        revised = apply_suggestion(evaluator.chat, evaluator.llm, current.document, suggestion);
        outcome = validate_revision(current.document, revised);
      } catch (const ParseError& e) {
        outcome = {false, e.what()};
      }
      next.attempts.push_back({suggestion.id, outcome});
      if (outcome.passed) {
        next.document = std::move(revised);
        next.applied = suggestion;
        break;
      }
      spdlog::warn("version {}: suggestion {} rejected ({})", t, suggestion.id, outcome.reason);
    }
    if (!next.applied) {
      trajectory.termination = Termination::validation_exhausted;
      break;
    }

    next.evaluation = evaluate_document(evaluator, next.document, corpus);
    if (sink) sink->on_evaluation(next.evaluation);
    spdlog::info("version {}: mean {:.3f} (applied {})", next.version(), next.vector().mean(), next.applied->id);
    trajectory.entries.push_back(std::move(next));
  }

  if (sink) sink->on_finish(trajectory);
  return trajectory;
}

}  // namespace gseo::refine
