#include "gseo/judge.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "gseo/concurrency.hpp"
#include "gseo/errors.hpp"
#include "gseo/prompts.hpp"
#include "gseo/text.hpp"

namespace gseo {

using json = nlohmann::json;

// --- dimensions ------------------------------------------------------------

std::string_view dimension_key(Dimension d) {
  static constexpr std::array<std::string_view, 6> kKeys = {"CP", "AA", "FA", "KC", "SC", "AD"};
  return kKeys[dimension_index(d)];
}

std::string_view dimension_name(Dimension d) {
  static constexpr std::array<std::string_view, 6> kNames = {
      "Citation Prominence",           "Attribution Accuracy",  "Faithfulness",
      "Key Information Point Coverage", "Semantic Contribution", "Answer Dominance"};
  return kNames[dimension_index(d)];
}

Layer dimension_layer(Dimension d) {
  switch (d) {
    case Dimension::CP:
      return Layer::attribution_mechanics;
    case Dimension::AA:
    case Dimension::FA:
      return Layer::content_fidelity;
    case Dimension::KC:
    case Dimension::SC:
    case Dimension::AD:
      return Layer::semantic_dominance;
  }
  return Layer::semantic_dominance;
}

std::string_view layer_name(Layer l) {
  switch (l) {
    case Layer::attribution_mechanics:
      return "attribution-mechanics";
    case Layer::content_fidelity:
      return "content-fidelity";
    case Layer::semantic_dominance:
      return "semantic-dominance";
  }
  return "";
}

std::optional<Dimension> parse_dimension(std::string_view key) {
  for (auto d : kAllDimensions) {
    if (dimension_key(d) == key) return d;
  }
  return std::nullopt;
}

// --- vectors ---------------------------------------------------------------

bool PerformanceVector::complete() const {
  return std::all_of(components.begin(), components.end(), [](const auto& c) { return c.has_value(); });
}

double PerformanceVector::mean() const {
  std::vector<double> present;
  for (const auto& c : components) {
    if (c) present.push_back(*c);
  }
  if (present.empty()) return 0.0;
  std::sort(present.begin(), present.end());
  double sum = 0.0;
  for (double v : present) sum += v;
  return sum / static_cast<double>(present.size());
}

json vector_to_json(const PerformanceVector& v) {
  json components = json::object();
  for (auto d : kAllDimensions) {
    if (auto c = v[d]) components[std::string(dimension_key(d))] = *c;
  }
  return {{"version", v.version}, {"components", std::move(components)}, {"mean", v.mean()}};
}

PerformanceVector vector_from_json(const json& j) {
  PerformanceVector v;
  v.version = j.at("version").get<int>();
  for (const auto& [key, value] : j.at("components").items()) {
    auto d = parse_dimension(key);
    if (!d) throw ValidationError("unknown dimension in vector: " + key);
    v.components[dimension_index(*d)] = value.get<double>();
  }
  return v;
}

json evaluation_to_json(const Evaluation& e) {
  json records = json::array();
  for (const auto& r : e.records) {
    records.push_back({{"query_id", r.query_id},
                       {"dim", dimension_key(r.dim)},
                       {"rating", r.rating ? json(*r.rating) : json(nullptr)},
                       {"justification", r.justification},
                       {"answer_text", r.answer_text},
                       {"insertion_position", r.insertion_position}});
  }
  return {{"schema", "gseo/v1"},
          {"version", e.version},
          {"vector", vector_to_json(e.vector)},
          {"missing", e.missing},
          {"records", std::move(records)}};
}

Evaluation evaluation_from_json(const json& j) {
  if (j.value("schema", "") != "gseo/v1") throw ValidationError("evaluation file is not schema gseo/v1");
  Evaluation e;
  e.version = j.at("version").get<int>();
  e.vector = vector_from_json(j.at("vector"));
  e.missing = j.value("missing", std::size_t{0});
  for (const auto& r : j.at("records")) {
    EvaluationRecord rec;
    rec.version = e.version;
    rec.query_id = r.at("query_id").get<std::string>();
    auto d = parse_dimension(r.at("dim").get<std::string>());
    if (!d) throw ValidationError("unknown dimension in evaluation record");
    rec.dim = *d;
    if (!r.at("rating").is_null()) rec.rating = r["rating"].get<double>();
    rec.justification = r.value("justification", "");
    rec.answer_text = r.value("answer_text", "");
    rec.insertion_position = r.value("insertion_position", 1);
    e.records.push_back(std::move(rec));
  }
  return e;
}

// --- context ---------------------------------------------------------------

EvaluationContext build_eval_context(providers::Reranker& reranker, const Document& doc, const Query& query,
                                     std::span<const SearchResult> contexts) {
  if (text::trim(doc.body).empty()) throw ValidationError("cannot evaluate a document with an empty body");
  const auto doc_url = doc.url.empty() ? std::string{} : text::normalize_url(doc.url);

  std::vector<ContextDoc> docs;
  docs.reserve(contexts.size() + 1);
  for (const auto& c : contexts) {
    if (c.content == doc.body || (!doc_url.empty() && text::normalize_url(c.url) == doc_url)) {
      throw ValidationError("target document already present in the context for '" + query.text +
                            "'; the target must be unique");
    }
    docs.push_back({c.url, c.title, c.content, false});
  }
  docs.push_back({doc.url, doc.title, doc.body, true});

  std::vector<providers::RerankCandidate> candidates;
  candidates.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    candidates.push_back({std::to_string(i), docs[i].title + "\n" + docs[i].content});
  }
  const auto order = providers::rerank_or_input_order(reranker, query.text, candidates);

  EvaluationContext ctx;
  ctx.query = query;
  for (const auto& ranked : order) {
    ctx.docs.push_back(docs[ranked.index]);
    if (ctx.docs.back().is_target) ctx.insertion_position = static_cast<int>(ctx.docs.size());
  }
  return ctx;
}

namespace {

std::string format_sources(const EvaluationContext& ctx) {
  std::string out;
  for (std::size_t i = 0; i < ctx.docs.size(); ++i) {
    const auto& d = ctx.docs[i];
    out += "[" + std::to_string(i + 1) + "] " + (d.title.empty() ? std::string("(untitled)") : d.title) + "\n";
    if (!d.url.empty()) out += "URL: " + d.url + "\n";
    out += d.content + "\n\n";
  }
  return text::trim(out);
}

const std::regex& citation_regex() {
  static const std::regex re(R"(\[\s*(\d+(?:\s*,\s*\d+)*)\s*\])");
  return re;
}

}  // namespace

// --- answers ---------------------------------------------------------------

std::set<int> parse_citations(std::string_view answer) {
  static const std::regex number(R"(\d+)");
  std::set<int> out;
  const std::string s(answer);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), citation_regex()); it != std::sregex_iterator(); ++it) {
    const std::string inner = (*it)[1].str();
    for (auto n = std::sregex_iterator(inner.begin(), inner.end(), number); n != std::sregex_iterator(); ++n) {
      out.insert(std::stoi(n->str()));
    }
  }
  return out;
}

std::string strip_out_of_range_citations(std::string_view answer, int context_size) {
  static const std::regex number(R"(\d+)");
  const std::string s(answer);
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), citation_regex()); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(s, last, static_cast<std::size_t>(m.position(0)) - last);
    const std::string inner = m[1].str();
    std::vector<std::string> valid;
    for (auto n = std::sregex_iterator(inner.begin(), inner.end(), number); n != std::sregex_iterator(); ++n) {
      const int idx = std::stoi(n->str());
      if (idx >= 1 && idx <= context_size) valid.push_back(std::to_string(idx));
    }
    if (!valid.empty()) out += "[" + text::join(valid, ", ") + "]";
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(s, last);
  return out;
}

GeneratedAnswer generate_answer(providers::ChatBackend& chat, const LlmSettings& llm, const Query& query,
                                const EvaluationContext& ctx) {
  if (ctx.docs.empty()) throw ValidationError("evaluation context is empty");
  const int size = static_cast<int>(ctx.docs.size());
  const auto& tmpl = prompts::agent_prompt(prompts::kRagAnswer);
  auto request = make_request(llm, tmpl.id, tmpl.system,
                              text::render(tmpl.user, {{"query", query.text}, {"sources", format_sources(ctx)}}),
                              llm.precise_temperature);

  std::function<std::optional<GeneratedAnswer>(const std::string&)> parse =
      [size](const std::string& reply) -> std::optional<GeneratedAnswer> {
    auto cited = parse_citations(reply);
    if (!cited.empty() && (*cited.begin() < 1 || *cited.rbegin() > size)) return std::nullopt;
    return GeneratedAnswer{text::trim(reply), std::move(cited)};
  };
  auto asked = ask_with_reprompt(
      chat, std::move(request), parse,
      "Some citations refer to sources that do not exist. Rewrite the answer citing only sources [1] to [" +
          std::to_string(size) + "].");
  if (asked.value) return std::move(*asked.value);
  if (text::trim(asked.last_reply).empty()) throw ParseError("answer engine returned an empty completion");

  spdlog::warn("answer for '{}' still cites sources outside [1, {}]; stripping them", query.text, size);
  GeneratedAnswer answer;
  answer.text = text::trim(strip_out_of_range_citations(asked.last_reply, size));
  answer.cited_source_indices = parse_citations(answer.text);
  return answer;
}

// --- judging ---------------------------------------------------------------

namespace {

std::string strip_leading_separators(std::string s) {
  static const std::vector<std::string> kSeparators = {"\xE2\x80\x94", "\xE2\x80\x93", "-", ":", "/", "|", ",", ";"};
  bool changed = true;
  while (changed) {
    changed = false;
    s = text::trim(s);
    for (const auto& sep : kSeparators) {
      if (s.rfind(sep, 0) == 0) {
        s.erase(0, sep.size());
        changed = true;
      }
    }
  }
  return s;
}

}  // namespace

std::optional<JudgeReply> parse_judge_reply(std::string_view reply) {
  static const std::regex rating_re(R"(rating\s*\**\s*[:=]?\s*\**\s*(-?\d+(?:\.\d+)?))", std::regex::icase);
  static const std::regex justification_re(R"(justification\s*\**\s*:\s*\**)", std::regex::icase);
  const std::string s(reply);

  std::smatch m;
  if (!std::regex_search(s, m, rating_re)) return std::nullopt;
  const double raw = std::stod(m[1].str());
  if (!std::isfinite(raw) || raw < 0.0 || raw > 10.0) return std::nullopt;

  JudgeReply out;
  out.rating = std::round(raw * 10.0) / 10.0;
  const std::string after = m.suffix().str();

  std::smatch jm;
  if (std::regex_search(s, jm, justification_re)) {
    out.justification = text::trim(jm.suffix().str());
  } else {
    // "/10" right after the number belongs to the rating
    std::string rest = after;
    if (auto t = text::trim(rest); t.rfind("/10", 0) == 0) rest = t.substr(3);
    out.justification = strip_leading_separators(rest);
  }
  if (out.justification.empty()) return std::nullopt;
  return out;
}

EvaluationRecord score_dimension(providers::ChatBackend& chat, const LlmSettings& llm, const Document& doc,
                                 const Query& query, const GeneratedAnswer& answer, const EvaluationContext& ctx,
                                 Dimension dim) {
  const auto& tmpl = prompts::agent_prompt("judge." + std::string(dimension_key(dim)));
  auto request = make_request(llm, tmpl.id, tmpl.system,
                              text::render(tmpl.user, {{"query", query.text},
                                                       {"sources", format_sources(ctx)},
                                                       {"position", std::to_string(ctx.insertion_position)},
                                                       {"answer", answer.text},
                                                       {"dimension_name", std::string(dimension_name(dim))}}),
                              llm.precise_temperature);
  std::function<std::optional<JudgeReply>(const std::string&)> parse = [](const std::string& reply) {
    return parse_judge_reply(reply);
  };
  auto asked = ask_with_reprompt(chat, std::move(request), parse,
                                 "Reply in exactly this format:\nrating: <a number between 0 and 10 with one "
                                 "decimal>\njustification: <one to three sentences>");

  EvaluationRecord record;
  record.version = doc.version;
  record.query_id = query.query_id;
  record.dim = dim;
  record.answer_text = answer.text;
  record.insertion_position = ctx.insertion_position;
  if (asked.value) {
    record.rating = asked.value->rating;
    record.justification = std::move(asked.value->justification);
  } else {
    record.justification = asked.last_reply;
  }
  return record;
}

PerformanceVector aggregate_vector(int version, std::span<const EvaluationRecord> records,
                                   std::span<const Dimension> dims) {
  PerformanceVector vector;
  vector.version = version;
  for (auto d : dims) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (r.dim != d || !r.rating) continue;
      sum += *r.rating;
      ++n;
    }
    if (n == 0) {
      throw EvaluationError("version " + std::to_string(version) + ": every " + std::string(dimension_key(d)) +
                            " rating is missing");
    }
    vector.components[dimension_index(d)] = sum / static_cast<double>(n);
  }
  return vector;
}

Evaluation evaluate_document(const Evaluator& evaluator, const Document& doc, const BenchmarkCorpus& corpus,
                             std::span<const Dimension> dims) {
  doc.validate();
  corpus.validate();
  if (dims.empty()) throw ValidationError("evaluate_document needs at least one dimension");

  const auto& pairs = corpus.pairs;
  std::vector<EvaluationContext> contexts(pairs.size());
  std::vector<GeneratedAnswer> answers(pairs.size());
  parallel_for(pairs.size(), evaluator.concurrency, [&](std::size_t i) {
    contexts[i] = build_eval_context(evaluator.reranker, doc, pairs[i].query, pairs[i].contexts);
    answers[i] = generate_answer(evaluator.chat, evaluator.llm, pairs[i].query, contexts[i]);
  });

  const std::size_t cells = pairs.size() * dims.size();
  std::vector<EvaluationRecord> all(cells);
  parallel_for(cells, evaluator.concurrency, [&](std::size_t cell) {
    const std::size_t p = cell / dims.size();
    const std::size_t d = cell % dims.size();
    all[cell] = score_dimension(evaluator.chat, evaluator.llm, doc, pairs[p].query, answers[p], contexts[p], dims[d]);
  });

  Evaluation evaluation;
  evaluation.version = doc.version;
  for (auto& record : all) {
    if (!record.rating) {
      ++evaluation.missing;
      spdlog::warn("version {}: no usable {} rating for {}; excluded from the mean", doc.version,
                   dimension_key(record.dim), record.query_id);
      continue;
    }
    evaluation.records.push_back(std::move(record));
  }
  evaluation.vector = aggregate_vector(doc.version, evaluation.records, dims);
  return evaluation;
}

}  // namespace gseo
