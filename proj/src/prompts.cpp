#include "gseo/prompts.hpp"

#include <map>

#include "gseo/errors.hpp"

namespace gseo::prompts {
namespace {

constexpr std::string_view kJudgeFormat =
    "Reply in exactly this format and nothing else:\n"
    "rating: <a number between 0 and 10 with one decimal>\n"
    "justification: <one to three sentences citing evidence from the answer>";

constexpr std::string_view kJudgeUser =
    "Question: {{query}}\n\n"
    "Sources shown to the engine:\n{{sources}}\n\n"
    "The source under evaluation is [{{position}}].\n\n"
    "Generated answer:\n<answer>\n{{answer}}\n</answer>\n\n"
    "Rate source [{{position}}] on {{dimension_name}}.";

struct JudgeSpec {
  std::string_view key;
  std::string_view name;
  std::string_view definition;
  std::string_view anchors;
};

constexpr JudgeSpec kJudges[] = {
    {"CP", "Citation Prominence",
     "How visible and unambiguous the credit to the source is: whether the answer cites it, how early and how "
     "often, and whether the citation is attached to central claims.",
     "0 = the source is never cited.\n"
     "5 = cited once, late, or only for a peripheral detail.\n"
     "10 = cited early and repeatedly for the answer's central claims."},
    {"AA", "Attribution Accuracy",
     "Whether the claims the answer attributes to the source actually originate from the source text.",
     "0 = nothing is attributed to the source, or every attributed claim is absent from it.\n"
     "5 = a mix of supported and unsupported attributions.\n"
     "10 = every claim attributed to the source is supported by it."},
    {"FA", "Faithfulness",
     "Whether material drawn from the source keeps its original meaning, without distortion, exaggeration, or "
     "dropped qualifiers.",
     "0 = the source's content is misrepresented or unused.\n"
     "5 = the gist survives but with noticeable distortions or omissions.\n"
     "10 = the source's meaning is preserved exactly."},
    {"KC", "Key Information Point Coverage",
     "How many of the source's specific facts, figures, names, and key points relevant to the question appear in "
     "the answer.",
     "0 = none of the source's key points appear.\n"
     "5 = roughly half of the relevant key points appear.\n"
     "10 = all relevant key points from the source appear."},
    {"SC", "Semantic Contribution",
     "How much of the answer's core ideas and reasoning were transferred from this source rather than from the "
     "other sources.",
     "0 = the answer's substance owes nothing to the source.\n"
     "5 = the source is one of several comparable contributors.\n"
     "10 = the answer's core ideas come from this source."},
    {"AD", "Answer Dominance",
     "The source's overall role in shaping the answer's structure, framing, and conclusion.",
     "0 = the source played no role in the answer.\n"
     "5 = the source played a supporting role.\n"
     "10 = the answer is essentially built on this source."},
};

std::map<std::string, PromptTemplate, std::less<>> build_catalog() {
  std::map<std::string, PromptTemplate, std::less<>> catalog;
  const std::string version(kCatalogVersion);

  catalog.emplace(kSynthesizeQueries, PromptTemplate{
      std::string(kSynthesizeQueries), version,
      "You write realistic questions that users type into generative search engines. Every question you write "
      "must be answerable from the article you are given.",
      "Article title: {{title}}\n\n<article>\n{{body}}\n</article>\n\n"
      "Write {{count}} diverse, self-contained questions that this article can answer. Vary the intent: facts, "
      "explanations, comparisons, lists, and how-to guidance. Output a numbered list (1., 2., ...) with one "
      "question per line and no other text."});

  catalog.emplace(kFilterQueries, PromptTemplate{
      std::string(kFilterQueries), version,
      "You curate benchmark queries for evaluating how an article performs in generative search.",
      "<article>\n{{body}}\n</article>\n\nCandidate queries:\n{{candidates}}\n\n"
      "Reject every query that is unclear, not answerable from the article, or redundant with an earlier query. "
      "Reply with exactly one line: `reject: <comma-separated numbers>` or `reject: none`."});

  catalog.emplace(kRagAnswer, PromptTemplate{
      std::string(kRagAnswer), version,
      "You are a generative search engine. Answer the user's question using only the numbered sources provided. "
      "Support every claim with the bracketed number of the source it comes from, for example [1] or [2][3]. "
      "Never cite a number that is not in the source list.",
      "Question: {{query}}\n\nSources:\n{{sources}}\n\n"
      "Write a concise, well-organized answer with bracketed numeric citations."});

  for (const auto& judge : kJudges) {
    PromptTemplate t;
    t.id = "judge." + std::string(judge.key);
    t.version = version;
    t.system = "You are an impartial judge measuring how strongly one source influenced an answer written by a "
               "generative search engine.\n\nDimension: " +
               std::string(judge.name) + " (" + std::string(judge.key) + ")\n" + std::string(judge.definition) +
               "\n\nScoring anchors:\n" + std::string(judge.anchors) + "\n\n" + std::string(kJudgeFormat);
    t.user = std::string(kJudgeUser);
    catalog.emplace(t.id, std::move(t));
  }

  catalog.emplace(kAnalyze, PromptTemplate{
      std::string(kAnalyze), version,
      "You are an analyst for generative search engine optimization. You diagnose why an article has weak "
      "influence on answers synthesized by generative search engines and propose concrete revisions.",
      "<document>\n{{document}}\n</document>\n\n"
      "Influence scores on a 0-10 scale, averaged over {{pair_count}} benchmark queries:\n{{scores}}\n\n"
      "Lowest-scoring examples:\n{{examples}}\n\n"
      "Identify the root causes of the low scores. Then list up to {{max_suggestions}} concrete, actionable "
      "suggestions for revising the article, most important first. Use exactly this format, one suggestion per "
      "item:\n1. [targets: CP, AD] <detailed description of the change>"});

  catalog.emplace(kEdit, PromptTemplate{
      std::string(kEdit), version,
      "You are an expert editor. You revise an article by implementing exactly one requested change and nothing "
      "else.",
      "<document>\n{{document}}\n</document>\n\n<suggestion>\n{{suggestion}}\n</suggestion>\n\n"
      "Revise the document to implement only this suggestion and keep everything else intact. Return the full "
      "revised document text with no preamble or commentary."});

  catalog.emplace(kSelect, PromptTemplate{
      std::string(kSelect), version,
      "You are the final reviewer of an iterative article optimization run. You choose the single best version "
      "of the article.",
      "The article went through {{count}} versions; version 0 is the original. For each version you see its "
      "influence scores (0-10), the change that produced it, and the opening of its text.\n\n{{versions}}\n\n"
      "Choose the version with the best trade-off across all six metrics, weighing peak scores together with "
      "stability: avoid versions where any metric collapsed or the text shows signs of over-optimization. Reply "
      "in exactly this format:\nversion: <number>\njustification: <detailed reasoning>"});

  return catalog;
}

const std::map<std::string, PromptTemplate, std::less<>>& catalog() {
  static const auto instance = build_catalog();
  return instance;
}

}  // namespace

const PromptTemplate& agent_prompt(std::string_view id) {
  const auto& c = catalog();
  auto it = c.find(id);
  if (it == c.end()) throw ValidationError("unknown prompt template: " + std::string(id));
  return it->second;
}

std::vector<std::string> agent_prompt_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : catalog()) ids.push_back(id);
  return ids;
}

}  // namespace gseo::prompts
