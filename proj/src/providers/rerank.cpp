#include "gseo/providers/rerank.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <exception>

#include "gseo/errors.hpp"
#include "gseo/text.hpp"

namespace gseo::providers {

std::vector<RankedCandidate> OverlapReranker::rerank(std::string_view query,
                                                     std::span<const RerankCandidate> candidates) {
  if (candidates.empty()) throw ValidationError("rerank needs at least one candidate");
  const auto query_tokens = text::token_set(query);
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto doc_tokens = text::token_set(candidates[i].text);
    std::size_t shared = 0;
    for (const auto& t : query_tokens) shared += doc_tokens.count(t);
    ranked.push_back({i, static_cast<double>(shared)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) { return a.score > b.score; });
  return ranked;
}

namespace {

bool is_permutation_of_input(const std::vector<RankedCandidate>& ranked, std::size_t n) {
  if (ranked.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (const auto& r : ranked) {
    if (r.index >= n || seen[r.index]) return false;
    seen[r.index] = true;
  }
  return true;
}

std::vector<RankedCandidate> input_order(std::size_t n) {
  std::vector<RankedCandidate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({i, 0.0});
  return out;
}

}  // namespace

std::vector<RankedCandidate> rerank_or_input_order(Reranker& reranker, std::string_view query,
                                                   std::span<const RerankCandidate> candidates) {
  if (candidates.empty()) throw ValidationError("rerank needs at least one candidate");
  try {
    auto ranked = reranker.rerank(query, candidates);
    if (is_permutation_of_input(ranked, candidates.size())) return ranked;
    spdlog::warn("reranker returned a non-permutation for '{}'; keeping input order", query);
  } catch (const std::exception& e) {
    spdlog::warn("reranker failed for '{}': {}; keeping input order", query, e.what());
  }
  return input_order(candidates.size());
}

}  // namespace gseo::providers
