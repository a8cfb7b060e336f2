#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gseo::providers {

struct RerankCandidate {
  std::string id;
  std::string text;
};

struct RankedCandidate {
  std::size_t index = 0;  // position in the input list
  double score = 0.0;
};

class Reranker {
 public:
  virtual ~Reranker() = default;

  /// Returns a permutation of the candidate indices, best first, with a score
  /// per item. Throws ValidationError on an empty candidate list.
  virtual std::vector<RankedCandidate> rerank(std::string_view query,
                                              std::span<const RerankCandidate> candidates) = 0;
};

/// Scores each candidate by the number of distinct query tokens it contains.
/// Ties keep input order.
class OverlapReranker : public Reranker {
 public:
  std::vector<RankedCandidate> rerank(std::string_view query,
                                      std::span<const RerankCandidate> candidates) override;
};

/// Calls `reranker`; if it throws or returns something other than a
/// permutation of the input, logs a warning and returns the input order.
std::vector<RankedCandidate> rerank_or_input_order(Reranker& reranker, std::string_view query,
                                                   std::span<const RerankCandidate> candidates);

}  // namespace gseo::providers
