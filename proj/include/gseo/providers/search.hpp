#pragma once

#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gseo/providers/http.hpp"
#include "gseo/providers/retry.hpp"

namespace gseo::providers {

struct SearchResult {
  std::string url;
  std::string title;
  std::string content;
  double relevance_score = 0.0;
  int rank = 0;  // 1-based within its result set
};

void to_json(nlohmann::json& j, const SearchResult& r);
void from_json(const nlohmann::json& j, SearchResult& r);

/// Stable-sorts by descending score, keeps the first max_results, and assigns ranks 1..n.
std::vector<SearchResult> normalize_results(std::vector<SearchResult> results, int max_results);

/// Tavily-style search request body.
nlohmann::json search_request_body(std::string_view query, int max_results);

/// Reads the "results" array of a Tavily-style response body. Throws ProviderError.
std::vector<SearchResult> parse_search_response(std::string_view body);

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;

  /// At most max_results items ordered by descending relevance. Zero hits is an
  /// empty list, not an error. Throws ValidationError on an empty query or
  /// max_results < 1, ProviderError subclasses on backend failure.
  std::vector<SearchResult> search(std::string_view query, int max_results);

 protected:
  virtual std::vector<SearchResult> do_search(std::string_view query, int max_results) = 0;
};

struct TavilyOptions {
  std::string base_url = "https://api.tavily.com";
  std::string api_key;
  RetryPolicy retry;
};

class TavilySearchClient : public SearchBackend {
 public:
  TavilySearchClient(std::shared_ptr<HttpTransport> transport, TavilyOptions options,
                     Sleeper sleep = real_sleeper());

  const RetryCounters& counters() const { return counters_; }

 protected:
  std::vector<SearchResult> do_search(std::string_view query, int max_results) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  TavilyOptions options_;
  Sleeper sleep_;
  RetryCounters counters_;
};

/// Offline search over raw response bodies keyed by query text.
/// Fixture schema: {"schema": "gseo/v1", "responses": {"<query>": <raw body>},
/// "default": <raw body>?, "errors": ["<query>", ...]?}. Queries are matched
/// after whitespace collapsing; listed errors raise TransportError.
class FixtureSearchBackend : public SearchBackend {
 public:
  static std::unique_ptr<FixtureSearchBackend> from_json(const nlohmann::json& fixture);
  static std::unique_ptr<FixtureSearchBackend> load(const std::string& path);

  void set_response(std::string_view query, std::vector<SearchResult> results);
  void set_default(std::vector<SearchResult> results);
  void fail_on(std::string_view query);

 protected:
  std::vector<SearchResult> do_search(std::string_view query, int max_results) override;

 private:
  std::map<std::string, std::vector<SearchResult>> responses_;
  std::optional<std::vector<SearchResult>> default_;
  std::set<std::string> errors_;
};

}  // namespace gseo::providers
