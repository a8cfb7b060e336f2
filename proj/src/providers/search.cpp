#include "gseo/providers/search.hpp"

#include <algorithm>
#include <fstream>

#include "gseo/errors.hpp"
#include "gseo/text.hpp"

namespace gseo::providers {

using json = nlohmann::json;

void to_json(json& j, const SearchResult& r) {
  j = {{"url", r.url}, {"title", r.title}, {"content", r.content}, {"score", r.relevance_score}, {"rank", r.rank}};
}

void from_json(const json& j, SearchResult& r) {
  r.url = j.value("url", "");
  r.title = j.value("title", "");
  r.content = j.value("content", "");
  r.relevance_score = j.value("score", 0.0);
  r.rank = j.value("rank", 0);
}

std::vector<SearchResult> normalize_results(std::vector<SearchResult> results, int max_results) {
  for (auto& r : results) {
    if (!(r.relevance_score >= 0.0)) r.relevance_score = 0.0;
  }
  std::stable_sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    return a.relevance_score > b.relevance_score;
  });
  if (max_results >= 0 && results.size() > static_cast<std::size_t>(max_results)) {
    results.resize(static_cast<std::size_t>(max_results));
  }
  for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = static_cast<int>(i) + 1;
  return results;
}

json search_request_body(std::string_view query, int max_results) {
  return {{"query", query}, {"max_results", max_results}, {"search_depth", "basic"}, {"include_answer", false}};
}

namespace {

std::vector<SearchResult> results_from(const json& doc) {
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_array()) {
    throw ProviderError("search response has no results array");
  }
  std::vector<SearchResult> out;
  for (const auto& item : doc["results"]) {
    SearchResult r;
    r.url = item.value("url", "");
    r.title = item.value("title", "");
    r.content = item.value("content", "");
    if (item.contains("raw_content") && item["raw_content"].is_string() && r.content.empty()) {
      r.content = item["raw_content"].get<std::string>();
    }
    r.relevance_score = item.value("score", 0.0);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<SearchResult> parse_search_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("search response is not JSON: ") + e.what());
  }
  return results_from(doc);
}

std::vector<SearchResult> SearchBackend::search(std::string_view query, int max_results) {
  if (text::trim(query).empty()) throw ValidationError("search query is empty");
  if (max_results < 1) throw ValidationError("max_results must be at least 1");
  return normalize_results(do_search(query, max_results), max_results);
}

// --- live client -----------------------------------------------------------

TavilySearchClient::TavilySearchClient(std::shared_ptr<HttpTransport> transport, TavilyOptions options,
                                       Sleeper sleep)
    : transport_(std::move(transport)), options_(std::move(options)), sleep_(std::move(sleep)) {}

std::vector<SearchResult> TavilySearchClient::do_search(std::string_view query, int max_results) {
  if (options_.api_key.empty()) throw ProviderError("no search API key configured (GSEO_SEARCH_API_KEY)");
  std::string base = options_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  HttpRequest http;
  http.url = base + "/search";
  http.headers = {{"Authorization", "Bearer " + options_.api_key}, {"Content-Type", "application/json"}};
  http.body = search_request_body(query, max_results).dump();
  const auto raw = post_with_retry(*transport_, http, options_.retry, sleep_, counters_);
  return parse_search_response(raw.body);
}

// --- fixture ---------------------------------------------------------------

std::unique_ptr<FixtureSearchBackend> FixtureSearchBackend::from_json(const json& fixture) {
  if (!fixture.is_object() || fixture.value("schema", "") != "gseo/v1") {
    throw ConfigError("search fixture must be an object with schema \"gseo/v1\"");
  }
  auto backend = std::make_unique<FixtureSearchBackend>();
  try {
    if (fixture.contains("responses")) {
      for (const auto& [query, body] : fixture["responses"].items()) {
        backend->set_response(query, results_from(body));
      }
    }
    if (fixture.contains("default")) backend->set_default(results_from(fixture["default"]));
    if (fixture.contains("errors")) {
      for (const auto& q : fixture["errors"]) backend->fail_on(q.get<std::string>());
    }
  } catch (const ProviderError& e) {
    throw ConfigError(std::string("invalid search fixture: ") + e.what());
  }
  return backend;
}

std::unique_ptr<FixtureSearchBackend> FixtureSearchBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open search fixture: " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("invalid search fixture " + path + ": " + e.what());
  }
}

void FixtureSearchBackend::set_response(std::string_view query, std::vector<SearchResult> results) {
  responses_[text::collapse_whitespace(query)] = std::move(results);
}

void FixtureSearchBackend::set_default(std::vector<SearchResult> results) { default_ = std::move(results); }

void FixtureSearchBackend::fail_on(std::string_view query) { errors_.insert(text::collapse_whitespace(query)); }

std::vector<SearchResult> FixtureSearchBackend::do_search(std::string_view query, int /*max_results*/) {
  const auto key = text::collapse_whitespace(query);
  if (errors_.count(key)) throw TransportError("scripted search failure for: " + key);
  if (auto it = responses_.find(key); it != responses_.end()) return it->second;
  if (default_) return *default_;
  return {};
}

}  // namespace gseo::providers
