#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gseo/corpus.hpp"
#include "gseo/judge.hpp"
#include "gseo/providers/chat.hpp"
#include "gseo/providers/rerank.hpp"
#include "gseo/refine.hpp"
#include "gseo/text.hpp"

namespace gseo_test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(GSEO_FIXTURE_DIR) / rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gseo-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline gseo::Document make_doc(std::string body = "Solar panels convert sunlight into electricity using silicon cells. "
                                                  "They last about twenty-five years and need little maintenance.") {
  gseo::Document d;
  d.doc_id = "doc";
  d.title = "Solar panels";
  d.body = std::move(body);
  d.url = "https://example.org/solar";
  return d;
}

inline gseo::SearchResult make_result(std::string url, std::string title, std::string content, double score,
                                      int rank) {
  gseo::SearchResult r;
  r.url = std::move(url);
  r.title = std::move(title);
  r.content = std::move(content);
  r.relevance_score = score;
  r.rank = rank;
  return r;
}

/// n pairs with two contexts each.
inline gseo::BenchmarkCorpus make_corpus(std::size_t n, gseo::Document source = make_doc()) {
  gseo::BenchmarkCorpus c;
  c.source = std::move(source);
  for (std::size_t i = 0; i < n; ++i) {
    gseo::CorpusPair p;
    p.query = {"q" + std::to_string(i + 1), "How do solar panels work, variant " + std::to_string(i + 1) + "?",
               gseo::QueryOrigin::synthesized, {}};
    p.contexts.push_back(make_result("https://a.example/" + std::to_string(i), "Other A",
                                     "Photovoltaic cells are made of silicon.", 0.8, 1));
    p.contexts.push_back(make_result("https://b.example/" + std::to_string(i), "Other B",
                                     "Inverters convert direct current.", 0.6, 2));
    c.pairs.push_back(std::move(p));
  }
  return c;
}

inline constexpr std::string_view kRevisionMarker = "Added detail.";

/// Replies for every agent template. Judge ratings come from `rating`, given
/// the dimension and how many revision markers the judged text carries.
struct LoopScript {
  std::function<double(gseo::Dimension, std::size_t revisions)> rating = [](gseo::Dimension, std::size_t r) {
    return 5.0 + static_cast<double>(r);
  };
  std::string analyst_reply =
      "1. [targets: KC, SC] Add one concrete detail.\n2. [targets: CP] Name the guide explicitly.";
  std::function<std::string(const gseo::providers::ChatRequest&)> editor = [](const gseo::providers::ChatRequest& r) {
    return gseo::text::extract_tagged(r.messages.back().content, "document") + "\n\n" + std::string(kRevisionMarker);
  };
  std::string selector_reply = "version: 0\njustification: scripted";
  std::string answer = "Solar panels use silicon cells [1].";
};

inline std::shared_ptr<gseo::providers::ChatBackend> make_loop_backend(LoopScript script) {
  using gseo::providers::ChatRequest;
  return std::make_shared<gseo::providers::ScriptedChatBackend>(
      [script = std::move(script)](const ChatRequest& req) -> std::optional<std::string> {
        const auto& id = req.template_id;
        if (id == "rag.answer") return script.answer;
        if (id.rfind("judge.", 0) == 0) {
          const auto dim = *gseo::parse_dimension(id.substr(6));
          const auto revisions = gseo::text::count_occurrences(req.messages[1].content, kRevisionMarker);
          char buf[64];
          std::snprintf(buf, sizeof buf, "rating: %.1f\njustification: scripted judge", script.rating(dim, revisions));
          return std::string(buf);
        }
        if (id == "maco.analyze") return script.analyst_reply;
        if (id == "maco.edit") return script.editor(req);
        if (id == "maco.select") return script.selector_reply;
        return std::nullopt;
      });
}

}  // namespace gseo_test
