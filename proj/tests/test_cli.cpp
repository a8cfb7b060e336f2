#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gseo/cli/commands.hpp"
#include "gseo/cli/run_dir.hpp"
#include "gseo/metrics.hpp"
#include "gseo/providers/http.hpp"
#include "support.hpp"

using namespace gseo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A scratch copy of the end-to-end fixtures with an adjustable config.
class Workspace {
 public:
  explicit Workspace(int max_iterations = 3) {
    for (const char* f : {"chat.json", "search.json", "article.txt"}) {
      fs::copy_file(gseo_test::fixture(std::string("e2e/") + f), dir_.path() / f);
    }
    auto config = slurp(gseo_test::fixture("e2e/config.toml"));
    const std::string key = "max_iterations = 3";
    config.replace(config.find(key), key.size(), "max_iterations = " + std::to_string(max_iterations));
    std::ofstream(dir_.path() / "config.toml") << config;
  }

  fs::path path(const std::string& rel) const { return dir_.path() / rel; }
  fs::path run_dir(const std::string& name = "run") const { return dir_.path() / name; }

  int gseo(std::vector<std::string> args) const {
    args.insert(args.begin(), {"--config", path("config.toml").string()});
    return cli::run(args);
  }

  int build_corpus(const std::string& name = "run") const {
    return gseo({"corpus", "build", "--run-dir", run_dir(name).string(), "--doc", path("article.txt").string()});
  }

  /// Replaces every judge rule with one constant rating.
  void judge_always(double rating) const {
    auto chat = json::parse(slurp(path("chat.json")));
    json rules = json::array();
    char reply[64];
    std::snprintf(reply, sizeof reply, "rating: %.1f\njustification: constant", rating);
    rules.push_back({{"template", "judge.*"}, {"reply", reply}});
    for (const auto& r : chat["rules"]) {
      if (r["template"].get<std::string>().rfind("judge.", 0) != 0) rules.push_back(r);
    }
    chat["rules"] = rules;
    std::ofstream(path("chat.json")) << chat.dump(2);
  }

 private:
  gseo_test::TempDir dir_;
};

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  if (fs::is_regular_file(root)) return {{root.filename().string(), slurp(root)}};
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  Workspace ws;
  CHECK(cli::run(std::vector<std::string>{}) == 2);
  CHECK(ws.gseo({"frobnicate"}) == 2);
  CHECK(ws.gseo({"corpus", "build", "--run-dir", ws.run_dir().string(), "--doc", ws.path("nope.txt").string()}) ==
        2);
  CHECK(ws.gseo({"corpus", "build", "--run-dir", ws.run_dir().string()}) == 2);
  CHECK(ws.gseo({"evaluate"}) == 2);
  CHECK(cli::run(std::vector<std::string>{"--help"}) == 0);
}

TEST_CASE("domain errors exit with 1") {
  Workspace ws;
  CHECK(ws.gseo({"evaluate", "--run-dir", ws.run_dir().string()}) == 1);
  CHECK(ws.gseo({"optimize", "--run-dir", ws.run_dir().string()}) == 1);
  CHECK(ws.gseo({"report", ws.run_dir().string()}) == 1);
}

TEST_CASE("corpus build is deterministic and idempotent") {
  Workspace ws;
  REQUIRE(ws.build_corpus() == 0);
  const auto corpus_path = ws.run_dir() / "corpus.json";
  const auto corpus = corpus_from_json(json::parse(slurp(corpus_path)));
  CHECK(corpus.pairs.size() == 3);
  CHECK(fs::exists(ws.run_dir() / "config.json"));

  const auto before = fs::last_write_time(corpus_path);
  REQUIRE(ws.build_corpus() == 0);
  CHECK(fs::last_write_time(corpus_path) == before);

  REQUIRE(ws.build_corpus("other") == 0);
  CHECK(slurp(corpus_path) == slurp(ws.run_dir("other") / "corpus.json"));

  CHECK(ws.gseo({"corpus", "build", "--run-dir", ws.run_dir().string(), "--doc", ws.path("article.txt").string(),
                 "--force"}) == 0);
  CHECK(slurp(corpus_path) == slurp(ws.run_dir("other") / "corpus.json"));
}

TEST_CASE("evaluate with all-nine ratings") {
  Workspace ws;
  ws.judge_always(9.0);
  REQUIRE(ws.build_corpus() == 0);
  REQUIRE(ws.gseo({"evaluate", "--run-dir", ws.run_dir().string()}) == 0);
  const auto e = evaluation_from_json(json::parse(slurp(ws.run_dir() / "eval" / "0.json")));
  for (auto d : kAllDimensions) CHECK(*e.vector[d] == 9.0);
  CHECK(e.records.size() == 3 * 6);
  CHECK(ws.gseo({"evaluate", "--run-dir", ws.run_dir().string(), "--version", "4"}) == 1);
}

TEST_CASE("optimize with T=0 selects the original") {
  Workspace ws(0);
  REQUIRE(ws.build_corpus() == 0);
  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir().string()}) == 0);
  const auto sel = json::parse(slurp(ws.run_dir() / "selection.json"));
  CHECK(sel.at("index") == 0);
  CHECK(slurp(ws.run_dir() / "final" / "document.txt") == slurp(ws.run_dir() / "trajectory" / "0" / "document.txt"));
}

TEST_CASE("optimize: selector, no-selector and idempotency") {
  Workspace ws;
  REQUIRE(ws.build_corpus() == 0);
  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir().string()}) == 0);
  auto sel = json::parse(slurp(ws.run_dir() / "selection.json"));
  CHECK(sel.at("policy") == "llm");
  CHECK(sel.at("index") == 2);
  const auto summary = json::parse(slurp(ws.run_dir() / "trajectory" / "summary.json"));
  CHECK(summary.at("termination") == "max_iterations");
  for (int t = 0; t <= 3; ++t) CHECK(fs::exists(ws.run_dir() / "trajectory" / std::to_string(t) / "entry.json"));

  const auto stamp = fs::last_write_time(ws.run_dir() / "selection.json");
  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir().string()}) == 0);
  CHECK(fs::last_write_time(ws.run_dir() / "selection.json") == stamp);

  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir().string(), "--no-selector"}) == 0);
  sel = json::parse(slurp(ws.run_dir() / "selection.json"));
  CHECK(sel.at("policy") == "final_iteration");
  CHECK(sel.at("index") == 3);
  CHECK(fs::exists(ws.run_dir() / "results" / "maco.json"));
  CHECK(fs::exists(ws.run_dir() / "results" / "maco_no_selector.json"));
  CHECK(providers::live_network_calls() == 0);
}

TEST_CASE("resume after an interruption matches the uninterrupted run") {
  Workspace ws;
  REQUIRE(ws.build_corpus("full") == 0);
  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir("full").string()}) == 0);

  fs::copy(ws.run_dir("full"), ws.run_dir("cut"), fs::copy_options::recursive);
  const auto cut = ws.run_dir("cut");
  // state left behind by a kill during iteration 3
  fs::remove_all(cut / "trajectory" / "3");
  fs::remove(cut / "eval" / "3.json");
  fs::remove(cut / "trajectory" / "summary.json");
  fs::remove(cut / "selection.json");
  fs::remove_all(cut / "final");
  fs::remove_all(cut / "results");
  auto entry2 = json::parse(slurp(cut / "trajectory" / "2" / "entry.json"));
  fs::remove(cut / "trajectory" / "2" / "entry.json");

  CHECK(ws.gseo({"optimize", "--run-dir", cut.string()}) == 1);
  REQUIRE(ws.gseo({"optimize", "--run-dir", cut.string(), "--resume"}) == 0);
  for (const char* part : {"trajectory", "eval", "selection.json", "final", "results"}) {
    CAPTURE(part);
    CHECK(tree(cut / part) == tree(ws.run_dir("full") / part));
  }
  CHECK(json::parse(slurp(cut / "trajectory" / "2" / "entry.json")) == entry2);
}

TEST_CASE("baselines") {
  Workspace ws;
  REQUIRE(ws.build_corpus() == 0);
  const auto dir = ws.run_dir().string();
  REQUIRE(ws.gseo({"baseline", "--run-dir", dir, "--strategy", "more_quotes"}) == 0);
  auto r = json::parse(slurp(ws.run_dir() / "results" / "baseline-more_quotes.json"));
  CHECK(r.at("provenance") == "baseline:more_quotes");
  CHECK(r.at("version") == 1);

  REQUIRE(ws.gseo({"baseline", "--run-dir", dir, "--pipeline", "MQ,TT,CS,Fl"}) == 0);
  r = json::parse(slurp(ws.run_dir() / "results" / "baseline-MQ+TT+CS+Fl.json"));
  CHECK(r.at("provenance") == "baseline:MQ+TT+CS+Fl");
  CHECK(r.at("version") == 4);
  const auto meta = json::parse(slurp(ws.run_dir() / "baselines" / "MQ+TT+CS+Fl" / "meta.json"));
  CHECK(meta.at("synthetic_content") == true);

  CHECK(ws.gseo({"baseline", "--run-dir", dir, "--strategy", "clickbait"}) == 2);
  CHECK(ws.gseo({"baseline", "--run-dir", dir}) == 2);
  CHECK(ws.gseo({"baseline", "--run-dir", dir, "--strategy", "fluent", "--pipeline", "MQ"}) == 2);
}

TEST_CASE("report rows equal the metrics aggregate") {
  Workspace ws;
  REQUIRE(ws.build_corpus("a") == 0);
  REQUIRE(ws.build_corpus("b") == 0);
  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir("a").string()}) == 0);
  REQUIRE(ws.gseo({"optimize", "--run-dir", ws.run_dir("b").string(), "--no-selector"}) == 0);

  const auto out = ws.path("report.json");
  REQUIRE(ws.gseo({"report", ws.run_dir("a").string(), ws.run_dir("b").string(), "--out", out.string()}) == 0);
  const auto report = json::parse(slurp(out));
  REQUIRE(report.at("rows").size() == 2);

  for (const auto& [row_index, run, arm] :
       std::vector<std::tuple<int, std::string, std::string>>{{0, "a", "maco"}, {1, "b", "maco_no_selector"}}) {
    const auto result = json::parse(slurp(ws.run_dir(run) / "results" / (arm + ".json")));
    metrics::ScoreTable table;
    for (const auto& [key, ratings] : result.at("ratings").items()) {
      table[*parse_dimension(key)]["article"] = ratings.get<std::vector<double>>();
    }
    const auto expected = metrics::report_to_json(metrics::aggregate(table, 7.0));
    const auto& row = report.at("rows")[row_index];
    for (auto d : kAllDimensions) {
      const std::string k(dimension_key(d));
      CHECK(row["dimensions"][k]["mis"].get<double>() == expected["dimensions"][k]["mis"].get<double>());
      CHECK(row["dimensions"][k]["isr"].get<double>() == expected["dimensions"][k]["isr"].get<double>());
      CHECK(row["dimensions"][k]["miv"].get<double>() == expected["dimensions"][k]["miv"].get<double>());
    }
  }

  REQUIRE(ws.gseo({"report", "--by-arm", ws.run_dir("a").string(), ws.run_dir("b").string(), "--out",
                   out.string()}) == 0);
  const auto by_arm = json::parse(slurp(out));
  std::vector<std::string> labels;
  for (const auto& row : by_arm.at("rows")) labels.push_back(row.at("label"));
  CHECK(labels == std::vector<std::string>{"original", "maco_no_selector", "maco"});
  CHECK(ws.gseo({"report", ws.run_dir("a").string(), "--tau", "11"}) == 2);
}
