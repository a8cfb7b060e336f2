#include "gseo/cli/commands.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "gseo/baselines.hpp"
#include "gseo/errors.hpp"
#include "gseo/text.hpp"

namespace gseo::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

Evaluator make_evaluator(const RunConfig& config, Providers& providers) {
  return Evaluator{*providers.chat, *providers.reranker, config.llm, config.concurrency};
}

std::string format_vector(const PerformanceVector& v) {
  std::string out = fmt::format("version {}:", v.version);
  for (auto d : kAllDimensions) {
    if (auto c = v[d]) out += fmt::format(" {}={:.2f}", dimension_key(d), *c);
  }
  return out + fmt::format(" mean={:.3f}", v.mean());
}

class RunDirSink : public refine::TrajectorySink {
 public:
  explicit RunDirSink(const RunDirectory& run) : run_(run) {}
  void on_evaluation(const Evaluation& e) override { run_.save_evaluation(e); }
  void on_entry(const refine::TrajectoryEntry& entry) override { run_.save_entry(entry); }
  void on_finish(const refine::Trajectory& t) override {
    write_json_atomic(run_.trajectory_summary_path(),
                      {{"schema", "gseo/v1"},
                       {"termination", refine::termination_name(t.termination)},
                       {"entries", t.entries.size()}});
  }

 private:
  const RunDirectory& run_;
};

std::vector<Query> read_query_list(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("query list not found: " + path.string());
  std::vector<Query> out;
  for (const auto& line : text::split_lines(read_file(path))) {
    auto q = text::trim(line);
    if (q.empty() || q[0] == '#') continue;
    out.push_back({"q" + std::to_string(out.size() + 1), q, QueryOrigin::seed_dataset, {}});
  }
  if (out.empty()) throw UsageError("query list " + path.string() + " is empty");
  return out;
}

}  // namespace

Document read_document_file(const fs::path& path, const std::string& url) {
  if (!fs::exists(path) || !fs::is_regular_file(path)) throw UsageError("document not found: " + path.string());
  const auto content = read_file(path);
  Document doc;
  if (path.extension() == ".json") {
    try {
      doc = json::parse(content).get<Document>();
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  } else {
    doc.doc_id = path.stem().string();
    doc.body = text::trim(content);
    for (const auto& line : text::split_lines(doc.body)) {
      auto t = text::trim(line);
      if (t.empty()) continue;
      t.erase(0, t.find_first_not_of("# "));
      doc.title = text::trim(t);
      break;
    }
  }
  if (!url.empty()) doc.url = url;
  doc.version = 0;
  doc.provenance = Provenance::original();
  doc.validate();
  return doc;
}

BenchmarkCorpus cmd_corpus_build(const RunDirectory& run, const CorpusBuildOptions& options, const RunConfig& config,
                                 Providers& providers) {
  if (fs::exists(run.corpus_path()) && !options.force) {
    auto corpus = run.load_corpus();
    spdlog::info("corpus.json already present ({} pairs); pass --force to rebuild", corpus.pairs.size());
    return corpus;
  }

  Document source;
  if (options.seed_query) {
    Query seed{"seed", *options.seed_query, QueryOrigin::seed_dataset, {}};
    auto picked = build_benchmark_pair(*providers.search, seed, config.corpus.seed_top_n, config.rng_seed);
    source = std::move(picked.source);
  } else {
    source = read_document_file(*options.doc, options.url.value_or(""));
  }

  std::vector<Query> queries;
  if (options.queries) {
    queries = read_query_list(*options.queries);
  } else {
    auto candidates =
        synthesize_candidate_queries(*providers.chat, config.llm, source, config.corpus.candidates);
    queries = refine_queries(*providers.chat, config.llm, candidates, source);
  }

  if (!source.url.empty()) {
    auto report = filter_verified_queries(*providers.search, queries, source, config.corpus.verify_k,
                                          config.concurrency);
    for (const auto& q : report.rejected) spdlog::info("dropped '{}': source not in the top results", q.text);
    for (const auto& q : report.inconclusive) spdlog::warn("dropped '{}': verification search failed", q.text);
    queries = std::move(report.retained);
  } else {
    spdlog::warn("source has no URL; skipping query verification");
  }
  if (queries.empty()) throw CorpusError("no queries survived refinement and verification");
  if (static_cast<int>(queries.size()) > config.corpus.max_queries) queries.resize(config.corpus.max_queries);
  if (static_cast<int>(queries.size()) < config.corpus.min_queries) {
    spdlog::warn("only {} queries (configured minimum {})", queries.size(), config.corpus.min_queries);
  }

  auto corpus = retrieve_contexts(*providers.search, source, queries, config.retrieval_k, config.concurrency);
  run.save_corpus(corpus);
  fmt::print("corpus: {} pairs for '{}' -> {}\n", corpus.pairs.size(), source.title, run.corpus_path().string());
  return corpus;
}

Evaluation cmd_evaluate(const RunDirectory& run, int version, bool force, const RunConfig& config,
                        Providers& providers) {
  if (version < 0) throw UsageError("--version must be >= 0");
  auto corpus = run.load_corpus();
  Evaluation evaluation;
  if (fs::exists(run.eval_path(version)) && !force) {
    evaluation = run.load_evaluation(version);
  } else {
    const auto doc = run.load_version(version);
    evaluation = evaluate_document(make_evaluator(config, providers), doc, corpus);
    run.save_evaluation(evaluation);
  }
  fmt::print("{}\n", format_vector(evaluation.vector));
  return evaluation;
}

select::Selection cmd_optimize(const RunDirectory& run, const OptimizeOptions& options, const RunConfig& config,
                               Providers& providers) {
  if (options.force && options.resume) throw UsageError("--force and --resume are mutually exclusive");
  const auto corpus = run.load_corpus();
  if (options.force) run.clear_optimization();

  const std::string arm = options.no_selector ? "maco_no_selector" : "maco";

  refine::Trajectory trajectory;
  if (fs::exists(run.trajectory_summary_path())) {
    const auto summary = read_json(run.trajectory_summary_path());
    trajectory.entries = run.load_complete_entries();
    trajectory.termination = refine::parse_termination(summary.at("termination").get<std::string>());
    if (trajectory.entries.size() != summary.at("entries").get<std::size_t>()) {
      throw ValidationError("trajectory in " + run.root().string() + " is inconsistent; rerun with --force");
    }
    if (fs::exists(run.result_path(arm)) && fs::exists(run.selection_path())) {
      auto previous = select::selection_from_json(read_json(run.selection_path()));
      const bool same_mode = options.no_selector ? previous.policy == select::Policy::final_iteration
                                                 : previous.policy != select::Policy::final_iteration;
      if (same_mode) {
        fmt::print("already optimized: version {} ({})\n", previous.index, select::policy_name(previous.policy));
        return previous;
      }
    }
  } else {
    auto entries = run.load_complete_entries();
    if (!entries.empty() && !options.resume) {
      throw Error("partial trajectory in " + run.root().string() + "; pass --resume to continue or --force");
    }
    refine::LoopConfig loop{config.max_iterations, config.plateau, config.analyst};
    RunDirSink sink(run);
    trajectory = refine::run_refinement_loop(make_evaluator(config, providers), corpus.source, corpus, loop, &sink,
                                             std::move(entries));
  }

  auto selection = options.no_selector ? select::select_final_iteration(trajectory)
                                       : select::select_best_version(*providers.chat, config.llm, trajectory);
  const auto& chosen = trajectory.entries.at(selection.index);
  write_json_atomic(run.selection_path(), select::selection_to_json(selection));
  write_file_atomic(run.final_document_path(), chosen.document.body);
  const auto& first = trajectory.entries.front();
  write_json_atomic(run.result_path("original"), arm_result_json("original", first.document, first.evaluation));
  write_json_atomic(run.result_path(arm), arm_result_json(arm, chosen.document, chosen.evaluation));

  fmt::print("terminated: {} after {} revision(s)\n", refine::termination_name(trajectory.termination),
             trajectory.entries.size() - 1);
  fmt::print("selected {} ({})\n", format_vector(chosen.vector()), select::policy_name(selection.policy));
  return selection;
}

std::string cmd_baseline(const RunDirectory& run, const BaselineOptions& options, const RunConfig& config,
                         Providers& providers) {
  if (options.strategy.has_value() == options.pipeline.has_value()) {
    throw UsageError("pass exactly one of --strategy or --pipeline");
  }
  const auto catalog = config.strategy_catalog ? baselines::StrategyCatalog::load(config.strategy_catalog->string())
                                               : baselines::StrategyCatalog::builtin();
  std::vector<baselines::Strategy> chain;
  try {
    chain = options.strategy ? std::vector<baselines::Strategy>{catalog.resolve(*options.strategy)}
                             : baselines::parse_pipeline(catalog, *options.pipeline);
  } catch (const StrategyError& e) {
    throw UsageError(e.what());
  }
  if (chain.empty() || chain.size() > 4) throw UsageError("a pipeline takes 1 to 4 strategies");

  const auto label = baselines::chain_label(chain);
  const auto dir = run.baseline_dir(label);
  const auto arm = "baseline:" + label;
  if (fs::exists(dir / "eval.json") && fs::exists(run.result_path(arm)) && !options.force) {
    const auto e = evaluation_from_json(read_json(dir / "eval.json"));
    fmt::print("{} already evaluated: {}\n", label, format_vector(e.vector));
    return label;
  }

  const auto corpus = run.load_corpus();
  const auto doc = baselines::apply_pipeline(*providers.chat, config.llm, catalog, corpus.source, chain);
  write_file_atomic(dir / "document.txt", doc.body);
  auto meta = baselines::pipeline_metadata(catalog, chain);
  meta["provenance"] = doc.provenance.str();
  meta["version"] = doc.version;
  write_json_atomic(dir / "meta.json", meta);

  const auto evaluation = evaluate_document(make_evaluator(config, providers), doc, corpus);
  write_json_atomic(dir / "eval.json", evaluation_to_json(evaluation));
  write_json_atomic(run.result_path(arm), arm_result_json(arm, doc, evaluation));
  fmt::print("{}: {}\n", arm, format_vector(evaluation.vector));
  return label;
}

namespace {

struct ArmResult {
  std::string arm;
  std::string doc_id;
  std::map<Dimension, std::vector<double>> ratings;
};

std::vector<ArmResult> load_results(const RunDirectory& run) {
  std::vector<ArmResult> out;
  if (!fs::exists(run.results_dir())) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(run.results_dir())) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto j = read_json(f);
    if (j.value("schema", "") != "gseo/v1") throw ValidationError(f.string() + " is not schema gseo/v1");
    ArmResult r;
    r.arm = j.at("arm").get<std::string>();
    r.doc_id = j.value("doc_id", "");
    for (const auto& [key, values] : j.at("ratings").items()) {
      auto d = parse_dimension(key);
      if (!d) throw ValidationError(f.string() + ": unknown dimension " + key);
      r.ratings[*d] = values.get<std::vector<double>>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

int arm_rank(const std::string& arm) {
  if (arm == "original") return 0;
  if (arm.rfind("baseline:", 0) == 0) return 1;
  if (arm == "maco_no_selector") return 2;
  if (arm == "maco") return 3;
  return 4;
}

}  // namespace

ReportResult cmd_report(const std::vector<fs::path>& run_dirs, const ReportOptions& options, double tau) {
  if (run_dirs.empty()) throw UsageError("report needs at least one run directory");

  std::vector<std::pair<std::string, metrics::ScoreTable>> tables;
  std::map<std::string, std::size_t> by_arm_index;
  std::map<std::string, int> seen_names;

  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) throw UsageError("not a run directory: " + dir.string());
    RunDirectory run(dir);
    auto results = load_results(run);
    std::string name = fs::absolute(dir).lexically_normal().filename().string();
    if (name.empty()) name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    if (int n = seen_names[name]++; n > 0) name += "#" + std::to_string(n + 1);

    if (options.by_arm) {
      for (const auto& r : results) {
        auto [it, inserted] = by_arm_index.emplace(r.arm, tables.size());
        if (inserted) tables.emplace_back(r.arm, metrics::ScoreTable{});
        for (const auto& [dim, ratings] : r.ratings) tables[it->second].second[dim][name] = ratings;
      }
      continue;
    }

    const ArmResult* chosen = nullptr;
    for (const auto& preferred : {options.arm.value_or("maco"), std::string("maco_no_selector")}) {
      for (const auto& r : results) {
        if (!chosen && r.arm == preferred) chosen = &r;
      }
      if (options.arm) break;
    }
    if (!chosen) {
      throw Error("no " + options.arm.value_or("optimization") + " result in " + dir.string() +
                  (options.arm ? "" : "; run `gseo optimize` first"));
    }
    metrics::ScoreTable table;
    for (const auto& [dim, ratings] : chosen->ratings) table[dim][chosen->doc_id.empty() ? name : chosen->doc_id] = ratings;
    tables.emplace_back(name, std::move(table));
  }
  if (tables.empty()) throw Error("no results found in the given run directories");

  if (options.by_arm) {
    std::stable_sort(tables.begin(), tables.end(), [](const auto& a, const auto& b) {
      const int ra = arm_rank(a.first), rb = arm_rank(b.first);
      return ra != rb ? ra < rb : a.first < b.first;
    });
  }

  ReportResult result;
  json rows = json::array();
  for (auto& [label, table] : tables) {
    auto report = metrics::aggregate(table, tau);
    auto row = metrics::report_to_json(report);
    row["label"] = label;
    std::set<std::string> articles;
    for (const auto& [dim, per_article] : table) {
      for (const auto& [article, _] : per_article) articles.insert(article);
    }
    row["articles"] = articles;
    rows.push_back(std::move(row));
    result.rows.push_back({label, std::move(report)});
  }
  result.table = metrics::format_table(result.rows);
  result.json = {{"schema", "gseo/v1"}, {"tau", tau}, {"mode", options.by_arm ? "by_arm" : "by_run"},
                 {"rows", std::move(rows)}};

  std::optional<fs::path> out = options.out;
  if (!out && run_dirs.size() == 1) out = RunDirectory(run_dirs.front()).report_path();
  if (out) write_json_atomic(*out, result.json);
  fmt::print("{}", result.table);
  return result;
}

}  // namespace gseo::cli
