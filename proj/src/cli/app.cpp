#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "CLI11.hpp"
#include "gseo/cli/commands.hpp"
#include "gseo/errors.hpp"

namespace gseo::cli {

namespace fs = std::filesystem;

namespace {

/// Routes logging to stderr and, once the run directory is known, log.txt.
/// Restores the previous default logger on destruction.
class LogScope {
 public:
  explicit LogScope(bool verbose) : previous_(spdlog::default_logger()), verbose_(verbose) { install({}); }
  ~LogScope() { spdlog::set_default_logger(previous_); }

  void attach(const fs::path& run_dir) {
    fs::create_directories(run_dir);
    install((run_dir / "log.txt").string());
  }

 private:
  void install(const std::string& file) {
    std::vector<spdlog::sink_ptr> sinks;
    auto console = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    console->set_level(verbose_ ? spdlog::level::debug : spdlog::level::warn);
    console->set_pattern("%l: %v");
    sinks.push_back(console);
    if (!file.empty()) {
      auto log = std::make_shared<spdlog::sinks::basic_file_sink_mt>(file);
      log->set_level(spdlog::level::debug);
      log->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
      sinks.push_back(log);
    }
    auto logger = std::make_shared<spdlog::logger>("gseo", sinks.begin(), sinks.end());
    logger->set_level(spdlog::level::debug);
    logger->flush_on(spdlog::level::info);
    spdlog::set_default_logger(logger);
  }

  std::shared_ptr<spdlog::logger> previous_;
  bool verbose_;
};

struct Prepared {
  RunConfig config;
  RunDirectory run;
  Providers providers;
};

/// Loads config, snapshots it into the run directory, then builds providers.
Prepared prepare(const std::optional<fs::path>& config_path, const fs::path& run_dir, LogScope& log) {
  auto config = load_config(config_path);
  log.attach(run_dir);
  RunDirectory run(run_dir);
  const auto snapshot = config_to_json(config);
  if (fs::exists(run.config_path())) {
    if (read_json(run.config_path()) != snapshot) {
      spdlog::warn("configuration differs from the snapshot in {}; updating it", run.config_path().string());
      write_json_atomic(run.config_path(), snapshot);
    }
  } else {
    write_json_atomic(run.config_path(), snapshot);
  }
  auto providers = make_providers(config);
  return {std::move(config), std::move(run), std::move(providers)};
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Optimize articles for influence on generative search answers", "gseo"};
  app.require_subcommand(1);
  std::optional<fs::path> config_path;
  bool verbose = false;
  app.add_option("--config", config_path, "TOML run configuration (default: $GSEO_CONFIG)");
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  auto* corpus = app.add_subcommand("corpus", "Benchmark corpus commands");
  corpus->require_subcommand(1);
  auto* build = corpus->add_subcommand("build", "Build corpus.json for a source document");
  fs::path build_dir;
  CorpusBuildOptions build_options;
  build->add_option("--run-dir", build_dir, "Run directory")->required();
  auto* doc_opt = build->add_option("--doc", build_options.doc, "Source document (.txt, .md or .json)");
  auto* seed_opt =
      build->add_option("--seed-query", build_options.seed_query, "Pick the source from this query's search results");
  doc_opt->excludes(seed_opt);
  build->add_option("--url", build_options.url, "URL of --doc, enables search verification")->needs(doc_opt);
  build->add_option("--queries", build_options.queries, "Curated query list, one per line (skips synthesis)");
  build->add_flag("--force", build_options.force, "Rebuild an existing corpus");

  auto* evaluate = app.add_subcommand("evaluate", "Score one document version on the corpus");
  fs::path eval_dir;
  int eval_version = 0;
  bool eval_force = false;
  evaluate->add_option("--run-dir", eval_dir, "Run directory")->required();
  evaluate->add_option("--version", eval_version, "Trajectory version (0 = original)");
  evaluate->add_flag("--force", eval_force, "Re-evaluate even if eval/<version>.json exists");

  auto* optimize = app.add_subcommand("optimize", "Run the refinement loop and select a version");
  fs::path opt_dir;
  OptimizeOptions opt_options;
  optimize->add_option("--run-dir", opt_dir, "Run directory")->required();
  optimize->add_flag("--no-selector", opt_options.no_selector, "Return the final iteration instead of selecting");
  auto* resume_flag = optimize->add_flag("--resume", opt_options.resume, "Continue from the last complete entry");
  optimize->add_flag("--force", opt_options.force, "Discard any previous trajectory")->excludes(resume_flag);

  auto* baseline = app.add_subcommand("baseline", "Rewrite the source with prompt strategies and evaluate it");
  fs::path base_dir;
  BaselineOptions base_options;
  baseline->add_option("--run-dir", base_dir, "Run directory")->required();
  auto* strategy_opt = baseline->add_option("--strategy", base_options.strategy, "Strategy key or abbreviation");
  baseline->add_option("--pipeline", base_options.pipeline, "Comma-separated chain, e.g. MQ,TT,CS,Fl")
      ->excludes(strategy_opt);
  baseline->add_flag("--force", base_options.force, "Redo an existing baseline");

  auto* report = app.add_subcommand("report", "Aggregate MIS/ISR/MIV tables across runs");
  std::vector<fs::path> report_dirs;
  ReportOptions report_options;
  std::optional<double> report_tau;
  report->add_option("run_dirs", report_dirs, "Run directories")->required();
  report->add_flag("--by-arm", report_options.by_arm, "One row per arm, pooling articles across runs");
  report->add_option("--arm", report_options.arm, "Arm to report per run (default: maco)");
  report->add_option("--out", report_options.out, "Where to write report.json");
  report->add_option("--tau", report_tau, "Success threshold (default: from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  LogScope log(verbose);
  try {
    if (build->parsed()) {
      if (!build_options.doc && !build_options.seed_query) throw UsageError("pass --doc or --seed-query");
      if (build_options.doc && !fs::exists(*build_options.doc)) {
        throw UsageError("document not found: " + build_options.doc->string());
      }
      auto p = prepare(config_path, build_dir, log);
      cmd_corpus_build(p.run, build_options, p.config, p.providers);
    } else if (evaluate->parsed()) {
      auto p = prepare(config_path, eval_dir, log);
      cmd_evaluate(p.run, eval_version, eval_force, p.config, p.providers);
    } else if (optimize->parsed()) {
      auto p = prepare(config_path, opt_dir, log);
      cmd_optimize(p.run, opt_options, p.config, p.providers);
    } else if (baseline->parsed()) {
      if (base_options.strategy.has_value() == base_options.pipeline.has_value()) {
        throw UsageError("pass exactly one of --strategy or --pipeline");
      }
      auto p = prepare(config_path, base_dir, log);
      cmd_baseline(p.run, base_options, p.config, p.providers);
    } else if (report->parsed()) {
      double tau = report_tau ? *report_tau : load_config(config_path).tau;
      if (!(tau >= 0.0 && tau <= 10.0)) throw UsageError("--tau must lie in [0, 10]");
      cmd_report(report_dirs, report_options, tau);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("gseo");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace gseo::cli
