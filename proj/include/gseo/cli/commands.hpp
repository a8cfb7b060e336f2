#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gseo/cli/config.hpp"
#include "gseo/cli/run_dir.hpp"
#include "gseo/metrics.hpp"
#include "gseo/select.hpp"

namespace gseo::cli {

struct CorpusBuildOptions {
  std::optional<std::filesystem::path> doc;
  std::optional<std::string> url;  // identity of --doc for verification
  std::optional<std::string> seed_query;
  std::optional<std::filesystem::path> queries;  // one curated query per line
  bool force = false;
};

struct OptimizeOptions {
  bool no_selector = false;
  bool resume = false;
  bool force = false;
};

struct BaselineOptions {
  std::optional<std::string> strategy;
  std::optional<std::string> pipeline;
  bool force = false;
};

struct ReportOptions {
  bool by_arm = false;
  std::optional<std::string> arm;
  std::optional<std::filesystem::path> out;
};

/// Reads a plain-text or JSON document. Text files take their title from the
/// first non-empty line and their id from the file stem.
Document read_document_file(const std::filesystem::path& path, const std::string& url = {});

/// Builds the benchmark corpus: synthesize and refine queries (unless a query
/// list is given), verify them against search when the source has a URL, then
/// retrieve contexts.
BenchmarkCorpus cmd_corpus_build(const RunDirectory& run, const CorpusBuildOptions& options, const RunConfig& config,
                                 Providers& providers);

Evaluation cmd_evaluate(const RunDirectory& run, int version, bool force, const RunConfig& config,
                        Providers& providers);

select::Selection cmd_optimize(const RunDirectory& run, const OptimizeOptions& options, const RunConfig& config,
                               Providers& providers);

/// Returns the baseline label ("more_quotes", "MQ+TT+CS+Fl").
std::string cmd_baseline(const RunDirectory& run, const BaselineOptions& options, const RunConfig& config,
                         Providers& providers);

struct ReportResult {
  std::vector<metrics::ReportRow> rows;
  std::string table;
  nlohmann::json json;
};

ReportResult cmd_report(const std::vector<std::filesystem::path>& run_dirs, const ReportOptions& options,
                        double tau);

/// Full command line: parses, loads config, dispatches. Returns the exit code
/// (0 success, 1 domain error, 2 usage error).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace gseo::cli
