#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gseo/corpus.hpp"
#include "gseo/refine.hpp"

namespace gseo::cli {

/// Writes via a temporary sibling and rename, so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Two-space indented JSON with a trailing newline.
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);
std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Layout of one experiment run on disk.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path config_path() const { return root_ / "config.json"; }
  std::filesystem::path corpus_path() const { return root_ / "corpus.json"; }
  std::filesystem::path log_path() const { return root_ / "log.txt"; }
  std::filesystem::path trajectory_dir() const { return root_ / "trajectory"; }
  std::filesystem::path entry_dir(int version) const { return trajectory_dir() / std::to_string(version); }
  std::filesystem::path trajectory_summary_path() const { return trajectory_dir() / "summary.json"; }
  std::filesystem::path eval_path(int version) const;
  std::filesystem::path selection_path() const { return root_ / "selection.json"; }
  std::filesystem::path final_document_path() const { return root_ / "final" / "document.txt"; }
  std::filesystem::path baseline_dir(const std::string& label) const { return root_ / "baselines" / label; }
  std::filesystem::path results_dir() const { return root_ / "results"; }
  std::filesystem::path result_path(const std::string& arm) const;
  std::filesystem::path report_path() const { return root_ / "report.json"; }

  BenchmarkCorpus load_corpus() const;
  void save_corpus(const BenchmarkCorpus& corpus) const;

  void save_evaluation(const Evaluation& evaluation) const;
  Evaluation load_evaluation(int version) const;

  /// document.txt, vector.json, suggestions.json, then entry.json last: an
  /// entry counts as complete only once entry.json exists.
  void save_entry(const refine::TrajectoryEntry& entry) const;
  /// Complete entries 0..k, stopping at the first gap.
  std::vector<refine::TrajectoryEntry> load_complete_entries() const;
  Document load_version(int version) const;

  /// Removes trajectory, evaluations, selection, final document and the
  /// optimization result files.
  void clear_optimization() const;

 private:
  std::filesystem::path root_;
};

/// Result-file payload for one arm: the evaluated document's vector and its
/// ratings per dimension in record order.
nlohmann::json arm_result_json(const std::string& arm, const Document& doc, const Evaluation& evaluation);

}  // namespace gseo::cli
