#include "gseo/cli/run_dir.hpp"

#include <fstream>
#include <sstream>

#include "gseo/errors.hpp"

namespace gseo::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

RunDirectory::RunDirectory(fs::path root) : root_(std::move(root)) {}

fs::path RunDirectory::eval_path(int version) const { return root_ / "eval" / (std::to_string(version) + ".json"); }

fs::path RunDirectory::result_path(const std::string& arm) const {
  std::string name = arm;
  for (auto& c : name) {
    if (c == ':') c = '-';
  }
  return results_dir() / (name + ".json");
}

BenchmarkCorpus RunDirectory::load_corpus() const {
  if (!fs::exists(corpus_path())) {
    throw CorpusError("no corpus.json in " + root_.string() + "; run `gseo corpus build` first");
  }
  auto corpus = corpus_from_json(read_json(corpus_path()));
  corpus.validate();
  return corpus;
}

void RunDirectory::save_corpus(const BenchmarkCorpus& corpus) const {
  write_json_atomic(corpus_path(), corpus_to_json(corpus));
}

void RunDirectory::save_evaluation(const Evaluation& evaluation) const {
  write_json_atomic(eval_path(evaluation.version), evaluation_to_json(evaluation));
}

Evaluation RunDirectory::load_evaluation(int version) const {
  return evaluation_from_json(read_json(eval_path(version)));
}

void RunDirectory::save_entry(const refine::TrajectoryEntry& entry) const {
  const auto dir = entry_dir(entry.version());
  fs::remove(dir / "entry.json");
  write_file_atomic(dir / "document.txt", entry.document.body);
  write_json_atomic(dir / "vector.json", json{{"schema", "gseo/v1"}, {"vector", vector_to_json(entry.vector())}});
  json suggestions = json::array();
  for (const auto& s : entry.suggestions) suggestions.push_back(refine::suggestion_to_json(s));
  write_json_atomic(dir / "suggestions.json", json{{"schema", "gseo/v1"}, {"suggestions", suggestions}});
  write_json_atomic(dir / "entry.json", refine::entry_to_json(entry));
}

std::vector<refine::TrajectoryEntry> RunDirectory::load_complete_entries() const {
  std::vector<refine::TrajectoryEntry> entries;
  for (int t = 0;; ++t) {
    const auto dir = entry_dir(t);
    if (!fs::exists(dir / "entry.json") || !fs::exists(eval_path(t))) break;
    entries.push_back(
        refine::entry_from_json(read_json(dir / "entry.json"), read_file(dir / "document.txt"), load_evaluation(t)));
  }
  return entries;
}

Document RunDirectory::load_version(int version) const {
  if (version == 0) return load_corpus().source;
  const auto dir = entry_dir(version);
  if (!fs::exists(dir / "entry.json")) {
    throw ValidationError("version " + std::to_string(version) + " is not in the trajectory of " + root_.string());
  }
  json doc = read_json(dir / "entry.json").at("document");
  doc["body"] = read_file(dir / "document.txt");
  auto out = doc.get<Document>();
  out.validate();
  return out;
}

void RunDirectory::clear_optimization() const {
  fs::remove_all(trajectory_dir());
  fs::remove_all(root_ / "eval");
  fs::remove_all(root_ / "final");
  fs::remove(selection_path());
  for (const auto* arm : {"original", "maco", "maco_no_selector"}) fs::remove(result_path(arm));
}

json arm_result_json(const std::string& arm, const Document& doc, const Evaluation& evaluation) {
  json ratings = json::object();
  for (const auto& r : evaluation.records) {
    if (r.rating) ratings[std::string(dimension_key(r.dim))].push_back(*r.rating);
  }
  return {{"schema", "gseo/v1"},
          {"arm", arm},
          {"doc_id", doc.doc_id},
          {"version", doc.version},
          {"provenance", doc.provenance.str()},
          {"vector", vector_to_json(evaluation.vector)},
          {"ratings", std::move(ratings)}};
}

}  // namespace gseo::cli
