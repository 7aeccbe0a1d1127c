#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "postclust/classify.hpp"
#include "postclust/corpus.hpp"
#include "postclust/dbscan.hpp"
#include "postclust/evaluate.hpp"

namespace postclust {

/// A pipeline stage failed after inputs were accepted.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RunConfig {
  // Corpus: a file, or a synthetic corpus when `corpus_path` is empty.
  std::filesystem::path corpus_path;
  CorpusFormat corpus_format = CorpusFormat::jsonl;
  std::size_t synthetic_posts = 1000;
  std::size_t synthetic_topics = 5;
  std::uint64_t seed = 42;

  std::filesystem::path stopwords_path;
  std::filesystem::path seed_terms_path;
  std::filesystem::path training_path;

  std::size_t max_features = 1000;
  double epsilon = 0.01;
  std::size_t min_points = 5;
  Metric metric = Metric::euclidean;
  std::size_t max_points = 0;  // 0: total / (4 * workers)
  std::size_t workers = 4;
  bool include_titles = false;
  bool dump_matrix = false;

  std::filesystem::path output_dir = "run";

  /// Fills empty data paths with the shipped defaults.
  static RunConfig with_defaults();

  /// Throws UsageError naming the first invalid field.
  void validate() const;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  bool operator==(const RunConfig&) const = default;
};

/// Files of a completed run directory.
struct RunArtifacts {
  std::filesystem::path run_dir;
  std::filesystem::path config;
  std::filesystem::path posts;
  std::filesystem::path assignment;
  std::filesystem::path classification;
  std::filesystem::path timings;
  std::filesystem::path summary;
  std::filesystem::path status;
  std::optional<std::filesystem::path> matrix_dump;

  ClusterAssignment result;
  StepTimings step_timings;

  static RunArtifacts in(const std::filesystem::path& run_dir);
};

Corpus load_configured_corpus(const RunConfig& config);

/// Full pipeline with MR-DBSCAN; writes every artifact into
/// `config.output_dir`. status.json records the failing stage when a stage
/// throws, and the error is rethrown as PipelineError (UsageError for
/// unusable inputs).
RunArtifacts cmd_cluster(const RunConfig& config);

/// Verification grid over the configured corpus. Writes verify.jsonl and
/// verify.txt into the output directory.
std::vector<AriReport> cmd_verify(const RunConfig& config, const std::vector<GridPoint>& grid,
                                  bool inject_fault = false);

struct BenchRequest {
  std::vector<std::size_t> sizes;
  std::vector<double> epsilon_sweep;  // when non-empty, sweep epsilon on the configured corpus instead
  std::size_t repeats = 3;
  double time_budget_s = 960.0;
};

/// Writes bench.jsonl and bench.txt into the output directory.
std::vector<BenchRecord> cmd_bench(const RunConfig& config, const BenchRequest& request);

struct StatsQuery {
  std::optional<std::int32_t> cluster;
  std::optional<ClassLabel> label;
  bool json = false;
};

/// Parses a cluster filter ("noise" or a cluster ID).
std::int32_t parse_cluster_filter(const std::string& text);

/// Report over a completed run directory; reads files only. Unknown cluster
/// IDs raise LookupError listing the valid ones.
std::string cmd_stats(const std::filesystem::path& run_dir, const StatsQuery& query);

}  // namespace postclust
