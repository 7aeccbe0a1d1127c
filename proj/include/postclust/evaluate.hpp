#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "postclust/corpus.hpp"
#include "postclust/dbscan.hpp"
#include "postclust/mrdbscan.hpp"
#include "postclust/vectorize.hpp"

namespace postclust {

/// Hubert-Arabie adjusted Rand index from pair counts. kNoise is an ordinary
/// category. Returns 1 when both labelings put every pair the same way with
/// no chance correction possible (n < 2 or a zero denominator).
/// Length mismatch raises ArgumentError.
double adjusted_rand_index(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
double adjusted_rand_index(const ClusterAssignment& a, const ClusterAssignment& b);

struct GridPoint {
  double epsilon = 0.01;
  std::size_t min_points = 5;
};

/// The 3 x 3 grid epsilon in {1e-3, 1e-2, 1e-1} x min_points in {5, 50, 100}.
std::vector<GridPoint> default_grid();

/// DBSCAN (A) against MR-DBSCAN (B) at one grid point.
struct AriReport {
  double epsilon = 0.0;
  std::size_t min_points = 0;
  double ari = 0.0;
  std::int32_t labels_a = 0;
  std::int32_t labels_b = 0;
  double coverage_a = 0.0;
  double coverage_b = 0.0;
  std::size_t n_partitions = 0;
  std::string error;  // non-empty when the grid point failed to run

  bool ok() const { return error.empty() && ari == 1.0 && labels_a == labels_b && coverage_a == coverage_b; }
  std::string to_json() const;
  static AriReport from_json(std::string_view line);
  bool operator==(const AriReport&) const = default;
};

struct VerifyOptions {
  Metric metric = Metric::euclidean;
  std::size_t max_points = 0;  // 0: default for the worker count
  std::size_t workers = 1;
  /// Test hook: corrupts one MR-DBSCAN label before comparison so the
  /// failure path can be exercised.
  bool inject_fault = false;
};

/// Runs both algorithms at every grid point. A grid point that throws is
/// reported with its error message and the suite continues.
std::vector<AriReport> run_verification_suite(const SparseRows& rows, std::span<const GridPoint> grid,
                                              const VerifyOptions& options = {});
std::vector<AriReport> run_verification_suite(const Corpus& corpus, std::span<const GridPoint> grid,
                                              const FeaturePipeline& pipeline, const VerifyOptions& options = {});

enum class Algorithm { dbscan, mr_dbscan };
std::string_view to_string(Algorithm algorithm);

struct BenchRecord {
  std::size_t n_posts = 0;
  double epsilon = 0.0;
  std::size_t min_points = 0;
  Algorithm algorithm = Algorithm::dbscan;
  StepTimings timings;  // per-step medians over the repeats
  bool discontinued = false;

  std::string to_json() const;
};

struct BenchOptions {
  std::size_t workers = 4;
  std::size_t max_points = 0;
  std::size_t repeats = 3;
  double time_budget_s = 960.0;
  std::size_t n_topics = 5;
  std::uint64_t seed = 42;
};

/// Per size: generates a synthetic corpus, featurizes it and times both
/// algorithms. A run that passes the time budget is cancelled and recorded
/// as discontinued; the series goes on with the next size.
std::vector<BenchRecord> run_scaling_bench(std::span<const std::size_t> sizes, const DbscanParams& params,
                                           const FeaturePipeline& pipeline, const BenchOptions& options = {});

/// Times MR-DBSCAN on fixed rows once per epsilon (medians over repeats).
std::vector<BenchRecord> run_epsilon_sweep(const SparseRows& rows, std::span<const double> epsilons,
                                           const DbscanParams& base, const BenchOptions& options = {});

/// Median of the element-wise timings; n_partitions taken from the first run.
StepTimings median_timings(std::span<const StepTimings> runs);

/// Aligned text tables with one row per report or record.
std::string format_ari_table(std::span<const AriReport> reports);
std::string format_bench_table(std::span<const BenchRecord> records);

}  // namespace postclust
